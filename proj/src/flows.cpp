#include "contactlab/flows.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace contactlab {

namespace {

// Fehlberg 4(5) tableau; the field is autonomous so the nodes c_i are not needed.
constexpr double kA[6][5] = {
    {},
    {1.0 / 4.0},
    {3.0 / 32.0, 9.0 / 32.0},
    {1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0},
    {439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0},
    {-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0},
};
constexpr std::array<double, 6> kB5{16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0};
constexpr std::array<double, 6> kB4{25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0};

bool in_domain(const Box& domain, const Eigen::VectorXd& x)
{
    return x.allFinite() && (domain.dimension() == 0 || domain.contains(x));
}

struct Stepper
{
    const VectorField& field;
    const IntegratorConfig& config;

    // A degenerate structure means the point is off the chart, like a domain error.
    Eigen::VectorXd at(const Eigen::VectorXd& y) const
    {
        try {
            return field(y);
        } catch (const SingularMatrixError& e) {
            throw DomainError(e.what());
        }
    }

    double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1) const
    {
        const Eigen::ArrayXd scale =
            config.abs_tol + config.rel_tol * y0.array().abs().max(y1.array().abs());
        return (err.array().abs() / scale).maxCoeff();
    }

    // Fifth-order solution and scaled error estimate.
    std::pair<Eigen::VectorXd, double> rkf45(const Eigen::VectorXd& y, const Eigen::VectorXd& k0, double h) const
    {
        std::array<Eigen::VectorXd, 6> k;
        k[0] = k0;
        for (int s = 1; s < 6; ++s) {
            Eigen::VectorXd ys = y;
            for (int j = 0; j < s; ++j)
                ys += h * kA[s][j] * k[static_cast<std::size_t>(j)];
            k[static_cast<std::size_t>(s)] = at(ys);
        }
        Eigen::VectorXd y5 = y, err = Eigen::VectorXd::Zero(y.size());
        for (std::size_t s = 0; s < 6; ++s) {
            y5 += h * kB5[s] * k[s];
            err += h * (kB5[s] - kB4[s]) * k[s];
        }
        return {y5, error_norm(err, y, y5)};
    }

    Eigen::VectorXd rk4(const Eigen::VectorXd& y, double h) const
    {
        const Eigen::VectorXd k1 = at(y);
        const Eigen::VectorXd k2 = at(y + 0.5 * h * k1);
        const Eigen::VectorXd k3 = at(y + 0.5 * h * k2);
        const Eigen::VectorXd k4 = at(y + h * k3);
        return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    double initial_step(const Eigen::VectorXd& y, const Eigen::VectorXd& f0, double span) const
    {
        const Eigen::ArrayXd scale = config.abs_tol + config.rel_tol * y.array().abs();
        const double d0 = (y.array() / scale).matrix().norm();
        const double d1 = (f0.array() / scale).matrix().norm();
        double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::min({h, std::abs(span), config.max_step});
    }
};

void finish(Trajectory& out, FlowStatus status, std::string message)
{
    out.status = status;
    out.message = std::move(message);
}

Trajectory integrate_fixed(const VectorField& field, const Eigen::VectorXd& x0, double t_final,
                           const IntegratorConfig& config, const Box& domain, Trajectory out)
{
    Stepper stepper{field, config};
    const auto steps = static_cast<std::size_t>(std::ceil(std::abs(t_final) / config.step));
    const double h = t_final / static_cast<double>(steps);
    Eigen::VectorXd y = x0;
    for (std::size_t k = 1; k <= steps; ++k) {
        if (k > config.max_steps) {
            finish(out, FlowStatus::MaxStepsExceeded, "step budget exhausted");
            return out;
        }
        Eigen::VectorXd next;
        try {
            next = stepper.rk4(y, h);
        } catch (const DomainError& e) {
            finish(out, FlowStatus::DomainExit, e.what());
            return out;
        }
        if (!in_domain(domain, next)) {
            finish(out, FlowStatus::DomainExit, "trajectory left the domain");
            return out;
        }
        y = std::move(next);
        out.times.push_back(k == steps ? t_final : static_cast<double>(k) * h);
        out.points.push_back(y);
        out.local_error.push_back(0.0);
    }
    return out;
}

Trajectory integrate_adaptive(const VectorField& field, const Eigen::VectorXd& x0, double t_final,
                              const IntegratorConfig& config, const Box& domain, Trajectory out)
{
    Stepper stepper{field, config};
    const double dir = t_final > 0.0 ? 1.0 : -1.0;
    Eigen::VectorXd y = x0;
    Eigen::VectorXd fy;
    try {
        fy = stepper.at(y);
    } catch (const DomainError& e) {
        finish(out, FlowStatus::DomainExit, e.what());
        return out;
    }
    double t = 0.0;
    double h = stepper.initial_step(y, fy, t_final);
    std::size_t accepted = 0;
    while (dir * (t_final - t) > 0.0) {
        if (accepted >= config.max_steps) {
            finish(out, FlowStatus::MaxStepsExceeded, "step budget exhausted");
            return out;
        }
        const double remaining = std::abs(t_final - t);
        const bool last = h >= remaining;
        const double step = dir * (last ? remaining : h);
        const double floor = 1e-12 * std::max(1.0, std::abs(t));

        bool domain_trouble = false;
        Eigen::VectorXd next;
        double err = std::numeric_limits<double>::infinity();
        try {
            std::tie(next, err) = stepper.rkf45(y, fy, step);
            if (!in_domain(domain, next))
                domain_trouble = true;
        } catch (const DomainError&) {
            domain_trouble = true;
        }
        if (domain_trouble || !(err <= 1.0)) {
            if (std::abs(step) <= floor) {
                finish(out, domain_trouble ? FlowStatus::DomainExit : FlowStatus::StepFailure,
                       domain_trouble ? "trajectory left the domain"
                                      : "step size underflow at t = " + std::to_string(t));
                return out;
            }
            const double shrink = domain_trouble || !std::isfinite(err) ? 0.5
                                                                        : std::max(0.2, 0.9 * std::pow(err, -0.2));
            h = std::abs(step) * shrink;
            continue;
        }

        Eigen::VectorXd f_next;
        try {
            f_next = stepper.at(next);
        } catch (const DomainError&) {
            if (std::abs(step) <= floor) {
                finish(out, FlowStatus::DomainExit, "trajectory left the domain");
                return out;
            }
            h = 0.5 * std::abs(step);
            continue;
        }
        t = last ? t_final : t + step;
        y = std::move(next);
        fy = std::move(f_next);
        ++accepted;
        out.times.push_back(t);
        out.points.push_back(y);
        out.local_error.push_back(err);

        const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = std::min(std::abs(step) * grow, config.max_step);
    }
    return out;
}

Eigen::VectorXd endpoint(const Trajectory& trajectory)
{
    switch (trajectory.status) {
    case FlowStatus::Completed:
        return trajectory.back();
    case FlowStatus::DomainExit:
        throw DomainError("flow left the domain: " + trajectory.message);
    default:
        throw ConvergenceError("integration failed: " + trajectory.message);
    }
}

} // namespace

void IntegratorConfig::validate() const
{
    if (method == Method::RK4 && !(step > 0.0))
        throw InputError("RK4 step must be positive");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw InputError("integrator tolerances must be positive");
    if (!(max_step > 0.0))
        throw InputError("max_step must be positive");
    if (max_steps == 0)
        throw InputError("max_steps must be positive");
}

std::string to_string(FlowStatus status)
{
    switch (status) {
    case FlowStatus::Completed:
        return "completed";
    case FlowStatus::DomainExit:
        return "domain_exit";
    case FlowStatus::MaxStepsExceeded:
        return "max_steps_exceeded";
    case FlowStatus::StepFailure:
        return "step_failure";
    }
    return "unknown";
}

VectorField contact_field(const ContactChart& chart, const Expression& f)
{
    return [chart, f](const Eigen::VectorXd& x) { return hamiltonian_field_at(chart, f, x); };
}

VectorField symplectic_field(const SympChart& symp, const Expression& F)
{
    return [symp, F](const Eigen::VectorXd& X) { return symp_hamiltonian_field_at(symp, F, X); };
}

Trajectory integrate(const VectorField& field, const Eigen::VectorXd& x0, double t_final,
                     const IntegratorConfig& config, const Box& domain)
{
    config.validate();
    if (!std::isfinite(t_final))
        throw InputError("final time must be finite");
    if (domain.dimension() != 0 && domain.dimension() != x0.size())
        throw InputError("domain dimension does not match the initial point");
    if (!in_domain(domain, x0))
        throw DomainError("initial point lies outside the domain");

    Trajectory out;
    out.times.push_back(0.0);
    out.points.push_back(x0);
    out.local_error.push_back(0.0);
    if (t_final == 0.0)
        return out;
    if (config.method == Method::RK4)
        return integrate_fixed(field, x0, t_final, config, domain, std::move(out));
    return integrate_adaptive(field, x0, t_final, config, domain, std::move(out));
}

Trajectory integrate(const ContactChart& chart, const Expression& f, const Eigen::VectorXd& x0, double t_final,
                     const IntegratorConfig& config, const Box& domain)
{
    return integrate(contact_field(chart, f), x0, t_final, config, domain);
}

Trajectory integrate(const SympChart& symp, const Expression& F, const Eigen::VectorXd& X0, double t_final,
                     const IntegratorConfig& config, const Box& domain)
{
    return integrate(symplectic_field(symp, F), X0, t_final, config, domain);
}

Eigen::VectorXd flow_map(const VectorField& field, double t, const Eigen::VectorXd& x0,
                         const IntegratorConfig& config, const Box& domain)
{
    return endpoint(integrate(field, x0, t, config, domain));
}

Eigen::VectorXd flow_map(const ContactChart& chart, const Expression& f, double t, const Eigen::VectorXd& x0,
                         const IntegratorConfig& config, const Box& domain)
{
    return flow_map(contact_field(chart, f), t, x0, config, domain);
}

Eigen::VectorXd flow_map(const SympChart& symp, const Expression& F, double t, const Eigen::VectorXd& X0,
                         const IntegratorConfig& config, const Box& domain)
{
    return flow_map(symplectic_field(symp, F), t, X0, config, domain);
}

Eigen::VectorXd group_action(const std::vector<VectorField>& fields, const Eigen::VectorXd& t,
                             const Eigen::VectorXd& x0, const IntegratorConfig& config, const Box& domain)
{
    if (static_cast<std::size_t>(t.size()) != fields.size())
        throw InputError("group action needs one time per integral");
    Eigen::VectorXd x = x0;
    for (std::size_t k = fields.size(); k-- > 0;)
        x = flow_map(fields[k], t[static_cast<Eigen::Index>(k)], x, config, domain);
    return x;
}

Eigen::VectorXd group_action(const ContactChart& chart, const std::vector<Expression>& integrals,
                             const Eigen::VectorXd& t, const Eigen::VectorXd& x0, const IntegratorConfig& config,
                             const Box& domain)
{
    std::vector<VectorField> fields;
    for (const auto& f : integrals)
        fields.push_back(contact_field(chart, f));
    return group_action(fields, t, x0, config, domain);
}

Eigen::VectorXd group_action(const SympChart& symp, const std::vector<Expression>& integrals,
                             const Eigen::VectorXd& t, const Eigen::VectorXd& X0, const IntegratorConfig& config,
                             const Box& domain)
{
    std::vector<VectorField> fields;
    for (const auto& F : integrals)
        fields.push_back(symplectic_field(symp, F));
    return group_action(fields, t, X0, config, domain);
}

std::vector<double> derivative_weights(double t0, const std::vector<double>& nodes)
{
    // Fornberg's recursion restricted to orders 0 and 1.
    const std::size_t m = nodes.size();
    std::vector<std::array<double, 2>> c(m, {0.0, 0.0});
    if (m == 0)
        return {};
    c[0][0] = 1.0;
    double c1 = 1.0;
    double c4 = nodes[0] - t0;
    for (std::size_t i = 1; i < m; ++i) {
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - t0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i)
        w[i] = c[i][1];
    return w;
}

double dissipation_residual(const ContactChart& chart, const Expression& h, const Expression& f,
                            const Trajectory& trajectory)
{
    const std::size_t m = trajectory.size();
    if (m < 2)
        return 0.0;
    std::vector<double> values(m), Rh(m);
    for (std::size_t k = 0; k < m; ++k) {
        const Eigen::VectorXd& x = trajectory.points[k];
        values[k] = eval(f, x);
        Rh[k] = eval_jet1(h, x).gradient.dot(reeb_at(chart, x));
    }
    const std::size_t width = std::min<std::size_t>(7, m);
    double worst = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t lo = std::min(k >= width / 2 ? k - width / 2 : 0, m - width);
        const std::vector<double> nodes(trajectory.times.begin() + static_cast<std::ptrdiff_t>(lo),
                                        trajectory.times.begin() + static_cast<std::ptrdiff_t>(lo + width));
        const std::vector<double> w = derivative_weights(trajectory.times[k], nodes);
        double derivative = 0.0;
        for (std::size_t i = 0; i < width; ++i)
            derivative += w[i] * values[lo + i];
        worst = std::max(worst, std::abs(derivative + Rh[k] * values[k]));
    }
    return worst;
}

void write_csv(std::ostream& out, const Trajectory& trajectory, const Coordinates& coords)
{
    out << "t";
    for (const auto& c : coords)
        out << ',' << c;
    out << '\n';
    out << std::setprecision(17);
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        out << trajectory.times[k];
        for (Eigen::Index i = 0; i < trajectory.points[k].size(); ++i)
            out << ',' << trajectory.points[k][i];
        out << '\n';
    }
}

} // namespace contactlab
