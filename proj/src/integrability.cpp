#include "contactlab/integrability.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace contactlab {

namespace {

constexpr double kRayMembership = 1e-6;

std::string format_point(const Eigen::VectorXd& x)
{
    std::ostringstream os;
    os << std::setprecision(6) << '(';
    for (Eigen::Index i = 0; i < x.size(); ++i)
        os << (i ? ", " : "") << x[i];
    os << ')';
    return os.str();
}

Eigen::VectorXd eval_all(const std::vector<Expression>& fs, const Eigen::VectorXd& x)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(fs.size()));
    for (std::size_t a = 0; a < fs.size(); ++a)
        out[static_cast<Eigen::Index>(a)] = eval(fs[a], x);
    return out;
}

Eigen::MatrixXd gradients(const std::vector<Expression>& fs, const Eigen::VectorXd& x)
{
    Eigen::MatrixXd J(static_cast<Eigen::Index>(fs.size()), x.size());
    for (std::size_t a = 0; a < fs.size(); ++a)
        J.row(static_cast<Eigen::Index>(a)) = eval_jet1(fs[a], x).gradient.transpose();
    return J;
}

int numerical_rank(const Eigen::MatrixXd& J, double tol)
{
    const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(J).singularValues();
    if (s.size() == 0 || s[0] == 0.0)
        return 0;
    return static_cast<int>((s.array() > tol * s[0]).count());
}

void check_lambda(const ContactSystem& system, const Eigen::VectorXd& lambda)
{
    if (lambda.size() != system.n() + 1)
        throw InputError("Lambda must have " + std::to_string(system.n() + 1) + " components");
    if (!(lambda.norm() > 0.0))
        throw InputError("Lambda must be nonzero");
}

// Evaluates fn at every point, rethrowing singular-structure errors with the point.
template <typename Fn>
void for_each_point(const std::vector<Eigen::VectorXd>& points, Fn&& fn)
{
    for (const auto& x : points) {
        try {
            fn(x);
        } catch (const SingularMatrixError& e) {
            throw SingularMatrixError(std::string(e.what()) + " at " + format_point(x));
        }
    }
}

void record(CheckReport& report, double value, const Eigen::VectorXd& x)
{
    if (value > report.residual || report.worst_point.size() == 0) {
        report.residual = std::max(report.residual, value);
        report.worst_point = x;
    }
}

void check_on_ray(const ContactSystem& system, const Eigen::VectorXd& lambda, const Eigen::VectorXd& x)
{
    const double res = ray_residual(system, lambda, x);
    if (!(res < kRayMembership))
        throw InputError("point " + format_point(x) + " is not on the ray preimage (relative residual " +
                         std::to_string(res) + ")");
}

Eigen::MatrixXd lattice_or_identity(const SectionSpec& section, int n)
{
    if (section.lattice.size() == 0)
        return Eigen::MatrixXd::Identity(n + 1, n + 1);
    if (section.lattice.rows() != n + 1 || section.lattice.cols() != n + 1)
        throw InputError("lattice basis must be " + std::to_string(n + 1) + "x" + std::to_string(n + 1));
    return section.lattice;
}

std::vector<Expression> combine(const Eigen::MatrixXd& M, const std::vector<Expression>& fs)
{
    if (M.isIdentity(0.0))
        return fs;
    std::vector<Expression> out;
    for (Eigen::Index a = 0; a < M.rows(); ++a) {
        Expression sum = Expression::constant(0.0, fs.front().coords_ptr());
        for (Eigen::Index b = 0; b < M.cols(); ++b)
            if (M(a, b) != 0.0)
                sum = sum + M(a, b) * fs[static_cast<std::size_t>(b)];
        out.push_back(sum);
    }
    return out;
}

void check_section_shape(const SympSystem& system, const SectionSpec& section)
{
    if (section.params->size() != static_cast<std::size_t>(system.n() + 1))
        throw InputError("section '" + section.name + "' needs " + std::to_string(system.n() + 1) + " parameters");
    if (section.components.size() != static_cast<std::size_t>(system.chart.dimension()))
        throw InputError("section '" + section.name + "' needs " + std::to_string(system.chart.dimension()) +
                         " components");
}

} // namespace

CheckReport involution_check(const ContactSystem& system, std::size_t n_samples, double tol, std::uint64_t seed)
{
    CheckReport report;
    report.tolerance = tol;
    report.seed = seed;
    const auto points = sample_box(system.region, n_samples, seed);
    report.samples = points.size();
    const std::size_t m = system.integrals.size();
    for_each_point(points, [&](const Eigen::VectorXd& x) {
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a + 1; b < m; ++b)
                record(report, std::abs(jacobi_bracket_at(system.chart, system.integrals[a], system.integrals[b], x)),
                       x);
    });
    report.pass = report.residual < tol;
    return report;
}

RankReport rank_check(const ContactSystem& system, std::size_t n_samples, double tol, std::uint64_t seed)
{
    RankReport report;
    report.required = system.n();
    report.tolerance = tol;
    report.seed = seed;
    const auto points = sample_box(system.region, n_samples, seed);
    report.samples = points.size();
    report.min_rank = static_cast<int>(system.integrals.size());
    for (const auto& x : points)
        report.min_rank = std::min(report.min_rank, numerical_rank(gradients(system.integrals, x), tol));
    report.pass = !points.empty() && report.min_rank >= report.required;
    return report;
}

RayPoint ray_project(const ContactSystem& system, const Eigen::VectorXd& lambda, const Eigen::VectorXd& seed,
                     double tol, int max_iterations)
{
    check_lambda(system, lambda);
    if (seed.size() != system.chart.dimension())
        throw InputError("seed point has the wrong dimension");
    const Eigen::Index d = seed.size();
    const Eigen::Index m = lambda.size();

    Eigen::VectorXd x = seed;
    Eigen::VectorXd F = eval_all(system.integrals, x);
    double r = F.dot(lambda) / lambda.squaredNorm();
    if (!(r > 0.0))
        r = F.norm() > 0.0 ? F.norm() / lambda.norm() : 1.0;

    auto residual = [&](const Eigen::VectorXd& y, double s) -> Eigen::VectorXd {
        return eval_all(system.integrals, y) - s * lambda;
    };
    Eigen::VectorXd G = residual(x, r);
    RayPoint out;
    for (; out.iterations < max_iterations && !(G.norm() < tol); ++out.iterations) {
        Eigen::MatrixXd J(m, d + 1);
        J.leftCols(d) = gradients(system.integrals, x);
        J.col(d) = -lambda;
        const Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-G);
        double scale = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 20 && !accepted; ++halving, scale *= 0.5) {
            const Eigen::VectorXd xn = x + scale * step.head(d);
            const double rn = r + scale * step[d];
            try {
                Eigen::VectorXd Gn = residual(xn, rn);
                if (Gn.norm() < G.norm()) {
                    x = xn;
                    r = rn;
                    G = std::move(Gn);
                    accepted = true;
                }
            } catch (const DomainError&) {
            }
        }
        if (!accepted)
            break;
    }
    if (!(G.norm() < tol))
        throw ConvergenceError("ray projection did not converge (residual " + std::to_string(G.norm()) + ")");
    if (!(r > 0.0))
        throw DomainError("ray projection reached r = " + std::to_string(r) + " <= 0");
    if (!system.region.contains(x))
        throw DomainError("ray projection left the region at " + format_point(x));
    out.x = x;
    out.r = r;
    out.residual = G.norm();
    return out;
}

double ray_residual(const ContactSystem& system, const Eigen::VectorXd& lambda, const Eigen::VectorXd& x)
{
    check_lambda(system, lambda);
    const Eigen::VectorXd F = eval_all(system.integrals, x);
    if (!(F.norm() > 0.0))
        return std::numeric_limits<double>::infinity();
    const double r = std::max(0.0, F.dot(lambda) / lambda.squaredNorm());
    return (F - r * lambda).norm() / F.norm();
}

CheckReport coisotropy_check(const ContactSystem& system, const Eigen::VectorXd& lambda,
                             const std::vector<Eigen::VectorXd>& points, double tol)
{
    CheckReport report;
    report.tolerance = tol;
    report.samples = points.size();
    const std::size_t m = system.integrals.size();
    for_each_point(points, [&](const Eigen::VectorXd& x) {
        check_on_ray(system, lambda, x);
        const Eigen::VectorXd f = eval_all(system.integrals, x);
        Eigen::MatrixXd br = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a + 1; b < m; ++b) {
                const auto i = static_cast<Eigen::Index>(a), j = static_cast<Eigen::Index>(b);
                br(i, j) = jacobi_bracket_at(system.chart, system.integrals[a], system.integrals[b], x);
                br(j, i) = -br(i, j);
            }
        for (Eigen::Index a = 0; a < f.size(); ++a)
            for (Eigen::Index b = 0; b < f.size(); ++b)
                for (Eigen::Index c = 0; c < f.size(); ++c)
                    record(report, std::abs(f[a] * br(b, c) + f[c] * br(a, b) + f[b] * br(c, a)), x);
    });
    report.pass = !points.empty() && report.residual < tol;
    return report;
}

CheckReport tangency_check(const ContactSystem& system, const Eigen::VectorXd& lambda,
                           const std::vector<Eigen::VectorXd>& points, double tol)
{
    CheckReport report;
    report.tolerance = tol;
    report.samples = points.size();
    for_each_point(points, [&](const Eigen::VectorXd& x) {
        check_on_ray(system, lambda, x);
        const Eigen::VectorXd f = eval_all(system.integrals, x);
        const Eigen::MatrixXd df = gradients(system.integrals, x);
        for (const auto& fc : system.integrals) {
            const Eigen::VectorXd Xc = hamiltonian_field_at(system.chart, fc, x);
            const Eigen::VectorXd derivative = df * Xc; // X_{f_c}(f_a)
            for (Eigen::Index a = 0; a < f.size(); ++a)
                for (Eigen::Index b = 0; b < f.size(); ++b)
                    record(report, std::abs(f[a] * derivative[b] - f[b] * derivative[a]), x);
        }
    });
    report.pass = !points.empty() && report.residual < tol;
    return report;
}

CheckReport dissipative_map_check(const ContactSystem& system, const Eigen::VectorXd& lambda,
                                  const std::vector<Eigen::VectorXd>& points, double tol)
{
    CheckReport report = coisotropy_check(system, lambda, points, tol);
    for (const auto& x : points)
        if (numerical_rank(gradients(system.integrals, x), 1e-10) < system.n())
            report.pass = false;
    return report;
}

SympSystem::SympSystem(ContactSystem system, std::string fiber)
    : contact(std::move(system)), chart(contact.chart, std::move(fiber))
{
    for (const auto& f : contact.integrals)
        integrals.push_back(lift_function(chart, f));
}

SectionSpec SectionSpec::parse(std::string name, Coordinates params, const std::vector<std::string>& components,
                               Box domain)
{
    SectionSpec spec;
    spec.name = std::move(name);
    spec.params = std::make_shared<const Coordinates>(std::move(params));
    for (const auto& c : components)
        spec.components.push_back(contactlab::parse(c, spec.params));
    if (domain.dimension() != static_cast<Eigen::Index>(spec.params->size()))
        throw InputError("section domain dimension does not match its parameters");
    spec.domain = std::move(domain);
    return spec;
}

Eigen::VectorXd SectionSpec::at(const Eigen::VectorXd& lambda) const
{
    return eval_all(components, lambda);
}

SectionReport verify_section(const SympSystem& system, const SectionSpec& section, std::size_t n_samples,
                             double tol, std::uint64_t seed)
{
    check_section_shape(system, section);
    SectionReport report;
    report.tolerance = tol;
    report.seed = seed;
    const auto samples = sample_box(section.domain, n_samples, seed);
    report.samples = samples.size();
    for (const auto& lambda : samples) {
        const Eigen::VectorXd X = section.at(lambda);
        const Eigen::VectorXd F = eval_all(system.integrals, X);
        report.residual_plus = std::max(report.residual_plus, (F - lambda).norm());
        report.residual_minus = std::max(report.residual_minus, (F + lambda).norm());
        // (chi^* theta)_b = theta_a(chi) d chi^a / d Lambda_b
        const Eigen::VectorXd pullback = gradients(section.components, lambda).transpose() * theta_at(system.chart, X);
        report.horizontality = std::max(report.horizontality, pullback.norm());
    }
    if (report.residual_minus < tol && report.residual_minus <= report.residual_plus)
        report.sign = -1;
    else if (report.residual_plus < tol)
        report.sign = 1;
    report.pass = !samples.empty() && report.sign != 0 && report.horizontality < tol;
    return report;
}

std::optional<double> period_detect(const VectorField& field, const Eigen::VectorXd& x0, double t_max, double tol,
                                    IntegratorConfig config)
{
    if (!(t_max > 0.0) || !(tol > 0.0))
        throw InputError("period detection needs t_max > 0 and tol > 0");
    config.max_step = std::min(config.max_step, t_max / 2000.0);
    const Trajectory traj = integrate(field, x0, t_max, config);
    if (!traj.completed())
        throw ConvergenceError("period detection: integration stopped (" + to_string(traj.status) + ")");

    auto distance = [&](std::size_t k) { return (traj.points[k] - x0).norm(); };
    const double leave = std::max(100.0 * tol, 1e-8);
    std::size_t k = 1;
    while (k < traj.size() && distance(k) <= leave)
        ++k;

    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    for (++k; k < traj.size(); ++k) {
        const bool last = k + 1 == traj.size();
        if (!(distance(k) <= distance(k - 1) && (last || distance(k) <= distance(k + 1))))
            continue;
        // golden-section search for the distance minimum on [t_{k-1}, t_{k+1}]
        const double t_lo = traj.times[k - 1];
        const Eigen::VectorXd& from = traj.points[k - 1];
        auto dist_at = [&](double t) { return (flow_map(field, t - t_lo, from, config) - x0).norm(); };
        double a = t_lo, b = last ? traj.times[k] : traj.times[k + 1];
        double c = b - golden * (b - a), d = a + golden * (b - a);
        double fc = dist_at(c), fd = dist_at(d);
        while (b - a > 1e-13 * std::max(1.0, b)) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - golden * (b - a);
                fc = dist_at(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + golden * (b - a);
                fd = dist_at(d);
            }
        }
        const double t_star = 0.5 * (a + b);
        if (dist_at(t_star) < tol)
            return t_star;
    }
    return std::nullopt;
}

std::optional<double> period_detect(const ContactChart& chart, const Expression& f, const Eigen::VectorXd& x0,
                                    double t_max, double tol, IntegratorConfig config)
{
    return period_detect(contact_field(chart, f), x0, t_max, tol, config);
}

ActionAngleResult angle_solve(const SympSystem& system, const SectionSpec& section, const Eigen::VectorXd& X,
                              const AngleSolveOptions& options)
{
    check_section_shape(system, section);
    if (X.size() != system.chart.dimension())
        throw InputError("query point has dimension " + std::to_string(X.size()) + ", expected " +
                         std::to_string(system.chart.dimension()));
    if (!(X[system.chart.r_index()] > 0.0))
        throw DomainError("query point has r <= 0");

    const int n = system.n();
    ActionAngleResult out;
    out.M = lattice_or_identity(section, n);
    Eigen::FullPivLU<Eigen::MatrixXd> lattice_lu(out.M);
    if (!lattice_lu.isInvertible())
        throw InputError("lattice basis is singular");
    out.N = lattice_lu.inverse();

    const Eigen::VectorXd x = X.head(system.contact.chart.dimension());
    const Eigen::VectorXd Fs = eval_all(system.integrals, X);
    out.A = out.M * eval_all(system.contact.integrals, x);
    out.A_sigma = out.M * Fs;
    if (!(out.A.cwiseAbs().maxCoeff() > 0.0))
        throw DomainError("all action functions vanish at " + format_point(X));

    // base point on the orbit of X: chi(s F^Sigma(X)) with F^Sigma o chi = s id
    const double level_tol = 1e-8 * std::max(1.0, Fs.norm());
    double best = std::numeric_limits<double>::infinity();
    for (int s : {-1, 1}) {
        try {
            const Eigen::VectorXd base = section.at(s * Fs);
            if (!(base[system.chart.r_index()] > 0.0))
                continue;
            const double miss = (eval_all(system.integrals, base) - Fs).norm();
            if (miss < best) {
                best = miss;
                out.base_point = base;
                out.section_sign = s;
            }
        } catch (const DomainError&) {
        }
    }
    if (!(best < level_tol))
        throw InputError("section '" + section.name + "' does not reach the level of " + format_point(X));

    const std::vector<Expression> actions = combine(out.M, system.integrals);
    auto residual = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
        return group_action(system.chart, actions, y, out.base_point, options.integrator) - X;
    };

    out.y = options.initial_guess.size() ? options.initial_guess : Eigen::VectorXd::Zero(n + 1);
    Eigen::VectorXd G = residual(out.y);
    const double h = options.fd_step;
    for (; out.iterations < options.max_iterations && !(G.norm() < options.tol); ++out.iterations) {
        Eigen::MatrixXd J(X.size(), n + 1);
        for (int a = 0; a <= n; ++a) {
            Eigen::VectorXd yp = out.y, ym = out.y;
            yp[a] += h;
            ym[a] -= h;
            J.col(a) = (residual(yp) - residual(ym)) / (2.0 * h);
        }
        const Eigen::VectorXd step = J.colPivHouseholderQr().solve(-G);
        double scale = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= options.max_halvings && !accepted; ++halving, scale *= 0.5) {
            try {
                const Eigen::VectorXd yn = out.y + scale * step;
                Eigen::VectorXd Gn = residual(yn);
                if (Gn.norm() < G.norm()) {
                    out.y = yn;
                    G = std::move(Gn);
                    accepted = true;
                }
            } catch (const NumericalError&) {
            }
        }
        if (!accepted)
            break;
    }
    out.residual = G.norm();
    if (!(out.residual < options.tol))
        throw ConvergenceError("angle solve did not converge at " + format_point(X) + " (residual " +
                               std::to_string(out.residual) + ")");

    if (section.action_index) {
        if (*section.action_index < 0 || *section.action_index > n)
            throw InputError("action index out of range");
        out.action_index = *section.action_index;
    } else {
        Eigen::Index k = 0;
        out.A.cwiseAbs().maxCoeff(&k);
        out.action_index = static_cast<int>(k);
    }
    const double Ak = out.A[out.action_index];
    if (Ak == 0.0)
        throw DomainError("action A_" + std::to_string(out.action_index) + " vanishes at " + format_point(X));
    out.A_tilde.resize(n);
    for (int i = 0, j = 0; i <= n; ++i)
        if (i != out.action_index)
            out.A_tilde[j++] = -out.A[i] / Ak;
    return out;
}

AngleSolveOptions DarbouxOptions::tight_solve()
{
    AngleSolveOptions o;
    o.tol = 1e-11;
    o.integrator.rel_tol = 1e-13;
    o.integrator.abs_tol = 1e-15;
    return o;
}

namespace {

// Rows: d y^a as covectors over the first `dims` coordinates of X.
Eigen::MatrixXd angle_differentials(const SympSystem& system, const SectionSpec& section, const Eigen::VectorXd& X,
                                    const ActionAngleResult& at, Eigen::Index dims, const DarbouxOptions& options)
{
    AngleSolveOptions warm = options.solve;
    warm.initial_guess = at.y;
    const double h = options.fd_step;
    Eigen::MatrixXd dy(at.y.size(), dims);
    for (Eigen::Index c = 0; c < dims; ++c) {
        Eigen::VectorXd Xp = X, Xm = X;
        Xp[c] += h;
        Xm[c] -= h;
        dy.col(c) = (angle_solve(system, section, Xp, warm).y - angle_solve(system, section, Xm, warm).y) / (2.0 * h);
    }
    return dy;
}

} // namespace

DarbouxReport darboux_verify(const SympSystem& system, const SectionSpec& section,
                             const std::vector<Eigen::VectorXd>& points, const DarbouxOptions& options)
{
    DarbouxReport report;
    report.tolerance = options.tol;
    report.samples = points.size();
    const Eigen::Index d = system.contact.chart.dimension();
    for (const auto& x : points) {
        const Eigen::VectorXd X = symp_point(x, 1.0);
        const ActionAngleResult at = angle_solve(system, section, X, options.solve);
        SectionSpec fixed = section;
        fixed.action_index = at.action_index;
        const Eigen::MatrixXd dy = angle_differentials(system, fixed, X, at, d, options);

        const int k = at.action_index;
        Eigen::VectorXd form = dy.row(k).transpose();
        for (Eigen::Index i = 0, j = 0; i < dy.rows(); ++i)
            if (i != k)
                form -= at.A_tilde[j++] * dy.row(i).transpose();
        const Eigen::VectorXd expected = -eta_at(system.contact.chart, x) / at.A[k];
        const double res = (form - expected).cwiseAbs().maxCoeff();
        if (res > report.residual || report.worst_point.size() == 0) {
            report.residual = std::max(report.residual, res);
            report.worst_point = x;
        }
    }
    report.pass = !points.empty() && report.residual < options.tol;
    return report;
}

DarbouxReport darboux_verify_symplectic(const SympSystem& system, const SectionSpec& section,
                                        const std::vector<Eigen::VectorXd>& points, const DarbouxOptions& options)
{
    DarbouxReport report;
    report.tolerance = options.tol;
    report.samples = points.size();
    for (const auto& X : points) {
        const ActionAngleResult at = angle_solve(system, section, X, options.solve);
        const Eigen::MatrixXd dy = angle_differentials(system, section, X, at, X.size(), options);
        const Eigen::VectorXd form = dy.transpose() * at.A_sigma;
        const double res = (form - theta_at(system.chart, X)).cwiseAbs().maxCoeff();
        if (res > report.residual || report.worst_point.size() == 0) {
            report.residual = std::max(report.residual, res);
            report.worst_point = X;
        }
    }
    report.pass = !points.empty() && report.residual < options.tol;
    return report;
}

} // namespace contactlab
