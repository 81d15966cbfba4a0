#include "contactlab/contact.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace contactlab {

namespace {

Coordinates default_names(int n)
{
    Coordinates names;
    if (n == 1)
        return {"q", "p", "z"};
    for (int i = 1; i <= n; ++i)
        names.push_back("q" + std::to_string(i));
    for (int i = 1; i <= n; ++i)
        names.push_back("p" + std::to_string(i));
    names.push_back("z");
    return names;
}

bool is_constant(const Expression& e, double c)
{
    auto v = e.constant_value();
    return v && *v == c;
}

bool is_negated_variable(const Expression& e, Eigen::Index index)
{
    const ExprNode& r = e.root();
    return r.op == Op::Neg && r.lhs->op == Op::Variable && r.lhs->index == index;
}

void check_point(const ContactChart& chart, const Eigen::VectorXd& x)
{
    if (x.size() != chart.dimension())
        throw InputError("point has dimension " + std::to_string(x.size()) + ", chart expects " +
                         std::to_string(chart.dimension()));
}

Eigen::VectorXd darboux_eta(const ContactChart& chart, const Eigen::VectorXd& x)
{
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(chart.dimension());
    for (int i = 0; i < chart.n(); ++i)
        eta[chart.q_index(i)] = -x[chart.p_index(i)];
    eta[chart.z_index()] = 1.0;
    return eta;
}

Eigen::MatrixXd darboux_deta(const ContactChart& chart)
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(chart.dimension(), chart.dimension());
    for (int i = 0; i < chart.n(); ++i) {
        d(chart.q_index(i), chart.p_index(i)) = 1.0;
        d(chart.p_index(i), chart.q_index(i)) = -1.0;
    }
    return d;
}

Eigen::VectorXd darboux_field(const ContactChart& chart, const Jet1& f, const Eigen::VectorXd& x)
{
    const Eigen::VectorXd& g = f.gradient;
    const double fz = g[chart.z_index()];
    Eigen::VectorXd X(chart.dimension());
    double pdp = 0.0;
    for (int i = 0; i < chart.n(); ++i) {
        const auto qi = chart.q_index(i);
        const auto pi = chart.p_index(i);
        X[qi] = g[pi];
        X[pi] = -(g[qi] + x[pi] * fz);
        pdp += x[pi] * g[pi];
    }
    X[chart.z_index()] = pdp - f.value;
    return X;
}

} // namespace

ContactChart::ContactChart(int n, std::shared_ptr<const Coordinates> coords, std::vector<Expression> eta, bool darboux)
    : n_(n), coords_(std::move(coords)), eta_(std::move(eta)), darboux_(darboux)
{}

ContactChart ContactChart::darboux(int n)
{
    return darboux(n, default_names(n));
}

ContactChart ContactChart::darboux(int n, Coordinates names)
{
    if (n < 0)
        throw InputError("contact dimension n must be non-negative");
    if (names.size() != static_cast<std::size_t>(2 * n + 1))
        throw InputError("expected " + std::to_string(2 * n + 1) + " coordinate names");
    auto coords = std::make_shared<const Coordinates>(std::move(names));
    std::vector<Expression> eta;
    for (int i = 0; i < n; ++i)
        eta.push_back(-Expression::variable((*coords)[static_cast<std::size_t>(n + i)], coords));
    for (int i = 0; i < n; ++i)
        eta.push_back(Expression::constant(0.0, coords));
    eta.push_back(Expression::constant(1.0, coords));
    return with_coframe(n, coords, std::move(eta));
}

ContactChart ContactChart::with_coframe(int n, Coordinates names, const std::vector<std::string>& eta)
{
    auto coords = std::make_shared<const Coordinates>(std::move(names));
    std::vector<Expression> parsed;
    for (const auto& s : eta)
        parsed.push_back(contactlab::parse(s, coords));
    return with_coframe(n, coords, std::move(parsed));
}

ContactChart ContactChart::with_coframe(int n, std::shared_ptr<const Coordinates> names, std::vector<Expression> eta)
{
    if (n < 0)
        throw InputError("contact dimension n must be non-negative");
    const auto dim = static_cast<std::size_t>(2 * n + 1);
    if (names->size() != dim)
        throw InputError("expected " + std::to_string(dim) + " coordinate names, got " +
                         std::to_string(names->size()));
    std::set<std::string> unique(names->begin(), names->end());
    if (unique.size() != dim)
        throw InputError("coordinate names must be distinct");
    if (eta.size() != dim)
        throw InputError("expected " + std::to_string(dim) + " contact form coefficients, got " +
                         std::to_string(eta.size()));
    for (auto& e : eta)
        if (e.coords_ptr() != names)
            e = e.rebind(names);

    bool darboux = true;
    for (int i = 0; i < n && darboux; ++i) {
        darboux = is_negated_variable(eta[static_cast<std::size_t>(i)], n + i) &&
                  is_constant(eta[static_cast<std::size_t>(n + i)], 0.0);
    }
    darboux = darboux && is_constant(eta.back(), 1.0);
    return ContactChart(n, std::move(names), std::move(eta), darboux);
}

Expression ContactChart::parse(std::string_view source) const
{
    return contactlab::parse(source, coords_);
}

ContactSystem::ContactSystem(ContactChart c, std::vector<Expression> fs, Box box)
    : chart(std::move(c)), integrals(std::move(fs)), region(std::move(box))
{
    const auto expected = static_cast<std::size_t>(chart.n() + 1);
    if (integrals.size() != expected)
        throw InputError("expected " + std::to_string(expected) + " integrals, got " +
                         std::to_string(integrals.size()));
    for (auto& f : integrals)
        if (f.coords_ptr() != chart.coords_ptr())
            f = f.rebind(chart.coords_ptr());
    if (region.dimension() != chart.dimension())
        throw InputError("region dimension does not match the chart");
}

Eigen::VectorXd eta_at(const ContactChart& chart, const Eigen::VectorXd& x)
{
    check_point(chart, x);
    if (chart.is_darboux())
        return darboux_eta(chart, x);
    Eigen::VectorXd eta(chart.dimension());
    for (Eigen::Index a = 0; a < chart.dimension(); ++a)
        eta[a] = eval(chart.eta()[static_cast<std::size_t>(a)], x);
    return eta;
}

Eigen::MatrixXd deta_at(const ContactChart& chart, const Eigen::VectorXd& x)
{
    check_point(chart, x);
    if (chart.is_darboux())
        return darboux_deta(chart);
    // J(a, b) = d_b eta_a
    const Eigen::Index dim = chart.dimension();
    Eigen::MatrixXd J(dim, dim);
    for (Eigen::Index a = 0; a < dim; ++a)
        J.row(a) = eval_jet1(chart.eta()[static_cast<std::size_t>(a)], x).gradient.transpose();
    return J.transpose() - J;
}

Eigen::MatrixXd flat_matrix_at(const ContactChart& chart, const Eigen::VectorXd& x)
{
    Eigen::VectorXd eta = eta_at(chart, x);
    return deta_at(chart, x) + eta * eta.transpose();
}

Eigen::VectorXd flat_at(const ContactChart& chart, const Eigen::VectorXd& x, const Eigen::VectorXd& v)
{
    return flat_matrix_at(chart, x).transpose() * v;
}

ContactFrame::ContactFrame(const ContactChart& chart, const Eigen::VectorXd& x)
    : x_(x), eta_(eta_at(chart, x)), deta_(deta_at(chart, x))
{
    B_ = deta_ + eta_ * eta_.transpose();
    lu_.compute(B_.transpose());
    det_ = lu_.determinant();
    if (!(std::abs(det_) > kSingularDeterminant))
        throw SingularMatrixError("flat map is singular (contact condition violated), |det B| = " +
                                  std::to_string(std::abs(det_)));
    if (chart.is_darboux()) {
        reeb_ = Eigen::VectorXd::Zero(chart.dimension());
        reeb_[chart.z_index()] = 1.0;
    } else {
        reeb_ = lu_.solve(eta_);
    }
}

Eigen::VectorXd ContactFrame::sharp(const Eigen::VectorXd& alpha) const
{
    return lu_.solve(alpha);
}

Eigen::VectorXd reeb_at(const ContactChart& chart, const Eigen::VectorXd& x)
{
    return ContactFrame(chart, x).reeb();
}

Eigen::VectorXd hamiltonian_field_at(const ContactChart& chart, const Expression& f, const Eigen::VectorXd& x,
                                     FieldPath path)
{
    check_point(chart, x);
    Jet1 jf = eval_jet1(f, x);
    if (path == FieldPath::Auto && chart.is_darboux())
        return darboux_field(chart, jf, x);
    ContactFrame frame(chart, x);
    const double Rf = jf.gradient.dot(frame.reeb());
    return frame.sharp(jf.gradient - (Rf + jf.value) * frame.eta());
}

Eigen::MatrixXd hamiltonian_field_jacobian_at(const ContactChart& chart, const Expression& f,
                                              const Eigen::VectorXd& x)
{
    check_point(chart, x);
    const Eigen::Index dim = chart.dimension();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
    if (chart.is_darboux()) {
        const Jet2 jf = eval_jet2(f, x);
        const Eigen::VectorXd& g = jf.gradient;
        const Eigen::MatrixXd& H = jf.hessian;
        const auto z = chart.z_index();
        for (int i = 0; i < chart.n(); ++i) {
            const auto qi = chart.q_index(i);
            const auto pi = chart.p_index(i);
            J.row(qi) = H.row(pi);
            J.row(pi) = -(H.row(qi) + x[pi] * H.row(z));
            J(pi, pi) -= g[z];
            J.row(z) += x[pi] * H.row(pi);
            J(z, pi) += g[pi];
        }
        J.row(z) -= g.transpose();
        return J;
    }
    const double h = 1e-5;
    for (Eigen::Index a = 0; a < dim; ++a) {
        Eigen::VectorXd xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        J.col(a) = (hamiltonian_field_at(chart, f, xp) - hamiltonian_field_at(chart, f, xm)) / (2.0 * h);
    }
    return J;
}

Eigen::VectorXd lie_bracket_at(const ContactChart& chart, const Expression& f, const Expression& g,
                               const Eigen::VectorXd& x)
{
    const Eigen::VectorXd Xf = hamiltonian_field_at(chart, f, x);
    const Eigen::VectorXd Xg = hamiltonian_field_at(chart, g, x);
    return hamiltonian_field_jacobian_at(chart, g, x) * Xf - hamiltonian_field_jacobian_at(chart, f, x) * Xg;
}

double jacobi_bracket_at(const ContactChart& chart, const Expression& f, const Expression& g,
                         const Eigen::VectorXd& x, FieldPath path)
{
    const Eigen::VectorXd Xf = hamiltonian_field_at(chart, f, x, path);
    const Eigen::VectorXd R = (path == FieldPath::Auto && chart.is_darboux()) ? reeb_at(chart, x)
                                                                                : ContactFrame(chart, x).reeb();
    const Jet1 jf = eval_jet1(f, x);
    const Jet1 jg = eval_jet1(g, x);
    return jg.gradient.dot(Xf) + jg.value * jf.gradient.dot(R);
}

double jacobi_bracket_alt_at(const ContactChart& chart, const Expression& f, const Expression& g,
                             const Eigen::VectorXd& x)
{
    const Eigen::VectorXd Xg = hamiltonian_field_at(chart, g, x);
    const Eigen::VectorXd R = reeb_at(chart, x);
    const Jet1 jf = eval_jet1(f, x);
    const Jet1 jg = eval_jet1(g, x);
    return -jf.gradient.dot(Xg) - jf.value * jg.gradient.dot(R);
}

double lambda_pairing_at(const ContactChart& chart, const Expression& f, const Expression& g,
                         const Eigen::VectorXd& x)
{
    check_point(chart, x);
    ContactFrame frame(chart, x);
    const Eigen::VectorXd u = frame.sharp(eval_jet1(f, x).gradient);
    const Eigen::VectorXd w = frame.sharp(eval_jet1(g, x).gradient);
    return -u.dot(frame.deta() * w);
}

ContactChart conformal_rescale(const ContactChart& chart, const Expression& a, const Box& region,
                               std::size_t samples, std::uint64_t seed)
{
    const Expression factor = a.coords_ptr() == chart.coords_ptr() ? a : a.rebind(chart.coords_ptr());
    if (is_constant(factor, 1.0))
        return chart;
    if (auto c = factor.constant_value(); c && *c == 0.0)
        throw DomainError("conformal factor is identically zero");
    if (region.dimension() != chart.dimension())
        throw InputError("region dimension does not match the chart");
    // a sign change between two samples implies a zero in between on a box
    double first = 0.0;
    for (const auto& x : sample_box(region, samples, seed)) {
        const double v = eval(factor, x);
        if (v == 0.0 || !std::isfinite(v))
            throw DomainError("conformal factor " + factor.str() + " vanishes on the region");
        if (first == 0.0)
            first = v;
        else if (v * first < 0.0)
            throw DomainError("conformal factor " + factor.str() + " changes sign on the region");
    }

    std::vector<Expression> eta;
    eta.reserve(chart.eta().size());
    for (const auto& e : chart.eta())
        eta.push_back(factor * e);
    return ContactChart::with_coframe(chart.n(), chart.coords_ptr(), std::move(eta));
}

ContactConditionReport contact_condition_check(const ContactChart& chart, const std::vector<Eigen::VectorXd>& samples,
                                               double tol)
{
    ContactConditionReport report;
    report.tolerance = tol;
    report.samples = samples.size();
    report.min_abs_det = samples.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (const auto& x : samples) {
        const double det = flat_matrix_at(chart, x).determinant();
        report.min_abs_det = std::min(report.min_abs_det, std::abs(det));
    }
    report.pass = !samples.empty() && report.min_abs_det > tol;
    return report;
}

} // namespace contactlab
