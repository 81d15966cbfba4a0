#include "contactlab/symplectic.hpp"

#include <algorithm>
#include <cmath>

namespace contactlab {

namespace {

void check_point(const SympChart& symp, const Eigen::VectorXd& X)
{
    if (X.size() != symp.dimension())
        throw InputError("point has dimension " + std::to_string(X.size()) + ", symplectization expects " +
                         std::to_string(symp.dimension()));
    if (!(X[symp.r_index()] > 0.0))
        throw DomainError("fiber coordinate " + symp.coords().back() + " must be positive, got " +
                          std::to_string(X[symp.r_index()]));
}

Eigen::PartialPivLU<Eigen::MatrixXd> omega_transpose_lu(const SympChart& symp, const Eigen::VectorXd& X)
{
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(omega_at(symp, X).transpose());
    if (!(std::abs(lu.determinant()) > kSingularDeterminant))
        throw SingularMatrixError("symplectic form is degenerate, |det omega| = " +
                                  std::to_string(std::abs(lu.determinant())));
    return lu;
}

} // namespace

SympChart::SympChart(ContactChart base, std::string fiber) : base_(std::move(base))
{
    const Coordinates& names = base_.coords();
    if (std::find(names.begin(), names.end(), fiber) != names.end())
        throw InputError("fiber coordinate '" + fiber + "' clashes with a contact coordinate");
    Coordinates all = names;
    all.push_back(std::move(fiber));
    coords_ = std::make_shared<const Coordinates>(std::move(all));

    const Expression r = Expression::variable(coords_->back(), coords_);
    for (const auto& e : base_.eta())
        theta_.push_back(r * e.rebind(coords_));
    theta_.push_back(Expression::constant(0.0, coords_));
}

Expression SympChart::parse(std::string_view source) const
{
    return contactlab::parse(source, coords_);
}

Eigen::VectorXd symp_point(const Eigen::VectorXd& x, double r)
{
    Eigen::VectorXd X(x.size() + 1);
    X << x, r;
    return X;
}

Expression lift_function(const SympChart& symp, const Expression& f)
{
    const Expression g = f.coords_ptr() == symp.coords_ptr() ? f : f.rebind(symp.coords_ptr());
    if (auto c = g.constant_value(); c && *c == 0.0)
        return g;
    return -(Expression::variable(symp.coords().back(), symp.coords_ptr()) * g);
}

Eigen::VectorXd theta_at(const SympChart& symp, const Eigen::VectorXd& X)
{
    check_point(symp, X);
    const Eigen::Index d = symp.base().dimension();
    Eigen::VectorXd theta(symp.dimension());
    theta << X[symp.r_index()] * eta_at(symp.base(), X.head(d)), 0.0;
    return theta;
}

Eigen::MatrixXd omega_at(const SympChart& symp, const Eigen::VectorXd& X)
{
    check_point(symp, X);
    // d theta = dr ^ eta + r d eta
    const Eigen::Index d = symp.base().dimension();
    const Eigen::VectorXd x = X.head(d);
    const Eigen::VectorXd eta = eta_at(symp.base(), x);
    Eigen::MatrixXd dtheta = Eigen::MatrixXd::Zero(d + 1, d + 1);
    dtheta.topLeftCorner(d, d) = X[symp.r_index()] * deta_at(symp.base(), x);
    dtheta.row(d).head(d) = eta.transpose();
    dtheta.col(d).head(d) = -eta;
    return -dtheta;
}

Eigen::VectorXd liouville_field_at(const SympChart& symp, const Eigen::VectorXd& X)
{
    return omega_transpose_lu(symp, X).solve(-theta_at(symp, X));
}

Eigen::VectorXd symp_hamiltonian_field_at(const SympChart& symp, const Expression& F, const Eigen::VectorXd& X)
{
    check_point(symp, X);
    return omega_transpose_lu(symp, X).solve(eval_jet1(F, X).gradient);
}

double poisson_bracket_at(const SympChart& symp, const Expression& F, const Expression& G,
                          const Eigen::VectorXd& X)
{
    return eval_jet1(G, X).gradient.dot(symp_hamiltonian_field_at(symp, F, X));
}

Eigen::VectorXd project_vector(const SympChart& symp, const Eigen::VectorXd& V)
{
    if (V.size() != symp.dimension())
        throw InputError("vector has dimension " + std::to_string(V.size()) + ", symplectization expects " +
                         std::to_string(symp.dimension()));
    return V.head(symp.base().dimension());
}

double homogeneity_residual(const SympChart& symp, const Expression& F, const Eigen::VectorXd& X, int k)
{
    const Jet1 jet = eval_jet1(F, X);
    return std::abs(jet.gradient.dot(liouville_field_at(symp, X)) - k * jet.value);
}

} // namespace contactlab
