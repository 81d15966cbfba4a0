#pragma once

// Symplectization M x R_+ of a contact chart with potential theta = r * eta.
// Points are (x, r) with the fiber coordinate appended last; r > 0 is the
// chart domain and every pointwise operation rejects r <= 0.

#include "contactlab/contact.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

namespace contactlab {

class SympChart
{
  public:
    explicit SympChart(ContactChart base, std::string fiber = "r");

    const ContactChart& base() const noexcept { return base_; }
    int n() const noexcept { return base_.n(); }
    Eigen::Index dimension() const noexcept { return base_.dimension() + 1; }
    Eigen::Index r_index() const noexcept { return base_.dimension(); }
    const Coordinates& coords() const noexcept { return *coords_; }
    const std::shared_ptr<const Coordinates>& coords_ptr() const noexcept { return coords_; }
    /// Coefficients r * eta_a followed by 0 for dr.
    const std::vector<Expression>& theta() const noexcept { return theta_; }

    Expression parse(std::string_view source) const;

  private:
    ContactChart base_;
    std::shared_ptr<const Coordinates> coords_;
    std::vector<Expression> theta_;
};

Eigen::VectorXd symp_point(const Eigen::VectorXd& x, double r);

/// f^Sigma = -r f, expressed over the symplectic coordinates.
Expression lift_function(const SympChart& symp, const Expression& f);

Eigen::VectorXd theta_at(const SympChart& symp, const Eigen::VectorXd& X);
/// omega = -d theta, omega_ab = omega(d_a, d_b).
Eigen::MatrixXd omega_at(const SympChart& symp, const Eigen::VectorXd& X);

/// Solves i_Delta omega = -theta.
Eigen::VectorXd liouville_field_at(const SympChart& symp, const Eigen::VectorXd& X);
/// Solves i_{X_F} omega = dF.
Eigen::VectorXd symp_hamiltonian_field_at(const SympChart& symp, const Expression& F, const Eigen::VectorXd& X);
/// {F, G} = X_F(G), the convention under which {f^Sigma, g^Sigma} = -r {f, g}.
double poisson_bracket_at(const SympChart& symp, const Expression& F, const Expression& G,
                          const Eigen::VectorXd& X);

/// Pushforward along (x, r) -> x: drops the r-component.
Eigen::VectorXd project_vector(const SympChart& symp, const Eigen::VectorXd& V);

/// |Delta(F) - k F| at X.
double homogeneity_residual(const SympChart& symp, const Expression& F, const Eigen::VectorXd& X, int k);

} // namespace contactlab
