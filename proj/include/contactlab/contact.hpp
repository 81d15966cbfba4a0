#pragma once

// Contact charts: a contact form given by coefficient expressions
// eta = sum_a eta_a dx^a over coordinates ordered (q^1..q^n, p_1..p_n, z).
//
// Everything here is evaluated pointwise. The flat map v -> i_v d(eta) + eta(v) eta
// has matrix B_ab = (d eta)_ab + eta_a eta_b, acting as (flat v)_b = v^a B_ab;
// its invertibility is the contact condition, so every solve doubles as a
// validity check.

#include "contactlab/expr.hpp"
#include "contactlab/sampling.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace contactlab {

/// |det| at or below this is treated as a violated contact condition.
inline constexpr double kSingularDeterminant = 1e-12;

class ContactChart
{
  public:
    /// Darboux chart eta = dz - p_i dq^i. Default names: q,p,z for n = 1,
    /// otherwise q1..qn, p1..pn, z.
    static ContactChart darboux(int n);
    static ContactChart darboux(int n, Coordinates names);

    /// General coframe. The Darboux flag is set when the coefficients are
    /// structurally -p_i, 0, 1.
    static ContactChart with_coframe(int n, Coordinates names, const std::vector<std::string>& eta);
    static ContactChart with_coframe(int n, std::shared_ptr<const Coordinates> names, std::vector<Expression> eta);

    int n() const noexcept { return n_; }
    Eigen::Index dimension() const noexcept { return 2 * n_ + 1; }
    const Coordinates& coords() const noexcept { return *coords_; }
    const std::shared_ptr<const Coordinates>& coords_ptr() const noexcept { return coords_; }
    const std::vector<Expression>& eta() const noexcept { return eta_; }
    bool is_darboux() const noexcept { return darboux_; }

    Eigen::Index q_index(int i) const { return i; }
    Eigen::Index p_index(int i) const { return n_ + i; }
    Eigen::Index z_index() const { return 2 * n_; }

    /// Parses an expression over this chart's coordinates.
    Expression parse(std::string_view source) const;

  private:
    ContactChart(int n, std::shared_ptr<const Coordinates> coords, std::vector<Expression> eta, bool darboux);

    int n_ = 0;
    std::shared_ptr<const Coordinates> coords_;
    std::vector<Expression> eta_;
    bool darboux_ = false;
};

/// Chart plus the integrals f_0..f_n and a sampling region.
struct ContactSystem
{
    ContactChart chart;
    std::vector<Expression> integrals;
    Box region;

    ContactSystem(ContactChart c, std::vector<Expression> fs, Box box);

    int n() const { return chart.n(); }
};

Eigen::VectorXd eta_at(const ContactChart& chart, const Eigen::VectorXd& x);
/// (d eta)_ab = d_a eta_b - d_b eta_a.
Eigen::MatrixXd deta_at(const ContactChart& chart, const Eigen::VectorXd& x);
Eigen::MatrixXd flat_matrix_at(const ContactChart& chart, const Eigen::VectorXd& x);
Eigen::VectorXd flat_at(const ContactChart& chart, const Eigen::VectorXd& x, const Eigen::VectorXd& v);

/// eta, d eta and a factorisation of the flat map at one point. Throws
/// SingularMatrixError when the contact condition fails there.
class ContactFrame
{
  public:
    ContactFrame(const ContactChart& chart, const Eigen::VectorXd& x);

    const Eigen::VectorXd& point() const { return x_; }
    const Eigen::VectorXd& eta() const { return eta_; }
    const Eigen::MatrixXd& deta() const { return deta_; }
    const Eigen::MatrixXd& flat_matrix() const { return B_; }
    const Eigen::VectorXd& reeb() const { return reeb_; }
    double determinant() const { return det_; }

    /// Solves flat(v) = alpha.
    Eigen::VectorXd sharp(const Eigen::VectorXd& alpha) const;

  private:
    Eigen::VectorXd x_;
    Eigen::VectorXd eta_;
    Eigen::MatrixXd deta_;
    Eigen::MatrixXd B_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_; // of B^T
    Eigen::VectorXd reeb_;
    double det_ = 0.0;
};

Eigen::VectorXd reeb_at(const ContactChart& chart, const Eigen::VectorXd& x);

enum class FieldPath
{
    Auto,    // closed form on Darboux charts, linear solve otherwise
    General, // always solve flat(X_f) = df - (R(f) + f) eta
};

Eigen::VectorXd hamiltonian_field_at(const ContactChart& chart, const Expression& f, const Eigen::VectorXd& x,
                                     FieldPath path = FieldPath::Auto);

/// d X_f^b / d x^a as a matrix (row b, column a). Exact from second-order
/// jets on Darboux charts; central differences (step 1e-5) otherwise.
Eigen::MatrixXd hamiltonian_field_jacobian_at(const ContactChart& chart, const Expression& f,
                                              const Eigen::VectorXd& x);

/// Lie bracket [X_f, X_g] at x.
Eigen::VectorXd lie_bracket_at(const ContactChart& chart, const Expression& f, const Expression& g,
                               const Eigen::VectorXd& x);

/// {f, g} = X_f(g) + g R(f).
double jacobi_bracket_at(const ContactChart& chart, const Expression& f, const Expression& g,
                         const Eigen::VectorXd& x, FieldPath path = FieldPath::Auto);
/// The second expression of the same bracket, -X_g(f) - f R(g).
double jacobi_bracket_alt_at(const ContactChart& chart, const Expression& f, const Expression& g,
                             const Eigen::VectorXd& x);

/// Lambda(df, dg) = -d eta(sharp df, sharp dg).
double lambda_pairing_at(const ContactChart& chart, const Expression& f, const Expression& g,
                         const Eigen::VectorXd& x);

/// Chart with coefficients a * eta_a. `a` is checked for zeros on `samples`
/// points drawn from `region`; a structurally constant 1 returns the chart unchanged.
ContactChart conformal_rescale(const ContactChart& chart, const Expression& a, const Box& region,
                               std::size_t samples = 64, std::uint64_t seed = 1);

struct ContactConditionReport
{
    double min_abs_det = 0.0;
    double tolerance = 1e-8;
    std::size_t samples = 0;
    bool pass = false;
};

ContactConditionReport contact_condition_check(const ContactChart& chart, const std::vector<Eigen::VectorXd>& samples,
                                               double tol = 1e-8);

} // namespace contactlab
