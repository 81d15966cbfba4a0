#pragma once

// Integrability diagnostics for a system F = (f_0, ..., f_n) on a contact chart,
// and the numerical action-angle construction on its symplectization.

#include "contactlab/contact.hpp"
#include "contactlab/flows.hpp"
#include "contactlab/symplectic.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace contactlab {

/// Outcome of a residual check: pass iff residual < tolerance.
struct CheckReport
{
    double residual = 0.0;
    double tolerance = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    bool pass = false;
    /// Point attaining the residual, when there was one.
    Eigen::VectorXd worst_point;
};

struct RankReport
{
    int min_rank = 0;
    int required = 0;
    double tolerance = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    bool pass = false;
};

/// max |{f_a, f_b}| over sampled points and all pairs.
CheckReport involution_check(const ContactSystem& system, std::size_t n_samples, double tol, std::uint64_t seed);

/// Rank of the Jacobian of F: number of singular values above tol * sigma_max.
RankReport rank_check(const ContactSystem& system, std::size_t n_samples, double tol, std::uint64_t seed);

struct RayPoint
{
    Eigen::VectorXd x;
    double r = 0.0; // F(x) = r Lambda
    double residual = 0.0;
    int iterations = 0;
};

/// Minimal-norm Gauss-Newton on F(x) - r Lambda over (x, r). Throws
/// ConvergenceError without convergence and DomainError if r <= 0 or the
/// result leaves the system region.
RayPoint ray_project(const ContactSystem& system, const Eigen::VectorXd& lambda, const Eigen::VectorXd& seed,
                     double tol = 1e-10, int max_iterations = 100);

/// Distance of F(x) from the open ray through Lambda, relative to |F(x)|.
double ray_residual(const ContactSystem& system, const Eigen::VectorXd& lambda, const Eigen::VectorXd& x);

/// max over index triples of |f_a{f_b,f_c} + f_c{f_a,f_b} + f_b{f_c,f_a}| on points of
/// the ray preimage. Points farther than 1e-6 (relative) from the ray raise InputError.
CheckReport coisotropy_check(const ContactSystem& system, const Eigen::VectorXd& lambda,
                             const std::vector<Eigen::VectorXd>& points, double tol);

/// max over a, b, c of |f_a X_{f_c}(f_b) - f_b X_{f_c}(f_a)|.
CheckReport tangency_check(const ContactSystem& system, const Eigen::VectorXd& lambda,
                           const std::vector<Eigen::VectorXd>& points, double tol);

/// Coisotropy together with rank(TF) >= n at the same points.
CheckReport dissipative_map_check(const ContactSystem& system, const Eigen::VectorXd& lambda,
                                  const std::vector<Eigen::VectorXd>& points, double tol);

/// A contact system together with its symplectization and lifted integrals.
struct SympSystem
{
    ContactSystem contact;
    SympChart chart;
    std::vector<Expression> integrals; // f_a^Sigma = -r f_a

    explicit SympSystem(ContactSystem system, std::string fiber = "r");

    int n() const { return contact.n(); }
};

/// Horizontal section chi: Lambda -> M^Sigma given by expressions in the
/// parameters Lambda_0..Lambda_n.
struct SectionSpec
{
    std::string name;
    std::shared_ptr<const Coordinates> params;
    std::vector<Expression> components; // one per symplectic coordinate
    Box domain;                         // over the parameters
    /// Index playing the role of A_0; by default the largest |A_a| at the query point.
    std::optional<int> action_index;
    /// Basis change M with A^Sigma = M F^Sigma; identity when empty.
    Eigen::MatrixXd lattice;

    static SectionSpec parse(std::string name, Coordinates params, const std::vector<std::string>& components,
                             Box domain);

    Eigen::VectorXd at(const Eigen::VectorXd& lambda) const;
};

struct SectionReport
{
    double residual_plus = 0.0;  // max |F^Sigma(chi(Lambda)) - Lambda|
    double residual_minus = 0.0; // max |F^Sigma(chi(Lambda)) + Lambda|
    double horizontality = 0.0;  // max |chi^* theta|
    int sign = 0;                // +1 or -1 when that convention passes, else 0
    double tolerance = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    bool pass = false;
};

SectionReport verify_section(const SympSystem& system, const SectionSpec& section, std::size_t n_samples,
                             double tol, std::uint64_t seed);

/// Smallest t in (0, t_max] with |phi_t(x0) - x0| < tol, located at a sampled
/// distance minimum and refined by golden-section search.
std::optional<double> period_detect(const VectorField& field, const Eigen::VectorXd& x0, double t_max, double tol,
                                    IntegratorConfig config = {});
std::optional<double> period_detect(const ContactChart& chart, const Expression& f, const Eigen::VectorXd& x0,
                                    double t_max, double tol, IntegratorConfig config = {});

struct AngleSolveOptions
{
    double tol = 1e-8;
    int max_iterations = 50;
    int max_halvings = 20;
    double fd_step = 1e-6;
    IntegratorConfig integrator;
    /// Starting angles; zero when empty.
    Eigen::VectorXd initial_guess;
};

struct ActionAngleResult
{
    Eigen::VectorXd y;          // angles y^a (also the symplectic angles, which are r-independent)
    Eigen::VectorXd A;          // contact actions M f at the point
    Eigen::VectorXd A_sigma;    // symplectic actions M F^Sigma = -r A
    Eigen::VectorXd A_tilde;    // -A_i / A_k for i != k, in index order
    int action_index = 0;       // k
    Eigen::MatrixXd M;
    Eigen::MatrixXd N;          // inverse of M
    Eigen::VectorXd base_point; // chi applied to the point's level
    int section_sign = 0;
    double residual = 0.0;
    int iterations = 0;
};

/// Solves Phi(y; chi(s F^Sigma(X))) = X for the angles y by damped Gauss-Newton.
ActionAngleResult angle_solve(const SympSystem& system, const SectionSpec& section, const Eigen::VectorXd& X,
                              const AngleSolveOptions& options = {});

struct DarbouxReport
{
    double residual = 0.0;
    double tolerance = 0.0;
    std::size_t samples = 0;
    bool pass = false;
    Eigen::VectorXd worst_point;
};

struct DarbouxOptions
{
    double tol = 1e-5;
    double fd_step = 1e-5;
    AngleSolveOptions solve = tight_solve();

    /// Angle solves accurate enough for differencing with fd_step.
    static AngleSolveOptions tight_solve();
};

/// Compares dy^k - sum_{i != k} A~_i dy^i, differenced numerically, with
/// -eta / A_k at contact points x (lifted with r = 1).
DarbouxReport darboux_verify(const SympSystem& system, const SectionSpec& section,
                             const std::vector<Eigen::VectorXd>& points, const DarbouxOptions& options = {});

/// Compares A^Sigma_a dy^a with theta at symplectic points.
DarbouxReport darboux_verify_symplectic(const SympSystem& system, const SectionSpec& section,
                                        const std::vector<Eigen::VectorXd>& points,
                                        const DarbouxOptions& options = {});

} // namespace contactlab
