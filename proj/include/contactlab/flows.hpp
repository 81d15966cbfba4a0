#pragma once

// Integration of contact and symplectic Hamiltonian flows.
//
// Integrators are general purpose (classical RK4 or embedded Runge-Kutta-Fehlberg
// 4(5) with local extrapolation); structure preservation is checked afterwards
// through residuals rather than built into the scheme.

#include "contactlab/contact.hpp"
#include "contactlab/symplectic.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace contactlab {

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

enum class Method
{
    RK4,
    RKF45,
};

struct IntegratorConfig
{
    Method method = Method::RKF45;
    double step = 1e-2; // RK4 step
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 1'000'000;

    void validate() const;
};

enum class FlowStatus
{
    Completed,
    DomainExit,
    MaxStepsExceeded,
    StepFailure,
};

std::string to_string(FlowStatus status);

struct Trajectory
{
    /// Strictly monotone in the direction of integration (decreasing for t < 0).
    std::vector<double> times;
    std::vector<Eigen::VectorXd> points;
    /// Scaled local error estimate of each accepted step; 0 for the initial point
    /// and for fixed-step integration.
    std::vector<double> local_error;
    FlowStatus status = FlowStatus::Completed;
    std::string message;

    bool completed() const { return status == FlowStatus::Completed; }
    const Eigen::VectorXd& back() const { return points.back(); }
    std::size_t size() const { return times.size(); }
};

VectorField contact_field(const ContactChart& chart, const Expression& f);
VectorField symplectic_field(const SympChart& symp, const Expression& F);

/// Integrates x' = field(x) from 0 to t_final. Leaving the open domain box, or
/// a DomainError from the field, ends the trajectory at the last valid point
/// with status DomainExit.
Trajectory integrate(const VectorField& field, const Eigen::VectorXd& x0, double t_final,
                     const IntegratorConfig& config = {}, const Box& domain = {});
Trajectory integrate(const ContactChart& chart, const Expression& f, const Eigen::VectorXd& x0, double t_final,
                     const IntegratorConfig& config = {}, const Box& domain = {});
Trajectory integrate(const SympChart& symp, const Expression& F, const Eigen::VectorXd& X0, double t_final,
                     const IntegratorConfig& config = {}, const Box& domain = {});

/// Endpoint of a completed integration. Throws DomainError on domain exit and
/// ConvergenceError on step failure or exhausted step budget.
Eigen::VectorXd flow_map(const VectorField& field, double t, const Eigen::VectorXd& x0,
                         const IntegratorConfig& config = {}, const Box& domain = {});
Eigen::VectorXd flow_map(const ContactChart& chart, const Expression& f, double t, const Eigen::VectorXd& x0,
                         const IntegratorConfig& config = {}, const Box& domain = {});
Eigen::VectorXd flow_map(const SympChart& symp, const Expression& F, double t, const Eigen::VectorXd& X0,
                         const IntegratorConfig& config = {}, const Box& domain = {});

/// phi^0_{t_0} o ... o phi^n_{t_n}(x0): the last field is applied first.
Eigen::VectorXd group_action(const std::vector<VectorField>& fields, const Eigen::VectorXd& t,
                             const Eigen::VectorXd& x0, const IntegratorConfig& config = {}, const Box& domain = {});
Eigen::VectorXd group_action(const ContactChart& chart, const std::vector<Expression>& integrals,
                             const Eigen::VectorXd& t, const Eigen::VectorXd& x0, const IntegratorConfig& config = {},
                             const Box& domain = {});
Eigen::VectorXd group_action(const SympChart& symp, const std::vector<Expression>& integrals,
                             const Eigen::VectorXd& t, const Eigen::VectorXd& X0, const IntegratorConfig& config = {},
                             const Box& domain = {});

/// max over samples of |d/dt f(c(t)) + R(h) f(c(t))| for a trajectory c of X_h,
/// with d/dt from a 7-point finite-difference stencil on the sample times.
double dissipation_residual(const ContactChart& chart, const Expression& h, const Expression& f,
                            const Trajectory& trajectory);

/// Weights w with sum_k w_k g(t_k) ~ g'(t0), exact for polynomials of degree < nodes.size().
std::vector<double> derivative_weights(double t0, const std::vector<double>& nodes);

/// CSV with header "t,<coords...>" and one row per accepted step.
void write_csv(std::ostream& out, const Trajectory& trajectory, const Coordinates& coords);

} // namespace contactlab
