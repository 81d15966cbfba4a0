#pragma once

// System configuration files, the command implementations behind the
// contactlab executable, and their JSON reports.

#include "contactlab/integrability.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace contactlab {

/// Schema violation; pointer() is the JSON pointer of the offending value.
class ConfigError : public InputError
{
  public:
    ConfigError(std::string pointer, const std::string& what)
        : InputError("config error at " + (pointer.empty() ? std::string("/") : pointer) + ": " + what),
          pointer_(std::move(pointer))
    {}
    const std::string& pointer() const noexcept { return pointer_; }

  private:
    std::string pointer_;
};

struct Tolerances
{
    double contact = 1e-8;     // minimum |det flat|
    double involution = 1e-10; // max |{f_a, f_b}|
    double rank = 1e-8;        // relative singular value cutoff
    double coisotropy = 1e-8;
    double correspondence = 1e-8;
    double section = 1e-10;
    double darboux = 1e-5;
};

struct SystemConfig
{
    explicit SystemConfig(ContactSystem s) : system(std::move(s)) {}

    std::string name;
    ContactSystem system;
    std::string fiber = "r";
    double fiber_min = 0.5;
    double fiber_max = 2.0;
    std::vector<SectionSpec> sections;
    IntegratorConfig integrator;
    AngleSolveOptions angle_solve;
    Tolerances tolerances;
    std::size_t samples = 100;
    std::optional<std::uint64_t> seed;
    /// FNV-1a 64 of the canonical (sorted-key) JSON text, as 16 hex digits.
    std::string digest;

    int n() const { return system.n(); }
    const SectionSpec& section(const std::string& name) const;
};

SystemConfig parse_config(const nlohmann::json& j);
SystemConfig load_config(const std::string& path);

std::string fnv1a_hex(const std::string& text);

/// Command-line seed, else CONTACTLAB_SEED, else the config seed, else 1.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const SystemConfig& config);

struct CheckResult
{
    std::string name;
    bool pass = false;
    double residual = 0.0;
    double tolerance = 0.0;
    std::string relation = "<"; // pass iff residual <relation> tolerance
    std::size_t samples = 0;
    nlohmann::json detail = nlohmann::json::object();
};

struct Report
{
    std::string command;
    std::string config_name;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;
    nlohmann::json results = nlohmann::json::object();

    bool pass() const;
    int exit_code() const { return pass() ? 0 : 1; }
    nlohmann::json to_json() const;
};

/// 2 for input and configuration errors, 3 for numerical failures.
int exit_code_for(const std::exception& e);

/// Contact condition, involution and rank on sampled points of the region.
Report cmd_check(const SystemConfig& config, std::uint64_t seed);

/// Projects sampled seeds onto the ray preimage of Lambda and runs the
/// coisotropy, tangency and dissipative-map checks there.
Report cmd_coisotropy(const SystemConfig& config, const Eigen::VectorXd& lambda, std::size_t n_points,
                      std::uint64_t seed);

/// Integrates X_{f_index} inside the region and writes the trajectory as CSV.
Report cmd_integrate(const SystemConfig& config, int index, const Eigen::VectorXd& x0, double t, std::ostream& csv);

using LiftFn = std::function<Expression(const SympChart&, const Expression&)>;

/// Correspondence residuals between the contact system and its lift.
Report cmd_symplectize_verify(const SystemConfig& config, std::size_t n_samples, std::uint64_t seed,
                              const LiftFn& lift = lift_function);

/// Verifies the section, then computes action-angle data at each point (contact
/// points are lifted with r = 1). Failures are recorded per point.
Report cmd_action_angle(const SystemConfig& config, const std::string& section,
                        const std::vector<Eigen::VectorXd>& points, std::uint64_t seed, bool darboux = false);

/// Accepts {"points": [[...], ...]} or a bare array of points.
std::vector<Eigen::VectorXd> parse_points(const nlohmann::json& j);
std::vector<Eigen::VectorXd> load_points(const std::string& path);

} // namespace contactlab
