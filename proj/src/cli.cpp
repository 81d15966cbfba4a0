#include "contactlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#ifndef CONTACTLAB_VERSION
#define CONTACTLAB_VERSION "unknown"
#endif

namespace contactlab {

namespace {

using json = nlohmann::json;

std::string join(const std::string& ptr, const std::string& key)
{
    return ptr + "/" + key;
}

std::string join(const std::string& ptr, std::size_t i)
{
    return ptr + "/" + std::to_string(i);
}

void expect_object(const json& v, const std::string& ptr, const std::set<std::string>& allowed)
{
    if (!v.is_object())
        throw ConfigError(ptr, "expected an object");
    for (const auto& [key, value] : v.items())
        if (!allowed.contains(key))
            throw ConfigError(join(ptr, key), "unknown property");
}

const json& required(const json& obj, const std::string& ptr, const std::string& key)
{
    if (!obj.contains(key))
        throw ConfigError(join(ptr, key), "missing required property");
    return obj.at(key);
}

std::string as_string(const json& v, const std::string& ptr)
{
    if (!v.is_string())
        throw ConfigError(ptr, "expected a string");
    return v.get<std::string>();
}

double as_number(const json& v, const std::string& ptr)
{
    if (!v.is_number())
        throw ConfigError(ptr, "expected a number");
    return v.get<double>();
}

double as_positive(const json& v, const std::string& ptr)
{
    const double x = as_number(v, ptr);
    if (!(x > 0.0))
        throw ConfigError(ptr, "expected a positive number");
    return x;
}

std::int64_t as_integer(const json& v, const std::string& ptr, std::int64_t min)
{
    if (!v.is_number_integer())
        throw ConfigError(ptr, "expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > std::numeric_limits<std::int64_t>::max())
        throw ConfigError(ptr, "integer out of range");
    const auto x = v.get<std::int64_t>();
    if (x < min)
        throw ConfigError(ptr, "expected an integer >= " + std::to_string(min));
    return x;
}

const json& as_array(const json& v, const std::string& ptr, std::size_t expected)
{
    if (!v.is_array())
        throw ConfigError(ptr, "expected an array");
    if (v.size() != expected)
        throw ConfigError(ptr, "expected " + std::to_string(expected) + " entries, found " + std::to_string(v.size()));
    return v;
}

std::vector<std::string> string_array(const json& v, const std::string& ptr, std::size_t expected)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < as_array(v, ptr, expected).size(); ++i)
        out.push_back(as_string(v[i], join(ptr, i)));
    return out;
}

Eigen::VectorXd number_array(const json& v, const std::string& ptr, std::size_t expected)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(expected));
    for (std::size_t i = 0; i < as_array(v, ptr, expected).size(); ++i)
        out[static_cast<Eigen::Index>(i)] = as_number(v[i], join(ptr, i));
    return out;
}

Box parse_box(const json& v, const std::string& ptr, std::size_t dim)
{
    expect_object(v, ptr, {"min", "max"});
    const Eigen::VectorXd lo = number_array(required(v, ptr, "min"), join(ptr, "min"), dim);
    const Eigen::VectorXd hi = number_array(required(v, ptr, "max"), join(ptr, "max"), dim);
    for (std::size_t i = 0; i < dim; ++i)
        if (lo[static_cast<Eigen::Index>(i)] > hi[static_cast<Eigen::Index>(i)])
            throw ConfigError(join(join(ptr, "min"), i), "lower bound exceeds upper bound");
    return Box(lo, hi);
}

Expression parse_expr(const json& v, const std::string& ptr, const std::shared_ptr<const Coordinates>& coords)
{
    const std::string source = as_string(v, ptr);
    try {
        return parse(source, coords);
    } catch (const InputError& e) {
        throw ConfigError(ptr, e.what());
    }
}

std::vector<Expression> expr_array(const json& v, const std::string& ptr, std::size_t expected,
                                   const std::shared_ptr<const Coordinates>& coords)
{
    std::vector<Expression> out;
    for (std::size_t i = 0; i < as_array(v, ptr, expected).size(); ++i)
        out.push_back(parse_expr(v[i], join(ptr, i), coords));
    return out;
}

IntegratorConfig parse_integrator(const json& v, const std::string& ptr)
{
    expect_object(v, ptr, {"method", "step", "rel_tol", "abs_tol", "max_step", "max_steps"});
    IntegratorConfig cfg;
    if (v.contains("method")) {
        const std::string m = as_string(v["method"], join(ptr, "method"));
        if (m == "rk4")
            cfg.method = Method::RK4;
        else if (m == "rkf45")
            cfg.method = Method::RKF45;
        else
            throw ConfigError(join(ptr, "method"), "expected \"rk4\" or \"rkf45\"");
    }
    if (v.contains("step"))
        cfg.step = as_positive(v["step"], join(ptr, "step"));
    if (v.contains("rel_tol"))
        cfg.rel_tol = as_positive(v["rel_tol"], join(ptr, "rel_tol"));
    if (v.contains("abs_tol"))
        cfg.abs_tol = as_positive(v["abs_tol"], join(ptr, "abs_tol"));
    if (v.contains("max_step"))
        cfg.max_step = as_positive(v["max_step"], join(ptr, "max_step"));
    if (v.contains("max_steps"))
        cfg.max_steps = static_cast<std::size_t>(as_integer(v["max_steps"], join(ptr, "max_steps"), 1));
    return cfg;
}

AngleSolveOptions parse_angle_solve(const json& v, const std::string& ptr, const IntegratorConfig& integrator)
{
    expect_object(v, ptr, {"tol", "max_iterations", "max_halvings", "fd_step"});
    AngleSolveOptions opts;
    opts.integrator = integrator;
    if (v.contains("tol"))
        opts.tol = as_positive(v["tol"], join(ptr, "tol"));
    if (v.contains("max_iterations"))
        opts.max_iterations = static_cast<int>(as_integer(v["max_iterations"], join(ptr, "max_iterations"), 1));
    if (v.contains("max_halvings"))
        opts.max_halvings = static_cast<int>(as_integer(v["max_halvings"], join(ptr, "max_halvings"), 0));
    if (v.contains("fd_step"))
        opts.fd_step = as_positive(v["fd_step"], join(ptr, "fd_step"));
    return opts;
}

Tolerances parse_tolerances(const json& v, const std::string& ptr)
{
    Tolerances t;
    const std::vector<std::pair<const char*, double*>> fields{
        {"contact", &t.contact},       {"involution", &t.involution},
        {"rank", &t.rank},             {"coisotropy", &t.coisotropy},
        {"correspondence", &t.correspondence}, {"section", &t.section},
        {"darboux", &t.darboux}};
    std::set<std::string> names;
    for (const auto& [name, slot] : fields)
        names.insert(name);
    expect_object(v, ptr, names);
    for (const auto& [name, slot] : fields)
        if (v.contains(name))
            *slot = as_positive(v[name], join(ptr, name));
    return t;
}

SectionSpec parse_section(const json& v, const std::string& ptr, int n)
{
    expect_object(v, ptr, {"name", "parameters", "components", "domain", "action_index", "lattice"});
    const auto m = static_cast<std::size_t>(n + 1);
    SectionSpec spec;
    spec.name = as_string(required(v, ptr, "name"), join(ptr, "name"));
    Coordinates params;
    if (v.contains("parameters")) {
        params = string_array(v["parameters"], join(ptr, "parameters"), m);
        if (std::set<std::string>(params.begin(), params.end()).size() != params.size())
            throw ConfigError(join(ptr, "parameters"), "parameter names must be distinct");
    } else {
        for (std::size_t a = 0; a < m; ++a)
            params.push_back("L" + std::to_string(a));
    }
    spec.params = std::make_shared<const Coordinates>(std::move(params));
    spec.components = expr_array(required(v, ptr, "components"), join(ptr, "components"), 2 * m, spec.params);
    spec.domain = parse_box(required(v, ptr, "domain"), join(ptr, "domain"), m);
    if (v.contains("action_index")) {
        const auto k = as_integer(v["action_index"], join(ptr, "action_index"), 0);
        if (k > n)
            throw ConfigError(join(ptr, "action_index"), "expected an index <= " + std::to_string(n));
        spec.action_index = static_cast<int>(k);
    }
    if (v.contains("lattice")) {
        const std::string lp = join(ptr, "lattice");
        spec.lattice.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < as_array(v["lattice"], lp, m).size(); ++i)
            spec.lattice.row(static_cast<Eigen::Index>(i)) = number_array(v["lattice"][i], join(lp, i), m);
        if (!(std::abs(spec.lattice.determinant()) > 1e-12))
            throw ConfigError(lp, "lattice basis must be invertible");
    }
    return spec;
}

json to_json(const Eigen::VectorXd& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

json to_json(const Eigen::MatrixXd& m)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        out.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
    return out;
}

std::string error_kind(const Error& e)
{
    if (dynamic_cast<const ConvergenceError*>(&e))
        return "convergence";
    if (dynamic_cast<const SingularMatrixError*>(&e))
        return "singular";
    if (dynamic_cast<const DomainError*>(&e))
        return "domain";
    if (dynamic_cast<const InputError*>(&e))
        return "input";
    return "numerical";
}

Report make_report(const SystemConfig& config, std::string command, std::uint64_t seed)
{
    Report r;
    r.command = std::move(command);
    r.config_name = config.name;
    r.config_digest = config.digest;
    r.seed = seed;
    return r;
}

CheckResult below(std::string name, double residual, double tol, std::size_t samples)
{
    CheckResult c;
    c.name = std::move(name);
    c.residual = residual;
    c.tolerance = tol;
    c.samples = samples;
    c.pass = residual < tol;
    return c;
}

CheckResult from(std::string name, const CheckReport& r)
{
    CheckResult c = below(std::move(name), r.residual, r.tolerance, r.samples);
    c.pass = r.pass;
    if (r.worst_point.size() > 0)
        c.detail["worst_point"] = to_json(r.worst_point);
    return c;
}

json read_json_file(const std::string& path, const std::string& what)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read " + what + " " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(what + " " + path + ": " + e.what());
    }
}

} // namespace

const SectionSpec& SystemConfig::section(const std::string& wanted) const
{
    for (const auto& s : sections)
        if (s.name == wanted)
            return s;
    std::string known;
    for (const auto& s : sections)
        known += (known.empty() ? "" : ", ") + s.name;
    throw InputError("unknown section '" + wanted + "'" + (known.empty() ? "" : " (available: " + known + ")"));
}

std::string fnv1a_hex(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

SystemConfig parse_config(const json& j)
{
    expect_object(j, "",
                  {"name", "n", "coordinates", "eta", "integrals", "region", "fiber", "fiber_range", "sections",
                   "integrator", "angle_solve", "tolerances", "samples", "seed"});
    const std::string name = as_string(required(j, "", "name"), "/name");
    const int n = static_cast<int>(as_integer(required(j, "", "n"), "/n", 0));
    const auto dim = static_cast<std::size_t>(2 * n + 1);

    Coordinates names = ContactChart::darboux(n).coords();
    if (j.contains("coordinates"))
        names = string_array(j["coordinates"], "/coordinates", dim);
    if (std::set<std::string>(names.begin(), names.end()).size() != names.size())
        throw ConfigError("/coordinates", "coordinate names must be distinct");
    auto coords = std::make_shared<const Coordinates>(names);

    std::optional<ContactChart> chart;
    try {
        if (j.contains("eta"))
            chart = ContactChart::with_coframe(n, coords, expr_array(j["eta"], "/eta", dim, coords));
        else
            chart = ContactChart::darboux(n, names);
    } catch (const ConfigError&) {
        throw;
    } catch (const InputError& e) {
        throw ConfigError("/coordinates", e.what());
    }

    std::vector<Expression> integrals =
        expr_array(required(j, "", "integrals"), "/integrals", static_cast<std::size_t>(n + 1), chart->coords_ptr());
    Box region = parse_box(required(j, "", "region"), "/region", dim);

    SystemConfig config(ContactSystem(*chart, std::move(integrals), std::move(region)));
    config.name = name;
    if (j.contains("fiber")) {
        config.fiber = as_string(j["fiber"], "/fiber");
        if (std::find(names.begin(), names.end(), config.fiber) != names.end())
            throw ConfigError("/fiber", "fiber coordinate clashes with a contact coordinate");
    }
    if (j.contains("fiber_range")) {
        const Eigen::VectorXd range = number_array(j["fiber_range"], "/fiber_range", 2);
        if (!(range[0] > 0.0) || range[0] > range[1])
            throw ConfigError("/fiber_range", "expected 0 < min <= max");
        config.fiber_min = range[0];
        config.fiber_max = range[1];
    }
    if (j.contains("integrator")) {
        config.integrator = parse_integrator(j["integrator"], "/integrator");
        try {
            config.integrator.validate();
        } catch (const InputError& e) {
            throw ConfigError("/integrator", e.what());
        }
    }
    config.angle_solve.integrator = config.integrator;
    if (j.contains("angle_solve"))
        config.angle_solve = parse_angle_solve(j["angle_solve"], "/angle_solve", config.integrator);
    if (j.contains("tolerances"))
        config.tolerances = parse_tolerances(j["tolerances"], "/tolerances");
    if (j.contains("samples"))
        config.samples = static_cast<std::size_t>(as_integer(j["samples"], "/samples", 1));
    if (j.contains("seed"))
        config.seed = static_cast<std::uint64_t>(as_integer(j["seed"], "/seed", 0));
    if (j.contains("sections")) {
        const json& secs = j["sections"];
        if (!secs.is_array())
            throw ConfigError("/sections", "expected an array");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < secs.size(); ++i) {
            SectionSpec s = parse_section(secs[i], join("/sections", i), n);
            if (!seen.insert(s.name).second)
                throw ConfigError(join(join("/sections", i), "name"), "duplicate section name");
            config.sections.push_back(std::move(s));
        }
    }
    config.digest = fnv1a_hex(j.dump());
    return config;
}

SystemConfig load_config(const std::string& path)
{
    return parse_config(read_json_file(path, "config file"));
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const SystemConfig& config)
{
    if (flag)
        return *flag;
    if (const char* env = std::getenv("CONTACTLAB_SEED"); env && *env) {
        const std::string text(env);
        std::size_t used = 0;
        std::uint64_t value = 0;
        try {
            value = std::stoull(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != text.size() || text.front() == '-')
            throw InputError("CONTACTLAB_SEED must be a non-negative integer, got '" + text + "'");
        return value;
    }
    return config.seed.value_or(1);
}

bool Report::pass() const
{
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

json Report::to_json() const
{
    json out;
    out["tool"] = "contactlab";
    out["version"] = CONTACTLAB_VERSION;
    out["command"] = command;
    out["config"] = {{"name", config_name}, {"digest", config_digest}};
    out["seed"] = seed;
    out["pass"] = pass();
    out["checks"] = json::array();
    for (const auto& c : checks) {
        json entry{{"name", c.name},         {"pass", c.pass},         {"residual", c.residual},
                   {"tolerance", c.tolerance}, {"relation", c.relation}, {"samples", c.samples}};
        if (!c.detail.empty())
            entry["detail"] = c.detail;
        out["checks"].push_back(std::move(entry));
    }
    if (!results.empty())
        out["results"] = results;
    return out;
}

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const json::exception*>(&e))
        return 2;
    return 3;
}

Report cmd_check(const SystemConfig& config, std::uint64_t seed)
{
    Report report = make_report(config, "check", seed);
    const ContactSystem& sys = config.system;
    const auto samples = sample_box(sys.region, config.samples, seed);

    const ContactConditionReport cc = contact_condition_check(sys.chart, samples, config.tolerances.contact);
    CheckResult contact = below("contact_condition", cc.min_abs_det, cc.tolerance, cc.samples);
    contact.relation = ">";
    contact.pass = cc.pass;
    report.checks.push_back(contact);
    if (!cc.pass) {
        report.results["skipped"] = json::array({"involution", "rank"});
        return report;
    }

    report.checks.push_back(
        from("involution", involution_check(sys, config.samples, config.tolerances.involution, seed)));

    const RankReport rk = rank_check(sys, config.samples, config.tolerances.rank, seed);
    CheckResult rank = below("rank", rk.min_rank, rk.required, rk.samples);
    rank.relation = ">=";
    rank.pass = rk.pass;
    rank.detail["singular_value_cutoff"] = rk.tolerance;
    report.checks.push_back(rank);
    return report;
}

Report cmd_coisotropy(const SystemConfig& config, const Eigen::VectorXd& lambda, std::size_t n_points,
                      std::uint64_t seed)
{
    const ContactSystem& sys = config.system;
    if (lambda.size() != sys.n() + 1)
        throw InputError("lambda must have " + std::to_string(sys.n() + 1) + " components");
    if (!(lambda.norm() > 0.0))
        throw InputError("lambda must be nonzero");

    Report report = make_report(config, "coisotropy", seed);
    std::vector<Eigen::VectorXd> points;
    std::size_t failures = 0;
    std::string first_failure;
    for (const auto& s : sample_box(sys.region, n_points, seed)) {
        try {
            points.push_back(ray_project(sys, lambda, s).x);
        } catch (const NumericalError& e) {
            if (failures++ == 0)
                first_failure = e.what();
        }
    }
    if (points.empty())
        throw ConvergenceError("no seed could be projected onto the ray preimage: " + first_failure);

    const double tol = config.tolerances.coisotropy;
    const CheckReport co = coisotropy_check(sys, lambda, points, tol);
    const CheckReport ta = tangency_check(sys, lambda, points, tol);
    report.checks.push_back(from("coisotropy", co));
    report.checks.push_back(from("tangency", ta));
    report.checks.push_back(from("dissipative_map", dissipative_map_check(sys, lambda, points, tol)));
    report.results["lambda"] = to_json(lambda);
    report.results["points"] = points.size();
    report.results["projection_failures"] = failures;
    report.results["coisotropy_matches_tangency"] = co.pass == ta.pass;
    return report;
}

Report cmd_integrate(const SystemConfig& config, int index, const Eigen::VectorXd& x0, double t, std::ostream& csv)
{
    const ContactSystem& sys = config.system;
    if (index < 0 || index > sys.n())
        throw InputError("integral index must lie in [0, " + std::to_string(sys.n()) + "]");
    if (x0.size() != sys.chart.dimension())
        throw InputError("x0 must have " + std::to_string(sys.chart.dimension()) + " components");
    if (!std::isfinite(t))
        throw InputError("t must be finite");
    if (!sys.region.contains(x0))
        throw InputError("x0 lies outside the region");

    const Expression& f = sys.integrals[static_cast<std::size_t>(index)];
    const Trajectory traj = integrate(sys.chart, f, x0, t, config.integrator, sys.region);
    write_csv(csv, traj, sys.chart.coords());

    Report report = make_report(config, "integrate", config.seed.value_or(0));
    CheckResult done = below("completed", std::abs(t - traj.times.back()), 0.0, traj.size());
    done.relation = "<=";
    done.pass = traj.completed();
    report.checks.push_back(done);
    report.results["integral"] = index;
    report.results["hamiltonian"] = f.str();
    report.results["status"] = to_string(traj.status);
    if (!traj.message.empty())
        report.results["message"] = traj.message;
    report.results["steps"] = traj.size() - 1;
    report.results["t_final"] = traj.times.back();
    report.results["final_point"] = to_json(traj.back());
    return report;
}

Report cmd_symplectize_verify(const SystemConfig& config, std::size_t n_samples, std::uint64_t seed,
                              const LiftFn& lift)
{
    const ContactSystem& sys = config.system;
    const SympChart symp(sys.chart, config.fiber);
    std::vector<Expression> lifted;
    for (const auto& f : sys.integrals)
        lifted.push_back(lift(symp, f));

    const Eigen::Index dim = sys.chart.dimension();
    Eigen::VectorXd lo(dim + 1), hi(dim + 1);
    lo << sys.region.lower, config.fiber_min;
    hi << sys.region.upper, config.fiber_max;
    const auto points = sample_box(Box(lo, hi), n_samples, seed);

    double bracket = 0.0, field = 0.0, liouville = 0.0, degree = 0.0;
    const std::size_t m = lifted.size();
    for (const auto& X : points) {
        const Eigen::VectorXd x = X.head(dim);
        const double r = X[dim];
        const Eigen::VectorXd theta = theta_at(symp, X);
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a + 1; b < m; ++b) {
                const double lhs = poisson_bracket_at(symp, lifted[a], lifted[b], X);
                const double rhs = jacobi_bracket_at(sys.chart, sys.integrals[a], sys.integrals[b], x);
                bracket = std::max(bracket, std::abs(lhs + r * rhs));
            }
            const Eigen::VectorXd XF = symp_hamiltonian_field_at(symp, lifted[a], X);
            const Eigen::VectorXd Xf = hamiltonian_field_at(sys.chart, sys.integrals[a], x);
            field = std::max(field, (project_vector(symp, XF) - Xf).cwiseAbs().maxCoeff());
            liouville = std::max(liouville, std::abs(theta.dot(XF) - eval(lifted[a], X)));
            degree = std::max(degree, homogeneity_residual(symp, lifted[a], X, 1));
        }
    }

    const double tol = config.tolerances.correspondence;
    Report report = make_report(config, "symplectize-verify", seed);
    report.checks.push_back(below("bracket_correspondence", bracket, tol, points.size()));
    report.checks.push_back(below("field_projection", field, tol, points.size()));
    report.checks.push_back(below("liouville_contraction", liouville, tol, points.size()));
    report.checks.push_back(below("homogeneity", degree, tol, points.size()));
    json lifts = json::array();
    for (const auto& F : lifted)
        lifts.push_back(F.str());
    report.results["lifted_integrals"] = lifts;
    return report;
}

Report cmd_action_angle(const SystemConfig& config, const std::string& section_name,
                        const std::vector<Eigen::VectorXd>& points, std::uint64_t seed, bool darboux)
{
    const SectionSpec& section = config.section(section_name);
    const SympSystem system(config.system, config.fiber);
    const Eigen::Index dim = config.system.chart.dimension();

    Report report = make_report(config, "action-angle", seed);
    const SectionReport sr = verify_section(system, section, config.samples, config.tolerances.section, seed);
    const double level = sr.sign < 0 ? sr.residual_minus
                         : sr.sign > 0 ? sr.residual_plus
                                       : std::min(sr.residual_minus, sr.residual_plus);
    CheckResult sec = below("section", std::max(level, sr.horizontality), sr.tolerance, sr.samples);
    sec.pass = sr.pass;
    sec.detail = {{"sign", sr.sign},
                  {"residual_plus", sr.residual_plus},
                  {"residual_minus", sr.residual_minus},
                  {"horizontality", sr.horizontality}};
    report.checks.push_back(sec);

    json out = json::array();
    std::vector<Eigen::VectorXd> solved;
    std::size_t failures = 0;
    for (const auto& p : points) {
        json entry{{"point", to_json(p)}};
        try {
            Eigen::VectorXd X;
            if (p.size() == dim)
                X = symp_point(p, 1.0);
            else if (p.size() == dim + 1)
                X = p;
            else
                throw InputError("expected " + std::to_string(dim) + " or " + std::to_string(dim + 1) +
                                 " coordinates");
            const ActionAngleResult res = angle_solve(system, section, X, config.angle_solve);
            entry["y"] = to_json(res.y);
            entry["A"] = to_json(res.A);
            entry["A_sigma"] = to_json(res.A_sigma);
            entry["A_tilde"] = to_json(res.A_tilde);
            entry["action_index"] = res.action_index;
            entry["base_point"] = to_json(res.base_point);
            entry["section_sign"] = res.section_sign;
            entry["residual"] = res.residual;
            entry["iterations"] = res.iterations;
            solved.push_back(X.head(dim));
        } catch (const Error& e) {
            ++failures;
            entry["error"] = error_kind(e);
            entry["message"] = e.what();
        }
        out.push_back(std::move(entry));
    }
    CheckResult solves = below("angle_solve", static_cast<double>(failures), 0.0, points.size());
    solves.relation = "<=";
    solves.pass = failures == 0;
    report.checks.push_back(solves);

    if (darboux) {
        DarbouxOptions opts;
        opts.tol = config.tolerances.darboux;
        const DarbouxReport dr = darboux_verify(system, section, solved, opts);
        CheckResult d = below("darboux", dr.residual, dr.tolerance, dr.samples);
        d.pass = dr.pass;
        if (dr.worst_point.size() > 0)
            d.detail["worst_point"] = to_json(dr.worst_point);
        report.checks.push_back(d);
    }
    report.results["section"] = section.name;
    if (section.lattice.size() > 0)
        report.results["lattice"] = to_json(section.lattice);
    report.results["points"] = out;
    return report;
}

std::vector<Eigen::VectorXd> parse_points(const json& j)
{
    const json* list = &j;
    std::string ptr;
    if (j.is_object()) {
        expect_object(j, "", {"points"});
        list = &required(j, "", "points");
        ptr = "/points";
    }
    if (!list->is_array())
        throw ConfigError(ptr, "expected an array of points");
    std::vector<Eigen::VectorXd> out;
    for (std::size_t i = 0; i < list->size(); ++i) {
        const json& p = (*list)[i];
        if (!p.is_array() || p.empty())
            throw ConfigError(join(ptr, i), "expected a nonempty array of numbers");
        out.push_back(number_array(p, join(ptr, i), p.size()));
    }
    return out;
}

std::vector<Eigen::VectorXd> load_points(const std::string& path)
{
    return parse_points(read_json_file(path, "points file"));
}

} // namespace contactlab
