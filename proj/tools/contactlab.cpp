#include "contactlab/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace contactlab;

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void emit(const Report& report, const std::string& path)
{
    const std::string text = report.to_json().dump(2) + "\n";
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write report " + path);
    out << text;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Contact Hamiltonian systems: integrability checks, flows and action-angle coordinates"};
    app.require_subcommand(1);

    std::string config_path, report_path;
    std::optional<std::uint64_t> seed;
    auto common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "System configuration (JSON)")->required();
        sub->add_option("--seed", seed, "Sampling seed (default: CONTACTLAB_SEED, then the config seed, then 1)");
        sub->add_option("--report", report_path, "Write the JSON report here instead of stdout");
    };

    CLI::App* check = app.add_subcommand("check", "Contact condition, involution and rank checks");
    common(check);

    std::vector<double> lambda;
    std::optional<std::size_t> n_points;
    CLI::App* coiso = app.add_subcommand("coisotropy", "Coisotropy and tangency on the ray preimage of Lambda");
    common(coiso);
    coiso->add_option("--lambda", lambda, "Ray direction, comma separated")->required()->delimiter(',');
    coiso->add_option("--points", n_points, "Number of projected points (default: config samples)");

    int index = 0;
    std::vector<double> x0;
    double t = 0.0;
    std::string csv_path;
    CLI::App* integ = app.add_subcommand("integrate", "Integrate the Hamiltonian field of one integral");
    common(integ);
    integ->add_option("--f", index, "Integral index")->required();
    integ->add_option("--x0", x0, "Initial point, comma separated")->required()->delimiter(',');
    integ->add_option("--t", t, "Final time (may be negative)")->required();
    integ->add_option("--out", csv_path, "Trajectory CSV")->required();

    std::optional<std::size_t> n_samples;
    CLI::App* symp = app.add_subcommand("symplectize-verify", "Check the lift to the symplectization");
    common(symp);
    symp->add_option("--samples", n_samples, "Number of sample points (default: config samples)");

    std::string section, points_path;
    bool darboux = false;
    CLI::App* aa = app.add_subcommand("action-angle", "Action-angle coordinates at query points");
    common(aa);
    aa->add_option("--section", section, "Section name from the config")->required();
    aa->add_option("--points", points_path, "Query points (JSON)")->required();
    aa->add_flag("--darboux", darboux, "Also verify the Darboux form at the solved points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const SystemConfig config = load_config(config_path);
        const std::uint64_t s = resolve_seed(seed, config);
        Report report;
        if (check->parsed()) {
            report = cmd_check(config, s);
        } else if (coiso->parsed()) {
            report = cmd_coisotropy(config, to_vector(lambda), n_points.value_or(config.samples), s);
        } else if (integ->parsed()) {
            std::ofstream csv(csv_path);
            if (!csv)
                throw InputError("cannot write " + csv_path);
            report = cmd_integrate(config, index, to_vector(x0), t, csv);
        } else if (symp->parsed()) {
            report = cmd_symplectize_verify(config, n_samples.value_or(config.samples), s);
        } else {
            report = cmd_action_angle(config, section, load_points(points_path), s, darboux);
        }
        emit(report, report_path);
        return report.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "contactlab: " << e.what() << '\n';
        return exit_code_for(e);
    }
}
