// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "contactlab/cli.hpp"

#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>

using namespace contactlab;
using testing_support::vec;

namespace {

struct Outcome
{
    bool pass = false;
    std::string summary;
};

std::string sci(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double max_abs(const Eigen::VectorXd& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

ContactSystem dissipative_pair()
{
    ContactChart c = ContactChart::darboux(1);
    return ContactSystem(c, {c.parse("p"), c.parse("z")}, Box(vec({-3, 0.5, 0.5}), vec({3, 4, 6})));
}

SectionSpec section_z()
{
    SectionSpec s = SectionSpec::parse("z", {"L0", "L1"}, {"0", "L0/L1", "1", "L1"}, Box(vec({0.5, 0.5}), vec({4, 6})));
    s.action_index = 1;
    return s;
}

SectionSpec section_p()
{
    SectionSpec s =
        SectionSpec::parse("p", {"L0", "L1"}, {"L1/L0", "1", "L1/L0", "L0"}, Box(vec({0.5, 0.5}), vec({4, 6})));
    s.action_index = 0;
    return s;
}

Outcome golden_suite()
{
    const auto start = std::chrono::steady_clock::now();
    const ContactSystem sys = dissipative_pair();
    const SympChart symp(sys.chart);
    const Expression &h = sys.integrals[0], &f = sys.integrals[1];
    const Expression hs = lift_function(symp, h), fs = lift_function(symp, f);
    double fields = 0.0, bracket = 0.0, lifted = 0.0;
    for (const auto& x : sample_box(sys.region, 100, 101)) {
        fields = std::max(fields, max_abs(hamiltonian_field_at(sys.chart, h, x) - vec({1, 0, 0})));
        fields = std::max(fields, max_abs(hamiltonian_field_at(sys.chart, f, x) - vec({0, -x[1], -x[2]})));
        bracket = std::max(bracket, std::abs(jacobi_bracket_at(sys.chart, h, f, x)));
        const Eigen::VectorXd X = symp_point(x, 0.5 + 0.25 * std::abs(x[0]));
        lifted = std::max(lifted, max_abs(symp_hamiltonian_field_at(symp, hs, X) - vec({1, 0, 0, 0})));
        lifted = std::max(lifted,
                          max_abs(symp_hamiltonian_field_at(symp, fs, X) - vec({0, -X[1], -X[2], X[3]})));
    }
    const double t = seconds_since(start);
    const double worst = std::max({fields, bracket, lifted});
    return {worst <= 1e-12 && t < 1.0, "fields " + sci(fields) + ", {h,f} " + sci(bracket) + ", lifted fields " +
                                           sci(lifted) + " (tol 1e-12); " + sci(t) + " s (< 1 s)"};
}

Outcome flow_reproduction()
{
    const auto start = std::chrono::steady_clock::now();
    const SympChart symp(ContactChart::darboux(1));
    const std::vector<Expression> F{symp.parse("-(r*p)"), symp.parse("-(r*z)")};
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> ts(-3.0, 3.0);
    double worst = 0.0;
    for (const auto& X : sample_box(Box(vec({-2, 0.5, 0.5, 0.5}), vec({2, 4, 6, 2})), 50, 202)) {
        const double t = ts(rng), s = ts(rng);
        const Eigen::VectorXd expected =
            vec({X[0] + t, X[1] * std::exp(-s), X[2] * std::exp(-s), X[3] * std::exp(s)});
        worst = std::max(worst, max_abs(group_action(symp, F, vec({t, s}), X, cfg) - expected));
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-8 && elapsed < 5.0,
            "max deviation " + sci(worst) + " (tol 1e-8) over 50 starts; " + sci(elapsed) + " s (< 5 s)"};
}

Outcome action_angle_reproduction()
{
    const SympSystem sys(dissipative_pair());
    double y = 0.0, at = 0.0, alt = 0.0;
    for (const auto& x : sample_box(sys.contact.region, 25, 303)) {
        const Eigen::VectorXd X = symp_point(x, 1.0);
        const double q = x[0], p = x[1], z = x[2];
        const ActionAngleResult a = angle_solve(sys, section_z(), X);
        y = std::max({y, std::abs(a.y[0] - q), std::abs(a.y[1] + std::log(z))});
        at = std::max(at, std::abs(a.A_tilde[0] + p / z));
        const ActionAngleResult b = angle_solve(sys, section_p(), X);
        alt = std::max({alt, std::abs(b.y[0] - (q - z / p)), std::abs(b.y[1] + std::log(p)),
                        std::abs(b.A_tilde[0] + z / p)});
    }
    return {y <= 1e-6 && at <= 1e-8 && alt <= 1e-6, "angles " + sci(y) + " (tol 1e-6), A~ " + sci(at) +
                                                         " (tol 1e-8), alternative section " + sci(alt) +
                                                         " (tol 1e-6); 25 points"};
}

Outcome darboux_verification()
{
    const SympSystem sys(dissipative_pair());
    const DarbouxReport r = darboux_verify(sys, section_z(), sample_box(sys.contact.region, 25, 404));
    return {r.pass && r.residual < 1e-5, "residual " + sci(r.residual) + " (tol 1e-5) at 25 points"};
}

Outcome bracket_correspondence()
{
    const ContactChart chart = ContactChart::darboux(1);
    const SympChart symp(chart);
    std::mt19937_64 rng(505);
    const auto pts = sample_box(Box(vec({-2, -2, -2, 0.5}), vec({2, 2, 2, 2})), 100, 505);
    double worst = 0.0;
    for (int pair = 0; pair < 20; ++pair) {
        const Expression f = chart.parse(testing_support::random_polynomial(rng, chart.coords(), 3));
        const Expression g = chart.parse(testing_support::random_polynomial(rng, chart.coords(), 3));
        const Expression fs = lift_function(symp, f), gs = lift_function(symp, g);
        for (const auto& X : pts) {
            const double lhs = poisson_bracket_at(symp, fs, gs, X);
            const double rhs = X[3] * jacobi_bracket_at(chart, f, g, X.head(3));
            worst = std::max(worst, std::abs(lhs + rhs));
        }
    }
    return {worst < 1e-8, "max |{f^S,g^S} + r{f,g}| " + sci(worst) + " (tol 1e-8); 20 pairs x 100 points"};
}

// Bracket of f with a bracket-valued function, differencing the inner one.
double bracket_with(const ContactChart& chart, const Expression& f,
                    const std::function<double(const Eigen::VectorXd&)>& inner, const Eigen::VectorXd& x)
{
    const Eigen::VectorXd grad = testing_support::fd_gradient4(inner, x);
    const double Rf = eval_jet1(f, x).gradient.dot(reeb_at(chart, x));
    return grad.dot(hamiltonian_field_at(chart, f, x)) + inner(x) * Rf;
}

Outcome jacobi_structure()
{
    const ContactChart chart = ContactChart::darboux(1);
    std::mt19937_64 rng(606);
    double antisym = 0.0, jacobi = 0.0, leibniz = 0.0, antiiso = 0.0;
    for (const auto& x : sample_box(Box(vec({-1.5, -1.5, 0.5}), vec({1.5, 1.5, 2})), 100, 606)) {
        const Expression f = chart.parse(testing_support::random_polynomial(rng, chart.coords(), 2));
        const Expression g = chart.parse(testing_support::random_polynomial(rng, chart.coords(), 2));
        const Expression h = chart.parse(testing_support::random_polynomial(rng, chart.coords(), 2));
        auto br = [&chart](const Expression& a, const Expression& b) {
            return [&chart, a, b](const Eigen::VectorXd& y) { return jacobi_bracket_at(chart, a, b, y); };
        };
        antisym = std::max(antisym, std::abs(jacobi_bracket_at(chart, f, g, x) + jacobi_bracket_at(chart, g, f, x)));
        jacobi = std::max(jacobi, std::abs(bracket_with(chart, f, br(g, h), x) + bracket_with(chart, g, br(h, f), x) +
                                           bracket_with(chart, h, br(f, g), x)));
        const double Rf = eval_jet1(f, x).gradient.dot(reeb_at(chart, x));
        const double gv = eval(g, x), hv = eval(h, x);
        leibniz = std::max(leibniz, std::abs(jacobi_bracket_at(chart, f, g * h, x) -
                                             (jacobi_bracket_at(chart, f, g, x) * hv +
                                              jacobi_bracket_at(chart, f, h, x) * gv - gv * hv * Rf)));
        antiiso = std::max(antiiso, std::abs(jacobi_bracket_at(chart, f, g, x) +
                                             eta_at(chart, x).dot(lie_bracket_at(chart, f, g, x))));
    }
    return {antisym < 1e-12 && jacobi < 1e-8 && leibniz < 1e-8 && antiiso < 1e-6,
            "antisymmetry " + sci(antisym) + " (1e-12), Jacobi " + sci(jacobi) + " (1e-8), Leibniz " +
                sci(leibniz) + " (1e-8), anti-isomorphism " + sci(antiiso) + " (1e-6); 100 points"};
}

Outcome coisotropy_equivalence()
{
    struct Case
    {
        const char* name;
        ContactSystem system;
        Eigen::VectorXd lambda;
        bool expected;
    };
    auto triple = [](const char* a, const char* b, const char* c) {
        ContactChart chart = ContactChart::darboux(2);
        return ContactSystem(chart, {chart.parse(a), chart.parse(b), chart.parse(c)},
                             Box(vec({0.5, 0.5, 0.5, 0.5, 0.5}), vec({10, 10, 10, 10, 10})));
    };
    const std::vector<Case> cases{{"pair", dissipative_pair(), vec({3, 5}), true},
                                  {"(p1,p2,z)", triple("p1", "p2", "z"), vec({1, 1, 1}), true},
                                  {"(q1,p1,z)", triple("q1", "p1", "z"), vec({1, 1, 1}), false}};
    bool pass = true;
    std::string summary;
    for (const auto& c : cases) {
        std::vector<Eigen::VectorXd> pts;
        for (const auto& s : sample_box(c.system.region, 25, 707))
            pts.push_back(ray_project(c.system, c.lambda, s).x);
        const CheckReport co = coisotropy_check(c.system, c.lambda, pts, 1e-8);
        const CheckReport ta = tangency_check(c.system, c.lambda, pts, 1e-8);
        pass = pass && co.pass == ta.pass && co.pass == c.expected;
        summary += std::string(summary.empty() ? "" : "; ") + c.name + " " + (co.pass ? "pass" : "fail") + "/" +
                   (ta.pass ? "pass" : "fail");
    }
    return {pass, "coisotropy/tangency at tol 1e-8: " + summary};
}

Outcome dissipation_law()
{
    const ContactSystem sys = dissipative_pair();
    double along_f = 0.0, along_h = 0.0;
    for (const auto& x : sample_box(sys.region, 10, 808)) {
        const Trajectory tf = integrate(sys.chart, sys.integrals[1], x, 5.0);
        for (std::size_t k = 0; k < tf.size(); ++k)
            along_f = std::max(along_f, std::abs(tf.points[k][1] - x[1] * std::exp(-tf.times[k])));
        const Trajectory th = integrate(sys.chart, sys.integrals[0], x, 5.0);
        for (const auto& y : th.points)
            along_h = std::max(along_h, std::abs(y[2] - x[2]));
        if (!tf.completed() || !th.completed())
            return {false, "integration stopped early"};
    }
    return {along_f < 1e-7 && along_h < 1e-9, "|p(t) - p(0)e^-t| " + sci(along_f) + " (tol 1e-7), |z(t) - z(0)| " +
                                                  sci(along_h) + " (tol 1e-9); t in [0, 5], 10 starts"};
}

Outcome determinism(const std::string& config_path)
{
    const SystemConfig config = load_config(config_path);
    const std::string a = cmd_check(config, 9).to_json().dump(2);
    const std::string b = cmd_check(load_config(config_path), 9).to_json().dump(2);
    return {a == b, a == b ? "byte-identical reports (" + std::to_string(a.size()) + " bytes)" : "reports differ"};
}

} // namespace

int main(int argc, char** argv)
{
    const std::string config = argc > 1 ? argv[1] : std::string(CONTACTLAB_SOURCE_DIR) + "/configs/dissipative_pair.json";
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"golden suite", golden_suite},
        {"flow reproduction", flow_reproduction},
        {"action-angle reproduction", action_angle_reproduction},
        {"Darboux verification", darboux_verification},
        {"bracket correspondence", bracket_correspondence},
        {"Jacobi structure", jacobi_structure},
        {"coisotropy equivalence", coisotropy_equivalence},
        {"dissipation law", dissipation_law},
        {"determinism", [&] { return determinism(config); }},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s  %zu  %-26s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.summary.c_str());
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
    return failures == 0 ? 0 : 1;
}
