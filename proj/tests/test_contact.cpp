#include "contactlab/contact.hpp"

#include "doctest.h"
#include "test_support.hpp"

#include <cmath>

using namespace contactlab;
using testing_support::vec;

namespace {

const Eigen::VectorXd x0 = vec({2, 3, 5});

Box unit_region()
{
    return Box(vec({-1.5, -1.5, 0.5}), vec({1.5, 1.5, 2.0}));
}

// Non-Darboux coframe: a positive conformal multiple of the Darboux form.
ContactChart warped_chart()
{
    ContactChart d = ContactChart::darboux(1);
    return conformal_rescale(d, d.parse("2 + 0.5*sin(q) + 0.1*z^2 + 0.2*p^2"), unit_region());
}

// Gradient of a bracket-valued function by central differences; used only as
// an oracle for the nested bracket in the Jacobi identity.
template <typename F>
double bracket_with(const ContactChart& chart, const Expression& f, F&& inner, const Eigen::VectorXd& x)
{
    const Eigen::VectorXd grad = testing_support::fd_gradient(inner, x, 1e-5);
    const Eigen::VectorXd Xf = hamiltonian_field_at(chart, f, x);
    const double Rf = eval_jet1(f, x).gradient.dot(reeb_at(chart, x));
    return grad.dot(Xf) + inner(x) * Rf;
}

} // namespace

TEST_CASE("eta components")
{
    ContactChart chart = ContactChart::darboux(1);
    CHECK(chart.is_darboux());
    CHECK(eta_at(chart, x0) == vec({-3, 0, 1}));
    CHECK(eta_at(chart, vec({2, 0, 5})) == vec({0, 0, 1}));

    // eta-bar = a * eta with a = -1/z, checked against scalar multiplication
    ContactChart rescaled =
        conformal_rescale(chart, chart.parse("-1/z"), Box(vec({-3, -3, 0.5}), vec({3, 3, 6})));
    CHECK_FALSE(rescaled.is_darboux());
    Eigen::VectorXd expected = (-1.0 / 5.0) * eta_at(chart, x0);
    CHECK((eta_at(rescaled, x0) - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(eta_at(rescaled, x0).isApprox(vec({3.0 / 5.0, 0.0, -1.0 / 5.0})));
}

TEST_CASE("Darboux detection is structural")
{
    CHECK(ContactChart::with_coframe(1, {"q", "p", "z"}, {"-p", "0", "1"}).is_darboux());
    CHECK_FALSE(ContactChart::with_coframe(1, {"q", "p", "z"}, {"0 - p", "0", "1"}).is_darboux());
    CHECK(ContactChart::darboux(2).coords() == Coordinates{"q1", "q2", "p1", "p2", "z"});
    CHECK_THROWS_AS(ContactChart::with_coframe(1, {"q", "p"}, {"-p", "0"}), InputError);
    CHECK_THROWS_AS(ContactChart::with_coframe(1, {"q", "q", "z"}, {"-q", "0", "1"}), InputError);
}

TEST_CASE("d eta")
{
    ContactChart chart = ContactChart::darboux(1);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
    expected(0, 1) = 1.0;
    expected(1, 0) = -1.0;
    CHECK(deta_at(chart, x0) == expected);

    ContactChart flat = ContactChart::with_coframe(1, {"q", "p", "z"}, {"0", "0", "1"});
    CHECK(deta_at(flat, x0).isZero(0.0));

    // finite-difference curl of the coefficients as oracle
    ContactChart warped = warped_chart();
    for (const auto& x : sample_box(unit_region(), 20, 3)) {
        Eigen::MatrixXd J(3, 3); // J(a, b) = d_b eta_a
        for (int a = 0; a < 3; ++a)
            J.row(a) = testing_support::fd_gradient(
                           [&](const Eigen::VectorXd& y) { return eta_at(warped, y)[a]; }, x)
                           .transpose();
        Eigen::MatrixXd fd = J.transpose() - J;
        CHECK((deta_at(warped, x) - fd).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("flat map")
{
    ContactChart chart = ContactChart::darboux(1);
    // by hand: flat(d/dq) = p^2 dq + dp - p dz
    CHECK(flat_at(chart, x0, vec({1, 0, 0})) == vec({9, 1, -3}));
    CHECK(flat_at(chart, x0, vec({0, 0, 1})) == eta_at(chart, x0));
    CHECK(flat_at(chart, x0, vec({0, 0, 0})).isZero(0.0));
}

TEST_CASE("Reeb field")
{
    ContactChart chart = ContactChart::darboux(1);
    for (const auto& x : sample_box(unit_region(), 10, 5))
        CHECK(reeb_at(chart, x) == vec({0, 0, 1}));
    CHECK(reeb_at(ContactChart::darboux(2), vec({1, 2, 3, 4, 5})) == vec({0, 0, 0, 0, 1}));

    // eta-bar = -eta/h with h = p; the rescaled Reeb field is -X_{1/a} = -X_{-p}
    Box region(vec({-2, 0.5, -2}), vec({2, 3, 2}));
    ContactChart rescaled = conformal_rescale(chart, chart.parse("-1/p"), region);
    for (const auto& x : sample_box(region, 25, 6)) {
        Eigen::VectorXd R = reeb_at(rescaled, x);
        Eigen::VectorXd expected = -hamiltonian_field_at(chart, chart.parse("-p"), x);
        CHECK((R - expected).norm() < 1e-8);
        CHECK(std::abs(eta_at(rescaled, x).dot(R) - 1.0) < 1e-12);
        CHECK((deta_at(rescaled, x).transpose() * R).norm() < 1e-12);
    }

    ContactChart flat = ContactChart::with_coframe(1, {"q", "p", "z"}, {"0", "0", "1"});
    CHECK_THROWS_AS(reeb_at(flat, x0), SingularMatrixError);
}

TEST_CASE("contact Hamiltonian vector fields")
{
    ContactChart chart = ContactChart::darboux(1);
    CHECK(hamiltonian_field_at(chart, chart.parse("p"), x0) == vec({1, 0, 0}));
    CHECK(hamiltonian_field_at(chart, chart.parse("p"), vec({-7, 0.1, 4})) == vec({1, 0, 0}));
    CHECK(hamiltonian_field_at(chart, chart.parse("z"), x0) == vec({0, -3, -5}));
    CHECK(hamiltonian_field_at(chart, chart.parse("q"), x0) == vec({0, -1, -2}));
    CHECK(hamiltonian_field_at(chart, chart.parse("0"), x0).isZero(0.0));

    // general linear-solve path as oracle
    for (const char* src : {"p", "z", "q", "q*p + z^2", "sin(q)*exp(z) - p^3"}) {
        Expression f = chart.parse(src);
        for (const auto& x : sample_box(unit_region(), 20, 11)) {
            Eigen::VectorXd fast = hamiltonian_field_at(chart, f, x);
            Eigen::VectorXd slow = hamiltonian_field_at(chart, f, x, FieldPath::General);
            CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
    CHECK_THROWS_AS(hamiltonian_field_at(ContactChart::with_coframe(1, {"q", "p", "z"}, {"0", "0", "1"}),
                                         chart.parse("p"), x0),
                    SingularMatrixError);
}

TEST_CASE("eta(X_f) = -f and L_{X_f} eta = -R(f) eta on a general coframe")
{
    ContactChart chart = warped_chart();
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        Expression f = chart.parse(testing_support::random_polynomial(rng, chart.coords(), 3));
        for (const auto& x : sample_box(unit_region(), 5, static_cast<std::uint64_t>(trial))) {
            const Eigen::VectorXd X = hamiltonian_field_at(chart, f, x);
            const Jet1 jf = eval_jet1(f, x);
            const Eigen::VectorXd eta = eta_at(chart, x);
            CHECK(std::abs(eta.dot(X) + jf.value) < 1e-10 * (1.0 + std::abs(jf.value)));
            // L_X eta = i_X d eta + d(eta(X)) = i_X d eta - df
            const Eigen::VectorXd lie = deta_at(chart, x).transpose() * X - jf.gradient;
            const double Rf = jf.gradient.dot(reeb_at(chart, x));
            CHECK((lie + Rf * eta).norm() < 1e-9 * (1.0 + jf.gradient.norm()));
        }
    }
}

TEST_CASE("Jacobi bracket examples")
{
    ContactChart chart = ContactChart::darboux(1);
    Expression q = chart.parse("q"), p = chart.parse("p"), z = chart.parse("z");
    for (const auto& x : sample_box(unit_region(), 20, 8)) {
        CHECK(jacobi_bracket_at(chart, p, z, x) == 0.0);
        CHECK(jacobi_bracket_at(chart, z, z, x) == 0.0);
        CHECK(jacobi_bracket_at(chart, q, p, x) == -1.0);
        CHECK(jacobi_bracket_alt_at(chart, q, p, x) == -1.0);
        CHECK(std::abs(jacobi_bracket_at(chart, q, p, x, FieldPath::General) + 1.0) < 1e-12);
    }
}

TEST_CASE("Lambda pairing")
{
    ContactChart chart = ContactChart::darboux(1);
    Expression q = chart.parse("q"), p = chart.parse("p"), z = chart.parse("z");
    CHECK(lambda_pairing_at(chart, p, z, x0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(std::abs(lambda_pairing_at(chart, z, z, x0)) < 1e-15);
    CHECK(lambda_pairing_at(chart, q, p, x0) == doctest::Approx(-1.0).epsilon(1e-14));

    ContactChart warped = warped_chart();
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Expression f = warped.parse(testing_support::random_polynomial(rng, warped.coords(), 3));
        Expression g = warped.parse(testing_support::random_polynomial(rng, warped.coords(), 3));
        for (const auto& x : sample_box(unit_region(), 5, 100 + static_cast<std::uint64_t>(trial))) {
            const double lam = lambda_pairing_at(warped, f, g, x);
            const Eigen::VectorXd R = reeb_at(warped, x);
            const Jet1 jf = eval_jet1(f, x), jg = eval_jet1(g, x);
            const double via_lambda = lam - jf.value * jg.gradient.dot(R) + jg.value * jf.gradient.dot(R);
            const double bracket = jacobi_bracket_at(warped, f, g, x);
            CHECK(std::abs(bracket - via_lambda) < 1e-10 * (1.0 + std::abs(bracket)));
            CHECK(std::abs(bracket - jacobi_bracket_alt_at(warped, f, g, x)) < 1e-10 * (1.0 + std::abs(bracket)));
            CHECK(std::abs(lambda_pairing_at(warped, f, f, x)) < 1e-10 * (1.0 + jf.gradient.squaredNorm()));
        }
    }
}

TEST_CASE("bracket properties on random polynomials")
{
    for (ContactChart chart : {ContactChart::darboux(1), warped_chart()}) {
        std::mt19937_64 rng(2024);
        const auto pts = sample_box(unit_region(), 100, 77);
        double antisym = 0.0, jacobi = 0.0, leibniz = 0.0, antiiso = 0.0;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const Eigen::VectorXd& x = pts[k];
            Expression f = chart.parse(testing_support::random_polynomial(rng, chart.coords(), 2));
            Expression g = chart.parse(testing_support::random_polynomial(rng, chart.coords(), 2));
            Expression h = chart.parse(testing_support::random_polynomial(rng, chart.coords(), 2));

            antisym = std::max(antisym,
                               std::abs(jacobi_bracket_at(chart, f, g, x) + jacobi_bracket_at(chart, g, f, x)));

            auto br = [&](const Expression& a, const Expression& b) {
                return [&chart, a, b](const Eigen::VectorXd& y) { return jacobi_bracket_at(chart, a, b, y); };
            };
            const double cyc = bracket_with(chart, f, br(g, h), x) + bracket_with(chart, g, br(h, f), x) +
                               bracket_with(chart, h, br(f, g), x);
            jacobi = std::max(jacobi, std::abs(cyc));

            const Expression gh = g * h;
            const double Rf = eval_jet1(f, x).gradient.dot(reeb_at(chart, x));
            const double lhs = jacobi_bracket_at(chart, f, gh, x);
            const double rhs = jacobi_bracket_at(chart, f, g, x) * eval(h, x) +
                               jacobi_bracket_at(chart, f, h, x) * eval(g, x) - eval(g, x) * eval(h, x) * Rf;
            leibniz = std::max(leibniz, std::abs(lhs - rhs));

            const double via_fields = -eta_at(chart, x).dot(lie_bracket_at(chart, f, g, x));
            antiiso = std::max(antiiso, std::abs(jacobi_bracket_at(chart, f, g, x) - via_fields));
        }
        CHECK(antisym < 1e-12);
        CHECK(jacobi < 1e-8);
        CHECK(leibniz < 1e-8);
        CHECK(antiiso < 1e-6);
    }
}

TEST_CASE("conformal rescaling")
{
    ContactChart chart = ContactChart::darboux(1);
    Box region(vec({-2, -2, 0.5}), vec({2, 2, 3}));

    ContactChart same = conformal_rescale(chart, chart.parse("1"), region);
    CHECK(same.is_darboux());
    CHECK(same.coords_ptr() == chart.coords_ptr());

    CHECK_THROWS_AS(conformal_rescale(chart, chart.parse("q"), region), DomainError);
    CHECK_THROWS_AS(conformal_rescale(chart, chart.parse("0"), region), DomainError);

    // -eta/z: the rescaled form is dy1 - A dy0 with y0 = q, y1 = -log z, A = -p/z
    ContactChart tilde = conformal_rescale(chart, chart.parse("-1/z"), region);
    for (const auto& x : sample_box(region, 10, 4)) {
        const double q = x[0], p = x[1], z = x[2];
        (void)q;
        Eigen::VectorXd expected = vec({0, 0, -1.0 / z}) - (-p / z) * vec({1, 0, 0});
        CHECK((eta_at(tilde, x) - expected).norm() < 1e-14);
    }

    // X_f = Xbar_{a f} and {f, g}_bar = a {f/a, g/a}
    std::mt19937_64 rng(5);
    Expression a = chart.parse("1.5 + 0.5*tanh(q*p) + 0.1*z");
    ContactChart bar = conformal_rescale(chart, a, region);
    double field = 0.0, bracket = 0.0;
    const auto pts = sample_box(region, 100, 9);
    for (const auto& x : pts) {
        Expression f = chart.parse(testing_support::random_polynomial(rng, chart.coords(), 3));
        Expression g = chart.parse(testing_support::random_polynomial(rng, chart.coords(), 3));
        field = std::max(field, (hamiltonian_field_at(bar, a * f, x) - hamiltonian_field_at(chart, f, x)).norm());
        const double lhs = jacobi_bracket_at(bar, f, g, x);
        const double rhs = eval(a, x) * jacobi_bracket_at(chart, f / a, g / a, x);
        bracket = std::max(bracket, std::abs(lhs - rhs));
    }
    CHECK(field < 1e-8);
    CHECK(bracket < 1e-8);
}

TEST_CASE("contact condition check")
{
    ContactChart chart = ContactChart::darboux(1);
    const auto pts = sample_box(unit_region(), 50, 1);
    auto darboux = contact_condition_check(chart, pts);
    CHECK(darboux.pass);
    CHECK(darboux.min_abs_det == doctest::Approx(1.0).epsilon(1e-12));

    auto flat = contact_condition_check(ContactChart::with_coframe(1, {"q", "p", "z"}, {"0", "0", "1"}), pts);
    CHECK_FALSE(flat.pass);
    CHECK(flat.min_abs_det == 0.0);

    // rescaled by a > 0: compare with a determinant assembled independently
    // from finite differences of the coefficients
    ContactChart warped = warped_chart();
    auto rep = contact_condition_check(warped, pts);
    CHECK(rep.pass);
    double min_det = 1e300;
    for (const auto& x : pts) {
        Eigen::MatrixXd J(3, 3);
        for (int a = 0; a < 3; ++a)
            J.row(a) = testing_support::fd_gradient(
                           [&](const Eigen::VectorXd& y) { return eta_at(warped, y)[a]; }, x)
                           .transpose();
        const Eigen::VectorXd eta = eta_at(warped, x);
        const Eigen::MatrixXd B = (J.transpose() - J) + eta * eta.transpose();
        min_det = std::min(min_det, std::abs(B.determinant()));
    }
    CHECK(rep.min_abs_det == doctest::Approx(min_det).epsilon(1e-6));
}

TEST_CASE("n = 2 Darboux chart")
{
    ContactChart chart = ContactChart::darboux(2);
    Eigen::VectorXd x = vec({0.1, 0.2, 0.3, 0.4, 0.5});
    Expression f = chart.parse("q1*p2 + z*p1^2 - q2");
    Eigen::VectorXd fast = hamiltonian_field_at(chart, f, x);
    Eigen::VectorXd slow = hamiltonian_field_at(chart, f, x, FieldPath::General);
    CHECK((fast - slow).norm() < 1e-12);
    CHECK(jacobi_bracket_at(chart, chart.parse("q1"), chart.parse("p1"), x) == -1.0);
    CHECK(jacobi_bracket_at(chart, chart.parse("q1"), chart.parse("p2"), x) == 0.0);
}
