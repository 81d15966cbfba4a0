#include "contactlab/symplectic.hpp"

#include "doctest.h"
#include "test_support.hpp"

#include <cmath>

using namespace contactlab;
using testing_support::vec;

namespace {

const Eigen::VectorXd X0 = vec({2, 3, 5, 7});

Box symp_region()
{
    return Box(vec({-1.5, -1.5, 0.5, 0.5}), vec({1.5, 1.5, 2.0, 3.0}));
}

ContactChart warped_chart()
{
    ContactChart d = ContactChart::darboux(1);
    return conformal_rescale(d, d.parse("2 + 0.5*sin(q) + 0.1*z^2 + 0.2*p^2"),
                             Box(vec({-1.5, -1.5, 0.5}), vec({1.5, 1.5, 2.0})));
}

template <typename F>
Eigen::MatrixXd fd_jacobian(F&& field, const Eigen::VectorXd& x, double h = 1e-5)
{
    const Eigen::Index d = x.size();
    Eigen::MatrixXd J(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        Eigen::VectorXd xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        J.col(a) = (field(xp) - field(xm)) / (2.0 * h);
    }
    return J;
}

} // namespace

TEST_CASE("lifted functions")
{
    SympChart symp(ContactChart::darboux(1));
    CHECK(symp.coords() == Coordinates{"q", "p", "z", "r"});
    CHECK(lift_function(symp, symp.base().parse("p")).str() == "(-(r * p))");
    CHECK(lift_function(symp, symp.base().parse("z")).str() == "(-(r * z))");
    Expression zero = lift_function(symp, symp.base().parse("0"));
    CHECK(zero.constant_value() == 0.0);
    CHECK(eval(lift_function(symp, symp.base().parse("p")), X0) == -21.0);
    CHECK_THROWS_AS(SympChart(ContactChart::darboux(1), "z"), InputError);
}

TEST_CASE("theta")
{
    SympChart symp(ContactChart::darboux(1));
    CHECK(theta_at(symp, X0) == vec({-21, 0, 7, 0}));
    CHECK(theta_at(symp, vec({2, 0, 5, 4})) == vec({0, 0, 4, 0}));
    CHECK(theta_at(symp, X0).dot(vec({0, 0, 0, 7})) == 0.0);

    // the stored coefficient expressions and the pointwise evaluation agree
    SympChart warped(warped_chart());
    for (const auto& X : sample_box(symp_region(), 20, 2)) {
        const Eigen::VectorXd th = theta_at(warped, X);
        for (Eigen::Index a = 0; a < warped.dimension(); ++a)
            CHECK(std::abs(eval(warped.theta()[static_cast<std::size_t>(a)], X) - th[a]) < 1e-14);
    }

    CHECK_THROWS_AS(theta_at(symp, vec({2, 3, 5, 0})), DomainError);
    CHECK_THROWS_AS(theta_at(symp, vec({2, 3, 5, -1})), DomainError);
}

TEST_CASE("omega")
{
    SympChart symp(ContactChart::darboux(1));
    // by hand: d theta = dr^dz - p dr^dq - r dp^dq
    Eigen::MatrixXd dtheta = Eigen::MatrixXd::Zero(4, 4);
    dtheta(3, 2) = 1.0;
    dtheta(2, 3) = -1.0;
    dtheta(3, 0) = -3.0;
    dtheta(0, 3) = 3.0;
    dtheta(1, 0) = -7.0;
    dtheta(0, 1) = 7.0;
    CHECK(omega_at(symp, X0) == -dtheta);
    CHECK(omega_at(symp, X0).determinant() == doctest::Approx(49.0).epsilon(1e-14));

    // constant coframe: no contribution among the base coordinates
    SympChart flat(ContactChart::with_coframe(1, {"q", "p", "z"}, {"0", "0", "1"}));
    CHECK(omega_at(flat, X0).topLeftCorner(3, 3).isZero(0.0));

    // finite-difference exterior derivative of the theta coefficients as oracle
    for (const SympChart& s : {symp, SympChart(warped_chart())}) {
        for (const auto& X : sample_box(symp_region(), 25, 3)) {
            Eigen::MatrixXd J(4, 4); // J(a, b) = d_b theta_a
            for (int a = 0; a < 4; ++a)
                J.row(a) = testing_support::fd_gradient(
                               [&](const Eigen::VectorXd& Y) {
                                   return eval(s.theta()[static_cast<std::size_t>(a)], Y);
                               },
                               X)
                               .transpose();
            const Eigen::MatrixXd fd = -(J.transpose() - J);
            CHECK((omega_at(s, X) - fd).cwiseAbs().maxCoeff() < 1e-7);
            if (s.base().is_darboux())
                CHECK(omega_at(s, X).determinant() == doctest::Approx(X[3] * X[3]).epsilon(1e-12));
        }
    }
}

TEST_CASE("Liouville field")
{
    for (const SympChart& symp : {SympChart(ContactChart::darboux(1)), SympChart(warped_chart())}) {
        const Expression sigma = symp.parse("r");
        for (const auto& X : sample_box(symp_region(), 25, 4)) {
            const Eigen::VectorXd D = liouville_field_at(symp, X);
            CHECK((D - vec({0, 0, 0, X[3]})).norm() < 1e-12);
            CHECK(std::abs(theta_at(symp, X).dot(D)) < 1e-12);
            CHECK((omega_at(symp, X).transpose() * D + theta_at(symp, X)).norm() < 1e-10);
            CHECK(homogeneity_residual(symp, sigma, X, 1) < 1e-10);
        }
    }
    CHECK(liouville_field_at(SympChart(ContactChart::darboux(1)), X0) == vec({0, 0, 0, 7}));
}

TEST_CASE("symplectic Hamiltonian vector fields")
{
    SympChart symp(ContactChart::darboux(1));
    CHECK(symp_hamiltonian_field_at(symp, symp.parse("-(r*p)"), X0).isApprox(vec({1, 0, 0, 0})));
    CHECK((symp_hamiltonian_field_at(symp, symp.parse("-(r*z)"), X0) - vec({0, -3, -5, 7})).norm() < 1e-12);
    CHECK(symp_hamiltonian_field_at(symp, symp.parse("4.5"), X0).isZero(0.0));

    for (const auto& X : sample_box(symp_region(), 20, 5)) {
        const Expression F = symp.parse("q*r - z^2 + sin(p)");
        const Eigen::VectorXd XF = symp_hamiltonian_field_at(symp, F, X);
        CHECK((omega_at(symp, X).transpose() * XF - eval_jet1(F, X).gradient).norm() < 1e-10);
    }
}

TEST_CASE("Poisson bracket")
{
    SympChart symp(ContactChart::darboux(1));
    Expression hs = symp.parse("-(r*p)"), fs = symp.parse("-(r*z)");
    Expression qs = symp.parse("-(r*q)");
    for (const auto& X : sample_box(symp_region(), 20, 6)) {
        CHECK(std::abs(poisson_bracket_at(symp, hs, fs, X)) < 1e-12);
        CHECK(std::abs(poisson_bracket_at(symp, fs, fs, X)) < 1e-12);
        // {q^S, p^S} = -r {q, p} = r
        CHECK(poisson_bracket_at(symp, qs, hs, X) == doctest::Approx(X[3]).epsilon(1e-12));
        CHECK(poisson_bracket_at(symp, hs, qs, X) == doctest::Approx(-X[3]).epsilon(1e-12));
    }
}

TEST_CASE("projection")
{
    SympChart symp(ContactChart::darboux(1));
    const Eigen::VectorXd V = symp_hamiltonian_field_at(symp, lift_function(symp, symp.base().parse("z")), X0);
    CHECK((project_vector(symp, V) - hamiltonian_field_at(symp.base(), symp.base().parse("z"), vec({2, 3, 5})))
              .norm() < 1e-12);
    CHECK(project_vector(symp, liouville_field_at(symp, X0)).isZero(0.0));

    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (int k = 0; k < 10; ++k) {
        Eigen::VectorXd v = vec({g(rng), g(rng), g(rng)});
        CHECK(project_vector(symp, symp_point(v, 0.0)) == v);
    }
    CHECK_THROWS_AS(project_vector(symp, vec({1, 2, 3})), InputError);
}

TEST_CASE("homogeneity residual")
{
    SympChart symp(ContactChart::darboux(1));
    const Eigen::VectorXd X = vec({0.3, -0.4, 1.2, 1.0});
    CHECK(homogeneity_residual(symp, symp.parse("-(r*p)"), X0, 1) < 1e-12);
    CHECK(homogeneity_residual(symp, symp.parse("q"), X0, 0) == 0.0);
    CHECK(homogeneity_residual(symp, symp.parse("r^2"), X, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(homogeneity_residual(symp, symp.parse("r^2"), X, 2) < 1e-14);
}

TEST_CASE("correspondence with the contact structure")
{
    for (const SympChart& symp : {SympChart(ContactChart::darboux(1)), SympChart(warped_chart())}) {
        const ContactChart& base = symp.base();
        std::mt19937_64 rng(11);
        double bracket = 0.0, field = 0.0, potential = 0.0, commute = 0.0, degree = 0.0;
        const auto pts = sample_box(symp_region(), 100, 12);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const Eigen::VectorXd& X = pts[k];
            const Eigen::VectorXd x = X.head(3);
            const double r = X[3];
            Expression f = base.parse(testing_support::random_polynomial(rng, base.coords(), 3));
            Expression g = base.parse(testing_support::random_polynomial(rng, base.coords(), 3));
            Expression fs = lift_function(symp, f), gs = lift_function(symp, g);

            bracket = std::max(bracket,
                               std::abs(poisson_bracket_at(symp, fs, gs, X) + r * jacobi_bracket_at(base, f, g, x)));

            const Eigen::VectorXd XF = symp_hamiltonian_field_at(symp, fs, X);
            field = std::max(field, (project_vector(symp, XF) - hamiltonian_field_at(base, f, x)).norm());
            potential = std::max(potential, std::abs(theta_at(symp, X).dot(XF) - eval(fs, X)));
            degree = std::max(degree, homogeneity_residual(symp, fs, X, 1));

            // [Delta, X_F] with finite-difference Jacobians of both fields
            const Eigen::VectorXd D = liouville_field_at(symp, X);
            const Eigen::MatrixXd JX =
                fd_jacobian([&](const Eigen::VectorXd& Y) { return symp_hamiltonian_field_at(symp, fs, Y); }, X);
            const Eigen::MatrixXd JD =
                fd_jacobian([&](const Eigen::VectorXd& Y) { return liouville_field_at(symp, Y); }, X);
            commute = std::max(commute, (JX * D - JD * XF).norm());
        }
        CHECK(bracket < 1e-8);
        CHECK(field < 1e-8);
        CHECK(potential < 1e-10);
        CHECK(degree < 1e-10);
        CHECK(commute < 1e-6);
    }
}
