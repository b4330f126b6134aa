#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "conflab/boundary.hpp"
#include "conflab/conformal.hpp"
#include "conflab/fields.hpp"
#include "conflab/quadrature.hpp"
#include "test_support.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using conflab::DomainError;
using conflab::NoRootError;
using conflab::PreconditionError;
using conflab::SymMatrix;
namespace ff = conflab::fields;
namespace bd = conflab::boundary;
namespace cf = conflab::conformal;

namespace {

Eigen::VectorXd pt(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

// Reference coefficient computed from scratch: (n-1-s)! / ((n-k)! (2k-2s-1)!!).
long double ref_coefficient(int n, int k, int s) {
    auto fact = [](int m) {
        long double r = 1.0L;
        for (int i = 2; i <= m; ++i) r *= i;
        return r;
    };
    auto dfact = [](int m) {
        long double r = 1.0L;
        for (int i = m; i >= 2; i -= 2) r *= i;
        return r;
    };
    return fact(n - 1 - s) / (fact(n - k) * dfact(2 * k - 2 * s - 1));
}

long double ref_bk(int n, int k, const SymMatrix& at, double h) {
    long double acc = 0.0L;
    for (int s = 0; s < k; ++s) {
        long double sig = (s == 0) ? 1.0L : static_cast<long double>(testsup::sigma_by_minors(at, s));
        acc += ref_coefficient(n, k, s) * sig * std::pow(static_cast<long double>(h), 2 * k - 2 * s - 1);
    }
    return acc;
}

}  // namespace

TEST_CASE("gauss-legendre rules on the unit interval", "[boundary]") {
    for (int m : {5, 16, 64, 128}) {
        auto rule = conflab::quadrature::gauss_legendre_01(m);
        REQUIRE(static_cast<int>(rule.size()) == m);
        double wsum = 0.0;
        for (auto [x, w] : rule) {
            CHECK(x > 0.0);
            CHECK(x < 1.0);
            CHECK(w > 0.0);
            wsum += w;
        }
        CHECK_THAT(wsum, WithinAbs(1.0, 1e-14));
        // Symmetry of the rule about 1/2.
        for (int i = 0; i < m; ++i) {
            CHECK_THAT(rule[i].first + rule[m - 1 - i].first, WithinAbs(1.0, 1e-14));
            CHECK_THAT(rule[i].second, WithinAbs(rule[m - 1 - i].second, 1e-14));
        }
        // Exact for polynomials of degree <= 2m-1.
        for (int p : {1, 3, 7, 2 * m - 1}) {
            double got = 0.0;
            for (auto [x, w] : rule) got += w * std::pow(x, p);
            CHECK_THAT(got, WithinAbs(1.0 / (p + 1), 1e-13));
        }
        if (m >= 16) {
            double expint = 0.0;
            for (auto [x, w] : rule) expint += w * std::exp(x);
            CHECK_THAT(expint, WithinAbs(std::exp(1.0) - 1.0, 1e-14));
        }
    }
    CHECK_THROWS_AS(conflab::quadrature::gauss_legendre_01(0), DomainError);
}

TEST_CASE("umbilic coefficients reduce to the frozen rationals", "[boundary]") {
    struct Case {
        int n, k, s;
        long long num, den;
    };
    for (Case c : {Case{4, 2, 0, 1, 1}, Case{4, 2, 1, 1, 1}, Case{5, 2, 0, 4, 3},
                   Case{5, 2, 1, 1, 1}, Case{6, 2, 0, 5, 3}, Case{6, 3, 0, 4, 3},
                   Case{6, 3, 1, 4, 3}, Case{6, 3, 2, 1, 1}, Case{8, 3, 0, 14, 5},
                   Case{8, 3, 1, 2, 1}, Case{8, 3, 2, 1, 1}}) {
        auto r = bd::umbilic_coefficient(c.n, c.k, c.s);
        CHECK(r.num == c.num);
        CHECK(r.den == c.den);
        CHECK_THAT(r.value(), WithinAbs(static_cast<double>(ref_coefficient(c.n, c.k, c.s)), 1e-15));
    }
    CHECK_THROWS_AS(bd::umbilic_coefficient(3, 2, 0), DomainError);  // n < 2k
    CHECK_THROWS_AS(bd::umbilic_coefficient(4, 2, 2), DomainError);  // s >= k
    CHECK_THROWS_AS(bd::umbilic_coefficient(4, 2, -1), DomainError);
    CHECK_THROWS_AS(bd::umbilic_coefficient(4, 0, 0), DomainError);
}

TEST_CASE("umbilic boundary curvature closed forms", "[boundary]") {
    SymMatrix two3 = SymMatrix::scaled_identity(3, 2.0);
    SymMatrix two4 = SymMatrix::scaled_identity(4, 2.0);
    SymMatrix two5 = SymMatrix::scaled_identity(5, 2.0);

    CHECK_THAT(bd::bk_umbilic(4, 2, two3, 1.0), WithinAbs(7.0, 1e-13));
    CHECK_THAT(bd::bk_umbilic(4, 2, two3, 2.0), WithinAbs(20.0, 1e-13));
    CHECK_THAT(bd::bk_umbilic(4, 2, two3, 0.5), WithinAbs(3.125, 1e-13));
    CHECK_THAT(bd::bk_umbilic(5, 2, two4, 1.0), WithinAbs(28.0 / 3.0, 1e-12));
    CHECK_THAT(bd::bk_umbilic(6, 2, two5, 1.0), WithinAbs(35.0 / 3.0, 1e-12));
    CHECK_THAT(bd::bk_umbilic(6, 3, two5, 1.0), WithinAbs(164.0 / 3.0, 1e-12));
    CHECK_THAT(bd::bk_umbilic(6, 3, two5, 2.0), WithinAbs(688.0 / 3.0, 1e-11));

    // Only the pure mean-curvature term survives when the tangential tensor vanishes.
    SymMatrix zero3(3);
    CHECK_THAT(bd::bk_umbilic(4, 2, zero3, 1.5), WithinAbs(std::pow(1.5, 3), 1e-13));
    CHECK_THAT(bd::bk_umbilic(4, 2, two3, 0.0), WithinAbs(0.0, 0.0));

    std::mt19937 rng(83);
    for (int rep = 0; rep < 40; ++rep) {
        const int k = 2 + rep % 2;
        const int n = 2 * k + rep % 3;
        SymMatrix at = testsup::random_symmetric(rng, n - 1, 1.5);
        std::uniform_real_distribution<double> hd(-2.0, 2.0);
        const double h = hd(rng);
        const double got = bd::bk_umbilic(n, k, at, h);
        CHECK_THAT(got, WithinAbs(static_cast<double>(ref_bk(n, k, at, h)), 1e-10 * (1.0 + std::abs(got))));
        // Odd in h.
        CHECK_THAT(bd::bk_umbilic(n, k, at, -h), WithinAbs(-got, 1e-10 * (1.0 + std::abs(got))));
    }

    CHECK_THROWS_AS(bd::bk_umbilic(3, 2, SymMatrix(2), 1.0), DomainError);
    CHECK_THROWS_AS(bd::bk_umbilic(4, 2, two4, 1.0), DomainError);  // wrong block size
    CHECK_THROWS_AS(bd::bk_umbilic(4, 0, two3, 1.0), DomainError);
}

TEST_CASE("boundary curvature of fields", "[boundary]") {
    std::mt19937 rng(89);
    std::uniform_real_distribution<double> td(-2.0, 2.0);

    struct Case {
        int n, k;
        double b, xn, ref;
    };
    for (Case c : {Case{4, 2, 0.25, -1.0, 7.0}, Case{4, 2, 1.0, -1.0, 20.0},
                   Case{6, 3, 0.25, -1.0, 164.0 / 3.0}, Case{6, 3, 1.0, -1.0, 688.0 / 3.0}}) {
        Eigen::VectorXd center = Eigen::VectorXd::Zero(c.n);
        for (int i = 0; i + 1 < c.n; ++i) center[i] = 0.3 * td(rng);
        center[c.n - 1] = c.xn;
        auto u = ff::bubble_field({c.n, c.b, center});
        for (int rep = 0; rep < 10; ++rep) {
            Eigen::VectorXd xb = Eigen::VectorXd::Zero(c.n);
            for (int i = 0; i + 1 < c.n; ++i) xb[i] = td(rng);
            CHECK_THAT(bd::bk_of_field(u, xb, c.k), WithinRel(c.ref, 1e-8));
        }
    }

    // u = exp(-x4): tangential tensor -I/2, h = 1, so B_2 = 1 - 3/2 = -1/2.
    auto f = ff::parse_field("exp(-x4)", 4);
    CHECK_THAT(bd::bk_of_field(f, pt({0.7, -0.4, 0.2, 0.0}), 2), WithinAbs(-0.5, 1e-12));

    CHECK_THROWS_AS(bd::bk_of_field(f, pt({0, 0, 0, 0.1}), 2), DomainError);
    CHECK_THROWS_AS(bd::bk_of_field(f, pt({0, 0, 0, 0.0}), 3), DomainError);  // n < 2k
}

TEST_CASE("derivative of boundary curvature in the mean-curvature slot", "[boundary]") {
    // With the tangential tensor written as M - h^2/2 I, the h-derivative collapses
    // to sigma_{k-1} of the tangential tensor.
    SymMatrix M = SymMatrix::scaled_identity(3, 2.5);
    CHECK_THAT(bd::bk_h_derivative(M, 1.0, 4, 2), WithinAbs(6.0, 1e-13));
    CHECK_THAT(bd::bk_h_derivative(M, 0.0, 4, 2), WithinAbs(7.5, 1e-13));

    std::mt19937 rng(97);
    std::uniform_real_distribution<double> hd(-1.5, 1.5);
    int checked = 0;
    for (int rep = 0; rep < 60; ++rep) {
        const int k = 2 + rep % 2;
        const int n = 2 * k + rep % 3;
        SymMatrix M2 = testsup::random_with_spectrum(rng, n - 1, 0.5, 3.0);
        const double h = hd(rng);
        SymMatrix at = M2 - SymMatrix::scaled_identity(n - 1, 0.5 * h * h);
        if (conflab::symfun::cone_classify(at) < k - 1) continue;
        auto rep_check = bd::bk_h_derivative_check(M2, h, n, k);
        CHECK(rep_check.pass);
        CHECK(rep_check.abs_err <= rep_check.tol);
        ++checked;
    }
    CHECK(checked >= 40);

    // k = 1: the boundary operator is h itself.
    CHECK_THAT(bd::bk_h_derivative(SymMatrix(3), 0.7, 4, 1), WithinAbs(1.0, 0.0));
}

TEST_CASE("solving for the mean curvature at fixed tangential tensor", "[boundary]") {
    SymMatrix two3 = SymMatrix::scaled_identity(3, 2.0);
    SymMatrix two4 = SymMatrix::scaled_identity(4, 2.0);
    SymMatrix two5 = SymMatrix::scaled_identity(5, 2.0);

    CHECK_THAT(bd::solve_h(bd::SolveHMode::FixedTangential, two3, 4, 2, 7.0),
               WithinAbs(1.0, 1e-10));
    CHECK_THAT(bd::solve_h(bd::SolveHMode::FixedTangential, two3, 4, 2, 20.0),
               WithinAbs(2.0, 1e-10));
    CHECK_THAT(bd::solve_h(bd::SolveHMode::FixedTangential, two4, 5, 2, 28.0 / 3.0),
               WithinAbs(1.0, 1e-10));
    CHECK_THAT(bd::solve_h(bd::SolveHMode::FixedTangential, two5, 6, 3, 164.0 / 3.0),
               WithinAbs(1.0, 1e-10));

    std::mt19937 rng(101);
    std::uniform_real_distribution<double> cd(0.01, 50.0);
    for (int rep = 0; rep < 20; ++rep) {
        const double c0 = cd(rng);
        const double h = bd::solve_h(bd::SolveHMode::FixedTangential, two3, 4, 2, c0);
        CHECK_THAT(bd::bk_umbilic(4, 2, two3, h), WithinRel(c0, 1e-10));
    }

    // k = 1 reduces to h = c0 for n = 4.
    CHECK_THAT(bd::solve_h(bd::SolveHMode::FixedTangential, SymMatrix(3), 4, 1, 3.0),
               WithinAbs(3.0, 1e-12));

    CHECK_THROWS_AS(bd::solve_h(bd::SolveHMode::FixedTangential, two3, 4, 2, -1.0), DomainError);
    CHECK_THROWS_AS(bd::solve_h(bd::SolveHMode::FixedTangential, two3, 4, 2, 0.0), DomainError);
    SymMatrix neg = SymMatrix::scaled_identity(3, -1.0);
    CHECK_THROWS_AS(bd::solve_h(bd::SolveHMode::FixedTangential, neg, 4, 2, 1.0), DomainError);
}

TEST_CASE("solving for the mean curvature at fixed full tensor", "[boundary]") {
    // M = 2.5 I: the curvature along h is -h^3/2 + 7.5 h, admissible up to sqrt(5).
    SymMatrix M = SymMatrix::scaled_identity(3, 2.5);
    CHECK_THAT(bd::solve_h(bd::SolveHMode::FixedM, M, 4, 2, 7.0), WithinAbs(1.0, 1e-9));
    CHECK_THAT(bd::solve_h(bd::SolveHMode::FixedM, M, 4, 2, 11.0), WithinAbs(2.0, 1e-9));

    // Beyond the admissible supremum 5 sqrt(5) there is no root.
    const double sup = 5.0 * std::sqrt(5.0);
    try {
        bd::solve_h(bd::SolveHMode::FixedM, M, 4, 2, 12.0);
        FAIL("expected NoRootError");
    } catch (const NoRootError& e) {
        CHECK_THAT(e.supremum, WithinRel(sup, 1e-6));
    }

    // Round trip against the derived tangential tensor.
    const double h = bd::solve_h(bd::SolveHMode::FixedM, M, 4, 2, 9.0);
    SymMatrix at = M - SymMatrix::scaled_identity(3, 0.5 * h * h);
    CHECK_THAT(bd::bk_umbilic(4, 2, at, h), WithinRel(9.0, 1e-9));

    // k = 1: identity operator in h, unconstrained by M.
    CHECK_THAT(bd::solve_h(bd::SolveHMode::FixedM, SymMatrix(3), 4, 1, 2.5), WithinAbs(2.5, 1e-9));

    SymMatrix neg = SymMatrix::scaled_identity(3, -1.0);
    CHECK_THROWS_AS(bd::solve_h(bd::SolveHMode::FixedM, neg, 4, 2, 1.0), DomainError);
}

TEST_CASE("linearization coefficients against closed forms", "[boundary]") {
    // Self-pair on a bubble: the integrand is constant in t, so the quadrature is exact.
    auto u = ff::bubble_field({4, 1.0, pt({0, 0, 0, -1})});
    Eigen::VectorXd xb = pt({0, 0, 0, 0});
    auto lc = bd::linearization_coeffs(u, u, xb, 2);
    // At this point u = 1/2, h = 2: a = u^{-3} h I = 16 I and
    // b_n = u^{-2} sigma_1(2I_3) = 4 * 6 = 24 (n = 4 prefactors are unity).
    CHECK(testsup::max_abs_diff(lc.a, SymMatrix::scaled_identity(3, 16.0)) < 1e-10);
    CHECK_THAT(lc.b_n, WithinAbs(24.0, 1e-10));
    CHECK(lc.nodes == 64);

    CHECK_THROWS_AS(bd::linearization_coeffs(u, u, pt({0, 0, 0, 0.3}), 2), DomainError);
    auto c5 = ff::constant_field(5, 1.0);
    CHECK_THROWS_AS(bd::linearization_coeffs(u, c5, xb, 2), DomainError);  // dim mismatch
}

TEST_CASE("linearization identity for normal-derivative perturbations", "[boundary]") {
    auto u0 = ff::bubble_field({4, 0.25, pt({0.1, -0.2, 0.3, -1.0})});
    Eigen::VectorXd xb = pt({0.2, 0.5, -0.1, 0.0});
    auto dir = ff::parse_field("x4 * (1 + x1 - 0.5*x2^2 + 0.3*x1*x3)", 4);
    auto u1 = ff::perturb_field(u0, dir, 1e-3);

    auto rep = bd::verify_linearization(u0, u1, xb, 2);
    CHECK(rep.pass);
    CHECK(rep.abs_err <= 1e-8 * (1.0 + std::abs(rep.references.at(0))));

    // The report reproduces the finite difference of the boundary curvature.
    const double diff = bd::bk_of_field(u1, xb, 2) - bd::bk_of_field(u0, xb, 2);
    CHECK_THAT(rep.values.at(0), WithinAbs(diff, 1e-14));

    // Doubling quadrature nodes moves the coefficients by at most 1e-12.
    auto c64 = bd::linearization_coeffs(u0, u1, xb, 2, 64);
    auto c128 = bd::linearization_coeffs(u0, u1, xb, 2, 128);
    CHECK(std::abs(c64.b_n - c128.b_n) < 1e-12 * (1.0 + std::abs(c64.b_n)));
    CHECK(testsup::max_abs_diff(c64.a, c128.a) < 1e-12);

    // k = 1 flavor of the same identity.
    auto rep1 = bd::verify_linearization(u0, u1, xb, 1);
    CHECK(rep1.pass);
}

TEST_CASE("linearization identity for tangential-hessian perturbations", "[boundary]") {
    auto u0 = ff::bubble_field({4, 0.25, pt({0.1, -0.2, 0.3, -1.0})});
    Eigen::VectorXd xb = pt({0.2, 0.5, -0.1, 0.0});
    auto dir = ff::parse_field(
        "(x1 - 0.2)^2 * (2 + x2) + 3*(x2 - 0.5)*(x3 + 0.1) + (x1 - 0.2)*(x2 - 0.5)", 4);
    auto u1 = ff::perturb_field(u0, dir, 1e-3);

    auto rep = bd::verify_linearization(u0, u1, xb, 2);
    CHECK(rep.pass);
    CHECK(rep.abs_err <= 1e-8 * (1.0 + std::abs(rep.references.at(0))));
    const double diff = bd::bk_of_field(u1, xb, 2) - bd::bk_of_field(u0, xb, 2);
    CHECK_THAT(rep.values.at(0), WithinAbs(diff, 1e-14));

    // A perturbation with a surviving value channel violates both patterns.
    auto bad = ff::parse_field("1 + x1", 4);
    auto ubad = ff::perturb_field(u0, bad, 1e-3);
    CHECK_THROWS_AS(bd::verify_linearization(u0, ubad, xb, 2), PreconditionError);
}

TEST_CASE("ellipticity report", "[boundary]") {
    auto u = ff::bubble_field({4, 1.0, pt({0, 0, 0, -1})});
    Eigen::VectorXd xb = pt({0, 0, 0, 0});
    auto rep = bd::ellipticity_report(u, xb, 2);
    CHECK(rep.pass);
    CHECK_FALSE(rep.informational);
    REQUIRE(rep.values.size() == 4);
    CHECK_THAT(rep.values[0], WithinAbs(16.0, 1e-8));  // smallest eigenvalue of a
    CHECK_THAT(rep.values[1], WithinAbs(24.0, 1e-8));  // b_n
    CHECK_THAT(rep.values[2], WithinAbs(20.0, 1e-8));  // boundary curvature
    CHECK_THAT(rep.values[3], WithinAbs(2.0, 1e-10));  // mean curvature

    // Flat factor: not in the cone, so the report is informational.
    auto flat = ff::constant_field(4, 1.0);
    auto rep2 = bd::ellipticity_report(flat, xb, 2);
    CHECK(rep2.informational);
    CHECK(rep2.pass);
    CHECK_FALSE(rep2.note.empty());

    // k = 1 has no tangential second-order part and passes on the normal slot alone.
    auto rep3 = bd::ellipticity_report(u, xb, 1);
    CHECK(rep3.pass);
}
