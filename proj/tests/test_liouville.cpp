#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "conflab/boundary.hpp"
#include "conflab/fields.hpp"
#include "conflab/liouville.hpp"
#include "test_support.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using conflab::DomainError;
namespace ff = conflab::fields;
namespace lv = conflab::liouville;

namespace {

Eigen::VectorXd pt(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("certify the canonical quartic-dimension profile", "[liouville]") {
    auto cert = lv::certify_bubble({4, 0.25, pt({0, 0, 0, -1})}, 2, 50);
    CHECK(cert.pass);
    CHECK(cert.k == 2);
    CHECK(cert.params.b == 0.25);
    CHECK_THAT(cert.c0, WithinAbs(7.0, 1e-9));
    CHECK(cert.sigma_err <= 1e-8);
    CHECK(cert.AT_err <= 1e-8);
    CHECK(cert.h_err <= 1e-10);
    CHECK(cert.bk_spread <= 1e-9);
}

TEST_CASE("certification across the sampled profiles", "[liouville]") {
    auto c20 = lv::certify_bubble({4, 1.0, pt({0.3, -0.2, 0.1, -1})}, 2, 40);
    CHECK(c20.pass);
    CHECK_THAT(c20.c0, WithinAbs(20.0, 1e-8));

    Eigen::VectorXd c6(6);
    c6 << 0.1, 0, -0.4, 0.2, 0, -0.9;
    auto c63 = lv::certify_bubble({6, 0.7, c6}, 3, 40);
    CHECK(c63.pass);
    // h = 2 sqrt(0.7) * 0.9, c0 = (4/3) h^5 + (40/3) h^3 + 40 h.
    const double h = 2.0 * std::sqrt(0.7) * 0.9;
    const double c0ref = (4.0 / 3.0) * std::pow(h, 5) + (40.0 / 3.0) * std::pow(h, 3) + 40.0 * h;
    CHECK_THAT(c63.c0, WithinRel(c0ref, 1e-10));

    CHECK_THROWS_AS(lv::certify_bubble({4, 0.25, pt({0, 0, 0, 1.0})}, 2, 10), DomainError);
    CHECK_THROWS_AS(lv::certify_bubble({4, 0.25, pt({0, 0, 0, 0.0})}, 2, 10), DomainError);
    CHECK_THROWS_AS(lv::certify_bubble({4, 0.25, pt({0, 0, 0, -1})}, 3, 10), DomainError);
    CHECK_THROWS_AS(lv::certify_bubble({4, 0.25, pt({0, 0, 0, -1})}, 2, 0), DomainError);
}

TEST_CASE("solve the family for a boundary constant", "[liouville]") {
    auto f7 = lv::solve_family_for_c0(4, 2, 7.0);
    CHECK_THAT(f7.h, WithinAbs(1.0, 1e-10));
    CHECK_THAT(f7.b, WithinAbs(0.25, 1e-10));
    CHECK(f7.xbar_n == -1.0);
    CHECK_FALSE(f7.description.empty());

    auto f20 = lv::solve_family_for_c0(4, 2, 20.0);
    CHECK_THAT(f20.h, WithinAbs(2.0, 1e-10));

    // Linear regime: B ~ 6h near zero for n=4, k=2.
    auto ftiny = lv::solve_family_for_c0(4, 2, 1e-9);
    CHECK_THAT(ftiny.h, WithinRel(1e-9 / 6.0, 1e-3));

    CHECK_THROWS_AS(lv::solve_family_for_c0(4, 2, 0.0), DomainError);
    CHECK_THROWS_AS(lv::solve_family_for_c0(4, 2, -3.0), DomainError);
    CHECK_THROWS_AS(lv::solve_family_for_c0(4, 3, 7.0), DomainError);
}

TEST_CASE("constant to family and back", "[liouville]") {
    std::mt19937 rng(131);
    const int dims[] = {4, 5, 6, 8};
    std::uniform_real_distribution<double> logc(std::log(0.1), std::log(100.0));
    int done = 0;
    while (done < 20) {
        const int n = dims[rng() % 4];
        std::uniform_int_distribution<int> kd(1, n / 2);
        const int k = kd(rng);
        const double c0 = std::exp(logc(rng));
        auto fam = lv::solve_family_for_c0(n, k, c0);
        Eigen::VectorXd center = Eigen::VectorXd::Zero(n);
        center[n - 1] = fam.xbar_n;
        auto cert = lv::certify_bubble({n, fam.b, center}, k, 20);
        CHECK(cert.pass);
        CHECK_THAT(cert.c0, WithinRel(c0, 1e-8));
        ++done;
    }
}

TEST_CASE("the constant depends on the family only through h", "[liouville]") {
    // Two distinct members with the same h = 1.3 in dimension five.
    const double h = 1.3;
    const double b1 = 0.25 * h * h;
    const double b2 = 4.0 * h * h;
    Eigen::VectorXd ca = Eigen::VectorXd::Zero(5), cb = Eigen::VectorXd::Zero(5);
    ca[4] = -h / (2.0 * std::sqrt(b1));
    cb[4] = -h / (2.0 * std::sqrt(b2));
    auto certa = lv::certify_bubble({5, b1, ca}, 2, 30);
    auto certb = lv::certify_bubble({5, b2, cb}, 2, 30);
    CHECK(certa.pass);
    CHECK(certb.pass);
    CHECK(std::abs(certa.c0 - certb.c0) <= 1e-10);
}

TEST_CASE("constraint reconciliation report", "[liouville]") {
    auto r = lv::theorem_constraint_report(4, 2, 1.0);
    CHECK(r.lhs_display == 5.5);
    CHECK(r.c0_direct == 7.0);
    CHECK(r.rhs_display == 5.25);
    CHECK(r.ratio == 5.5 / 5.25);
    CHECK(r.lhs_alternative == 7.0);

    auto checks = r.to_checks();
    REQUIRE(checks.size() == 5);
    for (const auto& c : checks) {
        CHECK(c.informational);
        CHECK(c.pass);
        CHECK(c.values.size() == 1);
    }
    CHECK(checks.at(0).values.at(0) == 5.5);
    CHECK(checks.at(1).values.at(0) == 7.0);
    CHECK(checks.at(2).values.at(0) == 5.25);

    // Deterministic across repeated evaluation at several magnitudes.
    for (double h : {0.5, 1.0, 2.0}) {
        auto a = lv::theorem_constraint_report(4, 2, h);
        auto b = lv::theorem_constraint_report(4, 2, h);
        CHECK(a.lhs_display == b.lhs_display);
        CHECK(a.c0_direct == b.c0_direct);
        CHECK(a.rhs_display == b.rhs_display);
        CHECK(a.ratio == b.ratio);
        CHECK(a.lhs_alternative == b.lhs_alternative);
    }

    // Degenerate first-order case: the sum is empty and the display collapses.
    auto r1 = lv::theorem_constraint_report(4, 1, 0.8);
    CHECK(r1.lhs_display == 0.8);
    CHECK(r1.c0_direct == 0.8);
    CHECK(r1.rhs_display == 0.8);
    CHECK(r1.ratio == 1.0);

    CHECK_THROWS_AS(lv::theorem_constraint_report(4, 2, 0.0), DomainError);
    CHECK_THROWS_AS(lv::theorem_constraint_report(4, 2, -1.0), DomainError);
    CHECK_THROWS_AS(lv::theorem_constraint_report(5, 3, 1.0), DomainError);
}

TEST_CASE("ball version of the certified profile", "[liouville]") {
    auto rep = lv::verify_corollary_ball({4, 0.25, pt({0, 0, 0, -1})}, 2, 0.5, 100);
    CHECK(rep.pass);
    REQUIRE(rep.values.size() == 3);
    CHECK(rep.values.at(0) <= 1e-6);   // interior sigma_k, relative
    CHECK(rep.values.at(1) <= 1e-8);   // pulled-back boundary constancy
    CHECK(rep.values.at(2) <= 1e-8);   // profile fit residual, normalized
    CHECK(rep.abs_err <= 1.0);
    CHECK(rep.tol == 1.0);

    auto rep2 = lv::verify_corollary_ball({4, 1.0, pt({0.2, 0, -0.1, -0.5})}, 2, 0.5, 80);
    CHECK(rep2.pass);

    auto rep63 = lv::verify_corollary_ball({6, 0.7, (Eigen::VectorXd(6) << 0, 0, 0, 0, 0, -1).finished()},
                                           3, 0.5, 60);
    CHECK(rep63.pass);

    // A nearly collapsed ball: the operations stay defined and the report
    // flags the conditioning.
    conflab::CheckReport tiny;
    REQUIRE_NOTHROW(tiny = lv::verify_corollary_ball({4, 0.25, pt({0, 0, 0, -1})}, 2, 1e-6, 40));
    CHECK(tiny.note.find("conditioning") != std::string::npos);

    CHECK_THROWS_AS(lv::verify_corollary_ball({4, 0.25, pt({0, 0, 0, -1})}, 2, 0.0, 40), DomainError);
    CHECK_THROWS_AS(lv::verify_corollary_ball({4, 0.25, pt({0, 0, 0, 1.0})}, 2, 0.5, 40), DomainError);
}
