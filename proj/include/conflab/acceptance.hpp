#pragma once

// The ten go/no-go checks the project promises: each returns a result row
// with a worst observed metric against its gate. Criteria with a single
// tolerance report the raw metric; multi-tolerance criteria report the
// largest metric/tolerance ratio against a gate of 1.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "conflab/boundary.hpp"
#include "conflab/common.hpp"
#include "conflab/conformal.hpp"
#include "conflab/fields.hpp"
#include "conflab/liouville.hpp"
#include "conflab/mobius.hpp"
#include "conflab/symfun.hpp"
#include "conflab/symmat.hpp"

namespace conflab::acceptance {

struct CriterionResult {
    int index = 0;
    std::string name;
    bool pass = false;
    double worst = 0.0;
    double tol = 0.0;
    double wall_ms = 0.0;
    std::string detail;
};

namespace detail {

class Timer {
  public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

struct BubbleCase {
    int n;
    int k;
};

inline const std::vector<BubbleCase>& bubble_cases() {
    static const std::vector<BubbleCase> cases{{4, 2}, {5, 2}, {6, 2}, {6, 3}, {8, 3}};
    return cases;
}

inline Eigen::VectorXd random_center(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> off(-0.5, 0.5);
    std::uniform_real_distribution<double> depth(0.5, 1.5);
    Eigen::VectorXd c(n);
    for (int i = 0; i + 1 < n; ++i) c[i] = off(rng);
    c[n - 1] = -depth(rng);
    return c;
}

inline Eigen::VectorXd interior_point(std::mt19937& rng, const Eigen::VectorXd& center) {
    const int n = static_cast<int>(center.size());
    std::uniform_real_distribution<double> off(-1.5, 1.5);
    std::uniform_real_distribution<double> depth(0.05, 2.0);
    Eigen::VectorXd x(n);
    for (int i = 0; i + 1 < n; ++i) x[i] = center[i] + off(rng);
    x[n - 1] = depth(rng);
    return x;
}

inline Eigen::VectorXd boundary_point(std::mt19937& rng, const Eigen::VectorXd& center) {
    Eigen::VectorXd x = interior_point(rng, center);
    x[x.size() - 1] = 0.0;
    return x;
}

inline SymMatrix random_with_spectrum(std::mt19937& rng, int m, double lo, double hi) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> ev(lo, hi);
    Eigen::MatrixXd raw(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) raw(i, j) = g(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ();
    Eigen::VectorXd d(m);
    for (int i = 0; i < m; ++i) d[i] = ev(rng);
    return SymMatrix::from_dense(q * d.asDiagonal() * q.transpose());
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

}  // namespace detail

/// Interior sigma_k of the model profiles equals 2^k binom(n,k) to 1e-8
/// relative, across five (n,k) pairs and three concentrations.
inline CriterionResult criterion_1(unsigned seed) {
    detail::Timer timer;
    std::mt19937 rng(seed + 1);
    double worst = 0.0;
    for (const auto& c : detail::bubble_cases()) {
        for (double b : {0.3, 1.0, 4.0}) {
            const Eigen::VectorXd center = detail::random_center(rng, c.n);
            const auto u = fields::bubble_field({c.n, b, center});
            double sref = 1.0;
            for (int i = 0; i < c.k; ++i)
                sref *= 2.0 * static_cast<double>(c.n - i) / static_cast<double>(i + 1);
            for (int i = 0; i < 100; ++i) {
                const Eigen::VectorXd x = detail::interior_point(rng, center);
                const double s = conformal::sigma_k_curvature(u, x, c.k);
                worst = std::max(worst, std::abs(s - sref) / sref);
            }
        }
    }
    CriterionResult r;
    r.index = 1;
    r.name = "bubble-sigma-normalization";
    r.worst = worst;
    r.tol = 1e-8;
    r.wall_ms = timer.ms();
    r.pass = worst <= r.tol && r.wall_ms <= 10000.0;
    r.detail = "5 (n,k) pairs x 3 concentrations x 100 interior points; " +
               detail::fmt(r.wall_ms) + " ms of 10000 allowed";
    return r;
}

/// Boundary data of the model profiles: A_T = 2I to 1e-8 max-norm and
/// h = -2 sqrt(b) xbar_n to 1e-10, 100 boundary points per case.
inline CriterionResult criterion_2(unsigned seed) {
    detail::Timer timer;
    std::mt19937 rng(seed + 2);
    double worst_at = 0.0;
    double worst_h = 0.0;
    for (const auto& c : detail::bubble_cases()) {
        for (double b : {0.3, 1.0, 4.0}) {
            const Eigen::VectorXd center = detail::random_center(rng, c.n);
            const auto u = fields::bubble_field({c.n, b, center});
            const double h_ref = -2.0 * std::sqrt(b) * center[c.n - 1];
            for (int i = 0; i < 100; ++i) {
                const Eigen::VectorXd x = detail::boundary_point(rng, center);
                const auto bj = conformal::boundary_jet(u, x);
                const Eigen::MatrixXd diff =
                    bj.a_tangential.dense() -
                    2.0 * Eigen::MatrixXd::Identity(c.n - 1, c.n - 1);
                worst_at = std::max(worst_at, diff.cwiseAbs().maxCoeff());
                worst_h = std::max(worst_h, std::abs(bj.h - h_ref));
            }
        }
    }
    CriterionResult r;
    r.index = 2;
    r.name = "boundary-data";
    r.worst = std::max(worst_at / 1e-8, worst_h / 1e-10);
    r.tol = 1.0;
    r.wall_ms = timer.ms();
    r.pass = r.worst <= r.tol;
    r.detail = "worst |A_T - 2I| = " + detail::fmt(worst_at) + " (tol 1e-8), worst h error = " +
               detail::fmt(worst_h) + " (tol 1e-10)";
    return r;
}

/// B_2 = 7 with spread <= 1e-9 on the h = 1 profile, and the family solver
/// inverts the constant.
inline CriterionResult criterion_3(unsigned seed) {
    detail::Timer timer;
    std::mt19937 rng(seed + 3);
    Eigen::VectorXd center(4);
    center << 0, 0, 0, -1;
    const auto u = fields::bubble_field({4, 0.25, center});
    double worst_val = 0.0;
    double bk_min = std::numeric_limits<double>::infinity();
    double bk_max = -bk_min;
    for (int i = 0; i < 50; ++i) {
        const Eigen::VectorXd x = detail::boundary_point(rng, center);
        const double bk = boundary::bk_of_field(u, x, 2);
        worst_val = std::max(worst_val, std::abs(bk - 7.0));
        bk_min = std::min(bk_min, bk);
        bk_max = std::max(bk_max, bk);
    }
    const double spread = bk_max - bk_min;
    const double h = liouville::solve_family_for_c0(4, 2, 7.0).h;
    CriterionResult r;
    r.index = 3;
    r.name = "bk-constancy";
    r.worst = std::max({worst_val / 1e-8, spread / 1e-9, std::abs(h - 1.0) / 1e-10});
    r.tol = 1.0;
    r.wall_ms = timer.ms();
    r.pass = r.worst <= r.tol;
    r.detail = "worst |B_2 - 7| = " + detail::fmt(worst_val) + ", spread = " +
               detail::fmt(spread) + ", solved h = " + detail::fmt(h);
    return r;
}

/// Finite-difference d B_k / dh at fixed M matches sigma_{k-1}(A_T) to 1e-6
/// relative on 100 random cone inputs.
inline CriterionResult criterion_4(unsigned seed) {
    detail::Timer timer;
    std::mt19937 rng(seed + 4);
    const std::vector<std::pair<int, int>> cases{{4, 2}, {5, 2}, {6, 2}, {6, 3}, {7, 2}, {7, 3}};
    std::uniform_real_distribution<double> hdist(0.3, 2.0);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const auto [n, k] = cases[static_cast<std::size_t>(rep) % cases.size()];
        const SymMatrix at = detail::random_with_spectrum(rng, n - 1, 0.2, 2.5);
        const double h = hdist(rng);
        const SymMatrix M = at + SymMatrix::scaled_identity(n - 1, 0.5 * h * h);
        const auto rep_fd = boundary::bk_h_derivative_check(M, h, n, k);
        const double ref = rep_fd.references.at(0);
        worst = std::max(worst, rep_fd.abs_err / (1.0 + std::abs(ref)));
    }
    CriterionResult r;
    r.index = 4;
    r.name = "h-monotonicity";
    r.worst = worst;
    r.tol = 1e-6;
    r.wall_ms = timer.ms();
    r.pass = worst <= r.tol;
    r.detail = "100 positive-definite tangential tensors across 6 (n,k) pairs";
    return r;
}

/// The linearization identity holds on both vanishing patterns at 64 nodes,
/// and doubling the node count moves the coefficients by <= 1e-12.
inline CriterionResult criterion_5(unsigned seed) {
    detail::Timer timer;
    (void)seed;
    Eigen::VectorXd c0(4), c1(4);
    c0 << 0, 0, 0, -1;
    c1 << 0.3, -0.1, 0.2, -0.7;
    const auto u0 = fields::bubble_field({4, 0.25, c0});
    const auto base1 = fields::bubble_field({4, 1.0, c1});

    const auto psi_n = fields::parse_field("x4 * (1 + x1 - 0.5*x2^2 + 0.3*x1*x3)", 4);
    const auto u1n = fields::perturb_field(u0, psi_n, 1e-3);
    Eigen::VectorXd origin = Eigen::VectorXd::Zero(4);
    const auto rep_n = boundary::verify_linearization(u0, u1n, origin, 2, 64);

    const auto psi_t = fields::parse_field(
        "(x1 - 0.2)^2 * (2 + x2) + 3*(x2 - 0.5)*(x3 + 0.1) + (x1 - 0.2)*(x2 - 0.5)", 4);
    const auto u1t = fields::perturb_field(base1, psi_t, 1e-3);
    Eigen::VectorXd xb(4);
    xb << 0.2, 0.5, -0.1, 0.0;
    const auto rep_t = boundary::verify_linearization(base1, u1t, xb, 2, 64);

    const auto lc64 = boundary::linearization_coeffs(u0, u1n, origin, 2, 64);
    const auto lc128 = boundary::linearization_coeffs(u0, u1n, origin, 2, 128);
    double node_drift = std::abs(lc64.b_n - lc128.b_n);
    const Eigen::MatrixXd da = lc64.a.dense() - lc128.a.dense();
    node_drift = std::max(node_drift, da.cwiseAbs().maxCoeff());

    CriterionResult r;
    r.index = 5;
    r.name = "linearization";
    r.worst = std::max({rep_n.abs_err / rep_n.tol, rep_t.abs_err / rep_t.tol,
                        node_drift / 1e-12});
    r.tol = 1.0;
    r.wall_ms = timer.ms();
    r.pass = rep_n.pass && rep_t.pass && node_drift <= 1e-12;
    r.detail = "both vanishing patterns at 64 nodes; node-doubling drift = " +
               detail::fmt(node_drift);
    return r;
}

/// sigma_k and B_k transform exactly under boundary-centered inversions for
/// parsed exponential-quadratic factors.
inline CriterionResult criterion_6(unsigned seed) {
    detail::Timer timer;
    std::mt19937 rng(seed + 6);
    const int n = 4;
    std::uniform_real_distribution<double> lin(-0.1, 0.1);
    std::uniform_real_distribution<double> quad(-0.05, 0.05);
    std::uniform_real_distribution<double> cdist(-0.5, 0.5);
    std::uniform_real_distribution<double> ldist(0.7, 1.5);
    std::uniform_real_distribution<double> rdist(0.8, 1.6);
    std::normal_distribution<double> g(0.0, 1.0);

    std::vector<mobius::MobiusInversion> inversions;
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd c(n);
        for (int j = 0; j + 1 < n; ++j) c[j] = cdist(rng);
        c[n - 1] = 0.0;
        inversions.push_back(mobius::make_inversion(c, ldist(rng)));
    }

    double worst = 0.0;
    for (int f = 0; f < 100; ++f) {
        std::ostringstream expr;
        expr << std::setprecision(17) << "exp(";
        bool first = true;
        for (int i = 0; i < n; ++i) {
            expr << (first ? "" : " + ") << lin(rng) << "*x" << (i + 1);
            first = false;
        }
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                expr << " + " << quad(rng) << "*x" << (i + 1) << "*x" << (j + 1);
        expr << ")";
        const auto u = fields::parse_field(expr.str(), n);
        const auto& m = inversions[static_cast<std::size_t>(f) % inversions.size()];

        std::vector<Eigen::VectorXd> interior, bdry;
        for (int i = 0; i < 4; ++i) {
            Eigen::VectorXd v(n);
            for (int j = 0; j < n; ++j) v[j] = g(rng);
            v[n - 1] = std::abs(v[n - 1]) + 0.1;
            v /= v.norm();
            interior.push_back(m.center + (rdist(rng) * m.lambda) * v);
            Eigen::VectorXd w(n);
            for (int j = 0; j + 1 < n; ++j) w[j] = g(rng);
            w[n - 1] = 0.0;
            if (w.norm() < 1e-8) w[0] = 1.0;
            w /= w.norm();
            bdry.push_back(m.center + (rdist(rng) * m.lambda) * w);
        }
        const auto rs = mobius::invariance_check_sigma(u, m, interior, 2);
        const auto rb = mobius::invariance_check_bk(u, m, bdry, 2);
        worst = std::max({worst, rs.abs_err / (1.0 + std::abs(rs.references.at(0))),
                          rb.abs_err / (1.0 + std::abs(rb.references.at(0)))});
    }
    CriterionResult r;
    r.index = 6;
    r.name = "conformal-invariance";
    r.worst = worst;
    r.tol = 1e-6;
    r.wall_ms = timer.ms();
    r.pass = worst <= r.tol;
    r.detail = "100 parsed exponential-quadratic factors, 10 inversions";
    return r;
}

/// Moving spheres on the unit-concentration profile: critical radius sqrt(2),
/// the radius-mass identity at three boundary points, and the reflection
/// fixed point.
inline CriterionResult criterion_7(unsigned seed) {
    detail::Timer timer;
    (void)seed;
    Eigen::VectorXd center(4);
    center << 0, 0, 0, -1;
    const auto u = fields::bubble_field({4, 1.0, center});
    const mobius::GridSpec grid;
    Eigen::VectorXd origin = Eigen::VectorXd::Zero(4);

    const double lb = mobius::lambda_bar(u, origin, grid).lambda_bar;
    const double lb_err = std::abs(lb - std::sqrt(2.0)) / std::sqrt(2.0);

    std::vector<Eigen::VectorXd> pts{origin, origin, origin};
    pts[1][0] = 3.0;
    pts[2][1] = -2.0;
    const auto lem = mobius::verify_lemma41(u, pts, grid);
    const auto kfp = mobius::verify_kelvin_fixed_point(u, origin, grid);

    CriterionResult r;
    r.index = 7;
    r.name = "moving-spheres";
    r.worst = std::max({lb_err / 1e-3, lem.abs_err / lem.tol, kfp.abs_err / kfp.tol});
    r.tol = 1.0;
    r.wall_ms = timer.ms();
    r.pass = lb_err <= 1e-3 && lem.pass && !lem.informational && kfp.pass &&
             r.wall_ms <= 60000.0;
    r.detail = "lambda_bar(0) = " + detail::fmt(lb) + "; " + detail::fmt(r.wall_ms) +
               " ms of 60000 allowed";
    return r;
}

/// Newton-trace identity at 1e-10 and finite-difference gradients at 1e-7,
/// 100 random symmetric matrices in dimensions 3 through 6.
inline CriterionResult criterion_8(unsigned seed) {
    detail::Timer timer;
    std::mt19937 rng(seed + 8);
    double worst_trace = 0.0;
    double worst_fd = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int m = 3 + rep % 4;
        const SymMatrix A = detail::random_with_spectrum(rng, m, -1.5, 2.5);
        std::uniform_int_distribution<int> kd(1, m);
        const int k = kd(rng);

        const auto tr = symfun::newton_trace_check(A, k);
        worst_trace =
            std::max(worst_trace, tr.abs_err / (1.0 + std::abs(tr.references.at(0))));

        const SymMatrix grad = symfun::sigma_gradient(A, k);
        const double eps = 1e-5;
        for (int i = 0; i < m; ++i) {
            for (int j = i; j < m; ++j) {
                Eigen::MatrixXd bump = Eigen::MatrixXd::Zero(m, m);
                bump(i, j) = 1.0;
                bump(j, i) = 1.0;
                const double sp = symfun::sigma(SymMatrix::from_dense(A.dense() + eps * bump), k);
                const double sm = symfun::sigma(SymMatrix::from_dense(A.dense() - eps * bump), k);
                const double fd = (sp - sm) / (2.0 * eps);
                const double exact = (i == j) ? grad(i, i) : 2.0 * grad(i, j);
                worst_fd = std::max(worst_fd, std::abs(fd - exact) / (1.0 + std::abs(exact)));
            }
        }
    }
    CriterionResult r;
    r.index = 8;
    r.name = "symfun-invariants";
    r.worst = std::max(worst_trace / 1e-10, worst_fd / 1e-7);
    r.tol = 1.0;
    r.wall_ms = timer.ms();
    r.pass = r.worst <= r.tol;
    r.detail = "worst trace deviation = " + detail::fmt(worst_trace) +
               ", worst FD deviation = " + detail::fmt(worst_fd);
    return r;
}

/// The reconciliation report reproduces its frozen sample values exactly and
/// identically across repeated evaluation.
inline CriterionResult criterion_9(unsigned seed) {
    detail::Timer timer;
    (void)seed;
    const auto a = liouville::theorem_constraint_report(4, 2, 1.0);
    const auto b = liouville::theorem_constraint_report(4, 2, 1.0);
    double worst = 0.0;
    worst = std::max(worst, std::abs(a.lhs_display - 5.5));
    worst = std::max(worst, std::abs(a.c0_direct - 7.0));
    worst = std::max(worst, std::abs(a.rhs_display - 5.25));
    const bool identical = a.lhs_display == b.lhs_display && a.c0_direct == b.c0_direct &&
                           a.rhs_display == b.rhs_display && a.ratio == b.ratio &&
                           a.lhs_alternative == b.lhs_alternative;
    CriterionResult r;
    r.index = 9;
    r.name = "reconciliation-report";
    r.worst = worst;
    r.tol = 0.0;
    r.wall_ms = timer.ms();
    r.pass = worst == 0.0 && identical;
    r.detail = "emits 5.5 / 7 / 5.25 exactly; repeat evaluation bit-identical";
    return r;
}

/// Ball version of the certified profile at unit diameter.
inline CriterionResult criterion_10(unsigned seed) {
    detail::Timer timer;
    Eigen::VectorXd center(4);
    center << 0, 0, 0, -1;
    const auto rep = liouville::verify_corollary_ball({4, 0.25, center}, 2, 0.5, 100, seed);
    CriterionResult r;
    r.index = 10;
    r.name = "ball-corollary";
    r.worst = rep.abs_err;
    r.tol = 1.0;
    r.wall_ms = timer.ms();
    r.pass = rep.pass;
    r.detail = "sigma " + detail::fmt(rep.values.at(0)) + " (tol 1e-6), constancy " +
               detail::fmt(rep.values.at(1)) + " (tol 1e-8), fit " +
               detail::fmt(rep.values.at(2)) + " (tol 1e-8)";
    return r;
}

inline std::vector<CriterionResult> run_all(unsigned seed = 0) {
    return {criterion_1(seed), criterion_2(seed), criterion_3(seed), criterion_4(seed),
            criterion_5(seed), criterion_6(seed), criterion_7(seed), criterion_8(seed),
            criterion_9(seed), criterion_10(seed)};
}

}  // namespace conflab::acceptance
