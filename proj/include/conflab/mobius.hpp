#pragma once

// Sphere inversions of the half space and everything built on them: the
// curvature invariance checks, the half-space-to-ball transform, the
// asymptotic mass alpha, and the moving-spheres critical radius with its
// grid certificate.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "conflab/boundary.hpp"
#include "conflab/common.hpp"
#include "conflab/conformal.hpp"
#include "conflab/fields.hpp"
#include "conflab/symfun.hpp"

namespace conflab::mobius {

/// Worker cap for grid sweeps, from CONFLAB_THREADS (clamped to [1, 64]).
inline int sweep_threads() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    int cap = std::min(hw, 8);
    if (const char* env = std::getenv("CONFLAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) cap = static_cast<int>(std::min(v, 64L));
    }
    return cap;
}

/// Inversion about a sphere centered on the boundary hyperplane; maps the
/// half space to itself.
struct MobiusInversion {
    Eigen::VectorXd center;
    double lambda = 1.0;
};

/// General sphere inversion of a point (no boundary constraint on `center`).
inline Eigen::VectorXd invert_point(const Eigen::VectorXd& center, double lambda,
                                    const Eigen::VectorXd& y) {
    if (y.size() != center.size()) throw DomainError("inversion: point dimension mismatch");
    const Eigen::VectorXd d = y - center;
    const double r2 = d.squaredNorm();
    if (std::sqrt(r2) <= fields::kSingularRadius)
        throw DomainError("inversion: point coincides with the center");
    return center + (lambda * lambda / r2) * d;
}

inline MobiusInversion make_inversion(Eigen::VectorXd center, double lambda) {
    if (center.size() < 3) throw DomainError("inversion: dimension must be at least 3");
    conformal::require_boundary(center);
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw DomainError("inversion: radius must be positive");
    return MobiusInversion{std::move(center), lambda};
}

inline Eigen::VectorXd apply_inversion(const MobiusInversion& m, const Eigen::VectorXd& y) {
    return invert_point(m.center, m.lambda, y);
}

namespace detail {

inline double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

struct InvarianceWorst {
    double lhs = 0.0;
    double rhs = 0.0;
    double scaled = 0.0;  // |lhs-rhs| / (1 + |rhs|)
};

}  // namespace detail

/// Pointwise identity sigma_k(A of the reflected factor)(y) =
/// sigma_k(A of u)(reflected y) over interior sample points.
inline CheckReport invariance_check_sigma(const fields::ScalarField& u, const MobiusInversion& m,
                                          const std::vector<Eigen::VectorXd>& pts, int k) {
    if (pts.empty()) throw DomainError("invariance check: no sample points");
    const fields::ScalarField uk = fields::kelvin_field(u, m.center, m.lambda);
    detail::InvarianceWorst worst;
    for (const auto& y : pts) {
        const double lhs = conformal::sigma_k_curvature(uk, y, k);
        const double rhs = conformal::sigma_k_curvature(u, apply_inversion(m, y), k);
        const double scaled = std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
        if (scaled >= worst.scaled) worst = {lhs, rhs, scaled};
    }
    CheckReport rep;
    rep.name = "sigma-invariance";
    rep.values = {worst.lhs};
    rep.references = {worst.rhs};
    rep.abs_err = std::abs(worst.lhs - worst.rhs);
    rep.tol = 1e-6 * (1.0 + std::abs(worst.rhs));
    rep.pass = worst.scaled <= 1e-6;
    std::ostringstream note;
    note << pts.size() << " interior points";
    rep.note = note.str();
    return rep;
}

/// Same identity for the boundary curvature over boundary sample points.
inline CheckReport invariance_check_bk(const fields::ScalarField& u, const MobiusInversion& m,
                                       const std::vector<Eigen::VectorXd>& pts, int k) {
    if (pts.empty()) throw DomainError("invariance check: no sample points");
    const fields::ScalarField uk = fields::kelvin_field(u, m.center, m.lambda);
    detail::InvarianceWorst worst;
    for (const auto& y : pts) {
        const double lhs = boundary::bk_of_field(uk, y, k);
        const double rhs = boundary::bk_of_field(u, apply_inversion(m, y), k);
        const double scaled = std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
        if (scaled >= worst.scaled) worst = {lhs, rhs, scaled};
    }
    CheckReport rep;
    rep.name = "bk-invariance";
    rep.values = {worst.lhs};
    rep.references = {worst.rhs};
    rep.abs_err = std::abs(worst.lhs - worst.rhs);
    rep.tol = 1e-6 * (1.0 + std::abs(worst.rhs));
    rep.pass = worst.scaled <= 1e-6;
    std::ostringstream note;
    note << pts.size() << " boundary points";
    rep.note = note.str();
    return rep;
}

/// Conformal image of the half-space factor on the ball B_{2d}(q), where
/// p = (x0', -d), q = (x0', d) and the inversion sphere is |z - p| = 2d:
///   v(z) = (2d/|z-p|)^{n-2} u(p + 4 d^2 (z-p)/|z-p|^2).
inline fields::ScalarField halfspace_to_ball(const fields::ScalarField& u, double d,
                                             const Eigen::VectorXd& x0p) {
    const int n = u.dim();
    if (static_cast<int>(x0p.size()) != n - 1)
        throw DomainError("ball transform: base point must have dimension n-1");
    if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("ball transform: d must be positive");
    Eigen::VectorXd p(n), q(n);
    p << x0p, -d;
    q << x0p, d;
    return fields::inversion_field(u, p, 2.0 * d, std::make_pair(q, 2.0 * d));
}

/// Preimage on the half space of a ball point under the same inversion.
inline Eigen::VectorXd ball_preimage(double d, const Eigen::VectorXd& x0p,
                                     const Eigen::VectorXd& z) {
    if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("ball transform: d must be positive");
    if (z.size() != x0p.size() + 1) throw DomainError("ball transform: point dimension mismatch");
    Eigen::VectorXd p(z.size());
    p << x0p, -d;
    return invert_point(p, 2.0 * d, z);
}

/// Deterministic unit directions covering the closed upper hemisphere
/// {|v| = 1, v_n >= 0}: angle product grids for n <= 4, seeded Gaussian
/// sampling (axes included) above.
inline std::vector<Eigen::VectorXd> hemisphere_directions(int n, int count, unsigned seed) {
    if (n < 3) throw DomainError("directions: dimension must be at least 3");
    if (count < 1) throw DomainError("directions: need at least one direction");
    std::vector<Eigen::VectorXd> dirs;
    if (n == 3) {
        const int kp = std::max(2, static_cast<int>(std::lround(std::sqrt(count / 4.0))));
        for (int i = 0; i < kp; ++i) {
            const double th = 0.5 * M_PI * i / (kp - 1);
            if (i == 0) {
                dirs.push_back((Eigen::VectorXd(3) << 0, 0, 1).finished());
                continue;
            }
            const int na = 4 * kp;
            for (int j = 0; j < na; ++j) {
                const double ph = 2.0 * M_PI * j / na;
                dirs.push_back((Eigen::VectorXd(3) << std::sin(th) * std::cos(ph),
                                std::sin(th) * std::sin(ph), std::cos(th))
                                   .finished());
            }
        }
    } else if (n == 4) {
        const int c = std::max(2, static_cast<int>(std::lround(std::cbrt(count / 4.0))));
        for (int i = 0; i < c; ++i) {
            const double t1 = 0.5 * M_PI * i / (c - 1);
            if (i == 0) {
                dirs.push_back((Eigen::VectorXd(4) << 0, 0, 0, 1).finished());
                continue;
            }
            for (int j = 0; j < 2 * c; ++j) {
                const double t2 = M_PI * (j + 0.5) / (2 * c);
                for (int l = 0; l < 2 * c; ++l) {
                    const double ph = 2.0 * M_PI * l / (2 * c);
                    dirs.push_back((Eigen::VectorXd(4) << std::sin(t1) * std::sin(t2) * std::cos(ph),
                                    std::sin(t1) * std::sin(t2) * std::sin(ph),
                                    std::sin(t1) * std::cos(t2), std::cos(t1))
                                       .finished());
                }
            }
        }
    } else {
        Eigen::VectorXd pole = Eigen::VectorXd::Zero(n);
        pole[n - 1] = 1.0;
        dirs.push_back(pole);
        for (int a = 0; a + 1 < n && static_cast<int>(dirs.size()) < count; ++a) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
            e[a] = 1.0;
            dirs.push_back(e);
            if (static_cast<int>(dirs.size()) < count) dirs.push_back(-e);
        }
        std::mt19937 rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        while (static_cast<int>(dirs.size()) < count) {
            Eigen::VectorXd v(n);
            for (int i = 0; i < n; ++i) v[i] = g(rng);
            const double norm = v.norm();
            if (norm < 1e-8) continue;
            v /= norm;
            v[n - 1] = std::abs(v[n - 1]);
            dirs.push_back(v);
        }
    }
    return dirs;
}

namespace detail {

struct AlphaPair {
    double m1 = 0.0;  // hemisphere minimum of |y|^{n-2} u at the second-largest radius
    double m2 = 0.0;  // same at the largest radius
    double alpha = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
};

inline AlphaPair alpha_pair(const fields::ScalarField& u, const std::vector<double>& radii) {
    if (radii.size() < 2) throw DomainError("alpha estimate: need at least two radii");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] >= 1.0) || !std::isfinite(radii[i]))
            throw DomainError("alpha estimate: radii must be finite and at least 1");
        if (i > 0 && !(radii[i] > radii[i - 1]))
            throw DomainError("alpha estimate: radii must be strictly increasing");
    }
    const int n = u.dim();
    const auto dirs = hemisphere_directions(n, 2 * n * 32, 0);
    auto hemisphere_min = [&](double r) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& v : dirs) m = std::min(m, ipow(r, n - 2) * u.value(r * v));
        return m;
    };
    AlphaPair out;
    out.r1 = radii[radii.size() - 2];
    out.r2 = radii.back();
    out.m1 = hemisphere_min(out.r1);
    out.m2 = hemisphere_min(out.r2);
    // Two-point Richardson extrapolation in 1/R.
    out.alpha = out.m2 + (out.m2 - out.m1) * out.r1 / (out.r2 - out.r1);
    return out;
}

}  // namespace detail

/// Asymptotic mass: the liminf of |y|^{n-2} u over the half space, estimated
/// as the hemisphere minimum at the largest radii with a two-point Richardson
/// extrapolation in 1/R.
inline double alpha_estimate(const fields::ScalarField& u, const std::vector<double>& radii) {
    return detail::alpha_pair(u, radii).alpha;
}

/// Closed-form asymptotic mass of a bubble: b^{-(n-2)/4}.
inline double bubble_alpha(const fields::BubbleParams& p) {
    return std::pow(p.b, -0.25 * (p.n - 2));
}

/// Radial/angular grid for the moving-spheres sweep.
struct GridSpec {
    int shells = 64;
    double r_far_factor = 1e3;
    int angular = 32;
    unsigned seed = 0;
};

/// Outcome of one feasibility sweep at a fixed radius.
struct FeasibilityProbe {
    bool feasible = false;
    double margin = 0.0;          // min(u - reflected u) over the grid
    bool tail_ok = true;          // far-field certificate
    Eigen::VectorXd violation;    // first grid violation (empty if tail-only)
    double violation_gap = 0.0;   // size of that violation
};

namespace detail {

inline void validate_grid(const GridSpec& g) {
    if (g.shells < 2) throw DomainError("grid: need at least two radial shells");
    if (g.angular < 1) throw DomainError("grid: need at least one angular sample");
    if (!(g.r_far_factor >= 10.0) || !std::isfinite(g.r_far_factor))
        throw DomainError("grid: far-field factor must be at least 10");
}

}  // namespace detail

/// Checks u_{x,lambda} <= u + 1e-12 on the log-radial x angular grid out to
/// r_far_factor * lambda, with the tail certified by comparing the reflected
/// supremum against the power-law lower barrier of u at the far shell.
inline FeasibilityProbe lambda_bar_feasible(const fields::ScalarField& u, const Eigen::VectorXd& x,
                                            double lambda, const GridSpec& grid) {
    conformal::require_boundary(x);
    detail::validate_grid(grid);
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw DomainError("moving spheres: radius must be positive");
    const int n = u.dim();
    const auto dirs = hemisphere_directions(n, 2 * n * grid.angular, grid.seed);
    const double slack = 1e-12;
    const double r_far = grid.r_far_factor * lambda;

    struct ShellOutcome {
        double margin = std::numeric_limits<double>::infinity();
        int violation_dir = -1;
        double gap = 0.0;
        double min_u = std::numeric_limits<double>::infinity();
    };
    std::vector<ShellOutcome> shells(static_cast<std::size_t>(grid.shells));

    auto do_shell = [&](int j) {
        ShellOutcome out;
        const double rho = lambda * std::pow(grid.r_far_factor, static_cast<double>(j) / (grid.shells - 1));
        const double pref = std::pow(lambda / rho, static_cast<double>(n - 2));
        const double rim = lambda * lambda / rho;
        for (std::size_t di = 0; di < dirs.size(); ++di) {
            const Eigen::VectorXd& v = dirs[di];
            const double rhs = u.value(x + rho * v);
            const double lhs = pref * u.value(x + rim * v);
            out.margin = std::min(out.margin, rhs - lhs);
            out.min_u = std::min(out.min_u, rhs);
            if (lhs > rhs + slack && out.violation_dir < 0) {
                out.violation_dir = static_cast<int>(di);
                out.gap = lhs - rhs;
            }
        }
        return out;
    };

    const int threads = std::min(sweep_threads(), grid.shells);
    if (threads <= 1) {
        for (int j = 0; j < grid.shells; ++j) shells[static_cast<std::size_t>(j)] = do_shell(j);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t]() {
                try {
                    for (int j = t; j < grid.shells; j += threads)
                        shells[static_cast<std::size_t>(j)] = do_shell(j);
                } catch (...) {
                    errors[static_cast<std::size_t>(t)] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    FeasibilityProbe probe;
    probe.margin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid.shells; ++j) {
        const auto& s = shells[static_cast<std::size_t>(j)];
        probe.margin = std::min(probe.margin, s.margin);
        if (s.violation_dir >= 0 && probe.violation.size() == 0) {
            const double rho =
                lambda * std::pow(grid.r_far_factor, static_cast<double>(j) / (grid.shells - 1));
            probe.violation = x + rho * dirs[static_cast<std::size_t>(s.violation_dir)];
            probe.violation_gap = s.gap;
        }
    }

    // Far tail: beyond r_far, the reflected field is controlled by the
    // supremum over the small half ball of radius lambda^2 / r_far, and u is
    // bounded below by its hemisphere minimum at r_far times the power decay.
    const double r_small = lambda * lambda / r_far;
    double m_small = 0.0;
    const int nr = 8;
    for (int i = 0; i < nr; ++i) {
        const double r = r_small * i / (nr - 1);
        if (i == 0) {
            m_small = std::max(m_small, u.value(x));
            continue;
        }
        for (const auto& v : dirs) m_small = std::max(m_small, u.value(x + r * v));
    }
    const double m_far = shells.back().min_u;
    const double lhs_tail = detail::ipow(lambda, n - 2) * m_small;
    const double rhs_tail = detail::ipow(r_far, n - 2) * m_far;
    probe.tail_ok = lhs_tail <= rhs_tail * (1.0 + 1e-12) + slack;

    probe.feasible = probe.violation.size() == 0 && probe.tail_ok;
    return probe;
}

/// Certificate attached to a resolved critical radius.
struct LambdaBarCertificate {
    double margin_below = 0.0;      // min(u - reflected u) at lambda_bar (1 - delta)
    bool has_failure_above = false; // infeasibility witnessed at lambda_bar (1 + delta)
    Eigen::VectorXd failure_location;  // empty when the tail certificate failed instead
    double failure_gap = 0.0;
    double delta = 0.0;
};

struct LambdaBarResult {
    Eigen::VectorXd x;
    double lambda_bar = 0.0;
    GridSpec grid;
    LambdaBarCertificate certificate;
};

/// Bisection for the moving-spheres radius
///   sup { mu : the reflection about every sphere of radius < mu stays below u }
/// to 1e-3 relative accuracy, with feasibility certified just below the
/// returned radius and infeasibility witnessed just above it.
inline LambdaBarResult lambda_bar(const fields::ScalarField& u, const Eigen::VectorXd& x,
                                  const GridSpec& grid) {
    conformal::require_boundary(x);
    detail::validate_grid(grid);
    const int n = u.dim();

    const double alpha = alpha_estimate(u, {1e2, 1e3});
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ResolutionError("moving spheres: asymptotic mass estimate unusable");
    const double lambda_scale = std::pow(alpha / u.value(x), 1.0 / (n - 2));
    if (!(lambda_scale > 0.0) || !std::isfinite(lambda_scale))
        throw ResolutionError("moving spheres: no usable radius scale");

    double lo = 0.25 * lambda_scale;
    int tries = 0;
    while (!lambda_bar_feasible(u, x, lo, grid).feasible) {
        lo *= 0.5;
        if (++tries > 40) throw ResolutionError("moving spheres: no feasible lower radius found");
    }
    double hi = 4.0 * lambda_scale;
    tries = 0;
    while (lambda_bar_feasible(u, x, hi, grid).feasible) {
        hi *= 2.0;
        if (++tries > 40)
            throw ResolutionError(
                "moving spheres: comparison stays feasible at every probed radius; "
                "the decay hypothesis is likely violated");
    }

    for (int iter = 0; iter < 80 && (hi - lo) > 1e-4 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (lambda_bar_feasible(u, x, mid, grid).feasible)
            lo = mid;
        else
            hi = mid;
    }
    const double lb = 0.5 * (lo + hi);

    const double delta = 2e-3;
    const FeasibilityProbe below = lambda_bar_feasible(u, x, lb * (1.0 - delta), grid);
    if (!below.feasible)
        throw ResolutionError(
            "moving spheres: monotone transition not certified (infeasible below the result)");
    const FeasibilityProbe above = lambda_bar_feasible(u, x, lb * (1.0 + delta), grid);
    if (above.feasible)
        throw ResolutionError(
            "moving spheres: monotone transition not certified (feasible above the result)");

    LambdaBarResult res;
    res.x = x;
    res.lambda_bar = lb;
    res.grid = grid;
    res.certificate.margin_below = below.margin;
    res.certificate.has_failure_above = true;
    res.certificate.failure_location = above.violation;
    res.certificate.failure_gap = above.violation_gap;
    res.certificate.delta = delta;
    return res;
}

/// Identity lambda_bar(x)^{n-2} u(x) = alpha at boundary points of an exact
/// solution. Fields whose tail never stabilizes are reported as outside the
/// hypotheses (informational) rather than failing.
inline CheckReport verify_lemma41(const fields::ScalarField& u,
                                  const std::vector<Eigen::VectorXd>& pts, const GridSpec& grid) {
    if (pts.empty()) throw DomainError("radius-mass identity: no sample points");
    const int n = u.dim();
    const auto ap = detail::alpha_pair(u, {1e2, 1e3});
    const double drift = std::abs(ap.m1 - ap.m2) / std::max(std::abs(ap.m2), 1e-12);

    CheckReport rep;
    rep.name = "radius-mass-identity";
    if (!(ap.alpha > 0.0) || !std::isfinite(ap.alpha) || drift > 0.2) {
        rep.informational = true;
        rep.pass = true;
        std::ostringstream note;
        note << "hypothesis violation: |y|^{n-2} u does not stabilize at the sampled radii "
             << "(drift " << drift << ")";
        rep.note = note.str();
        rep.values = {ap.alpha};
        return rep;
    }

    double worst_val = 0.0;
    double worst_err = -1.0;
    for (const auto& x : pts) {
        const double lb = lambda_bar(u, x, grid).lambda_bar;
        const double val = detail::ipow(lb, n - 2) * u.value(x);
        const double err = std::abs(val - ap.alpha);
        if (err > worst_err) {
            worst_err = err;
            worst_val = val;
        }
    }
    rep.values = {worst_val};
    rep.references = {ap.alpha};
    rep.abs_err = worst_err;
    rep.tol = 5e-3 * ap.alpha;
    rep.pass = worst_err <= rep.tol;
    std::ostringstream note;
    note << pts.size() << " boundary points";
    rep.note = note.str();
    return rep;
}

/// Fixed-point property of exact solutions: the reflection at the critical
/// radius reproduces the field on the whole grid.
inline CheckReport verify_kelvin_fixed_point(const fields::ScalarField& u, const Eigen::VectorXd& x,
                                             const GridSpec& grid) {
    conformal::require_boundary(x);
    detail::validate_grid(grid);
    const int n = u.dim();

    double lb = 0.0;
    std::string note;
    if (const auto bp = fields::as_bubble(u)) {
        lb = std::pow(bubble_alpha(*bp) / u.value(x), 1.0 / (n - 2));
        note = "closed-form critical radius";
    } else {
        try {
            lb = lambda_bar(u, x, grid).lambda_bar;
        } catch (const ResolutionError& e) {
            lb = 1.0;
            note = std::string("hypothesis violation: ") + e.what();
        }
    }

    const auto dirs = hemisphere_directions(n, 2 * n * grid.angular, grid.seed);
    double max_diff = 0.0;
    double max_u = 0.0;
    for (int j = 0; j < grid.shells; ++j) {
        const double rho =
            lb * std::pow(grid.r_far_factor, static_cast<double>(j) / (grid.shells - 1));
        const double pref = std::pow(lb / rho, static_cast<double>(n - 2));
        const double rim = lb * lb / rho;
        for (const auto& v : dirs) {
            const double uy = u.value(x + rho * v);
            const double ry = pref * u.value(x + rim * v);
            max_diff = std::max(max_diff, std::abs(ry - uy));
            max_u = std::max(max_u, uy);
        }
    }

    CheckReport rep;
    rep.name = "reflection-fixed-point";
    rep.values = {max_diff};
    rep.references = {0.0};
    rep.abs_err = max_diff;
    rep.tol = 1e-6 * max_u;
    rep.pass = max_diff <= rep.tol;
    rep.note = note;
    return rep;
}

}  // namespace conflab::mobius
