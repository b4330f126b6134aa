#pragma once

// Fully nonlinear boundary curvature on an umbilic flat boundary: the closed
// polynomial form in the tangential Schouten tensor and the mean curvature,
// its exact h-derivative, root solving for prescribed values, and the exact
// integral linearization coefficients between two conformal factors.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "conflab/common.hpp"
#include "conflab/conformal.hpp"
#include "conflab/fields.hpp"
#include "conflab/quadrature.hpp"
#include "conflab/symfun.hpp"
#include "conflab/symmat.hpp"

namespace conflab::boundary {

/// Exact coefficient (n-1-s)! / ((n-k)! (2k-2s-1)!!) of the degree-s term.
/// Requires k >= 1, n >= 2k, 0 <= s < k.
inline symfun::Rational umbilic_coefficient(int n, int k, int s) {
    if (k < 1) throw DomainError("umbilic coefficient: k must be positive");
    if (n < 2 * k) throw DomainError("umbilic coefficient: requires n >= 2k");
    if (s < 0 || s >= k) throw DomainError("umbilic coefficient: index s outside [0, k)");
    const std::int64_t num = symfun::checked_factorial(n - 1 - s);
    const std::int64_t den = symfun::checked_mul(symfun::checked_factorial(n - k),
                                                 symfun::checked_double_factorial(2 * k - 2 * s - 1));
    return symfun::make_rational(num, den);
}

namespace detail {

inline double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

inline void require_bk_shape(int n, int k, int block_dim) {
    if (k < 1) throw DomainError("boundary curvature: k must be positive");
    if (n < 2 * k) throw DomainError("boundary curvature: requires n >= 2k");
    if (block_dim != n - 1) throw DomainError("boundary curvature: tangential block must be (n-1) x (n-1)");
}

}  // namespace detail

/// B_k on an umbilic boundary:
///   B_k = sum_{s=0}^{k-1} c(n,k,s) sigma_s(A^T) h^{2k-2s-1},  sigma_0 = 1.
inline double bk_umbilic(int n, int k, const SymMatrix& a_tangential, double h) {
    detail::require_bk_shape(n, k, a_tangential.dim());
    if (!std::isfinite(h)) throw DomainError("boundary curvature: non-finite mean curvature");
    const auto chain = symfun::sigma_chain(a_tangential, k - 1);
    double acc = 0.0;
    for (int s = 0; s < k; ++s)
        acc += umbilic_coefficient(n, k, s).value() * chain.sigma[static_cast<std::size_t>(s)] *
               detail::ipow(h, 2 * k - 2 * s - 1);
    return acc;
}

/// B_k of a conformal factor at a boundary point.
inline double bk_of_field(const fields::ScalarField& u, const Eigen::VectorXd& x, int k) {
    const auto bj = conformal::boundary_jet(u, x);
    return bk_umbilic(u.dim(), k, bj.a_tangential, bj.h);
}

/// d B_k / dh at fixed full tensor M, where the tangential tensor rides along
/// as A^T(h) = M - h^2/2 I. The sum telescopes to sigma_{k-1}(A^T(h)).
inline double bk_h_derivative(const SymMatrix& M, double h, int n, int k) {
    detail::require_bk_shape(n, k, M.dim());
    if (k == 1) return 1.0;
    const SymMatrix at = M - SymMatrix::scaled_identity(n - 1, 0.5 * h * h);
    return symfun::sigma(at, k - 1);
}

/// Finite-difference confirmation of the h-derivative identity above.
inline CheckReport bk_h_derivative_check(const SymMatrix& M, double h, int n, int k) {
    detail::require_bk_shape(n, k, M.dim());
    const double exact = bk_h_derivative(M, h, n, k);
    auto b_of_h = [&](double t) {
        const SymMatrix at = M - SymMatrix::scaled_identity(n - 1, 0.5 * t * t);
        return bk_umbilic(n, k, at, t);
    };
    const double step = 1e-5 * (1.0 + std::abs(h));
    const double coarse = (b_of_h(h + step) - b_of_h(h - step)) / (2.0 * step);
    const double fine = (b_of_h(h + 0.5 * step) - b_of_h(h - 0.5 * step)) / step;
    const double fd = (4.0 * fine - coarse) / 3.0;
    CheckReport rep;
    rep.name = "bk-h-derivative";
    rep.values = {fd};
    rep.references = {exact};
    rep.abs_err = std::abs(fd - exact);
    rep.tol = 1e-6 * (1.0 + std::abs(exact));
    rep.pass = rep.abs_err <= rep.tol;
    return rep;
}

enum class SolveHMode {
    FixedTangential,  // the tangential tensor is held fixed while h varies
    FixedM            // A^T(h) = M - h^2/2 I rides along with h
};

namespace detail {

// Largest-root bracket for the fixed-tangential polynomial: beyond this the
// leading pure-h term alone exceeds c0.
inline double fixed_tangential_bracket(int n, int k, double c0) {
    const double lead = umbilic_coefficient(n, k, 0).value();
    return std::max(1.0, std::pow(c0 / lead, 1.0 / (2 * k - 1)) + 1.0);
}

template <typename F>
double bisect_increasing(F&& f, double lo, double hi, double target) {
    double flo = f(lo) - target;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid) - target;
        if ((flo <= 0.0) == (fm <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Solves B_k(h) = c0 for h >= 0. In FixedTangential mode `mat` is the
/// tangential tensor itself (requires sigma_1..sigma_{k-1}(mat) >= 0, making
/// B_k strictly increasing on h >= 0). In FixedM mode `mat` is the full
/// tensor M with A^T(h) = M - h^2/2 I, the admissible range is the connected
/// component of {sigma_{k-1}(A^T(h)) > 0} containing 0, and a target beyond
/// the supremum of B_k there raises NoRootError carrying that supremum.
inline double solve_h(SolveHMode mode, const SymMatrix& mat, int n, int k, double c0) {
    detail::require_bk_shape(n, k, mat.dim());
    if (!(c0 > 0.0)) throw DomainError("solve_h: target must be positive");

    if (mode == SolveHMode::FixedTangential) {
        const auto chain = symfun::sigma_chain(mat, k - 1);
        for (int s = 1; s < k; ++s)
            if (chain.sigma[static_cast<std::size_t>(s)] < 0.0)
                throw DomainError("solve_h: tangential tensor has a negative sigma prefix");
        auto b = [&](double h) { return bk_umbilic(n, k, mat, h); };
        const double hi = detail::fixed_tangential_bracket(n, k, c0);
        double h = detail::bisect_increasing(b, 0.0, hi, c0);
        // Newton polish on the strictly increasing polynomial.
        for (int iter = 0; iter < 8; ++iter) {
            double deriv = 0.0;
            for (int s = 0; s < k; ++s) {
                const int p = 2 * k - 2 * s - 1;
                deriv += umbilic_coefficient(n, k, s).value() *
                         chain.sigma[static_cast<std::size_t>(s)] * p * detail::ipow(h, p - 1);
            }
            if (!(deriv > 0.0)) break;
            const double step = (b(h) - c0) / deriv;
            h -= step;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(h))) break;
        }
        return h;
    }

    // FixedM mode.
    if (k == 1) return c0;  // B_1 = h regardless of M
    auto sigma_top = [&](double h) { return bk_h_derivative(mat, h, n, k); };
    auto b = [&](double h) {
        const SymMatrix at = mat - SymMatrix::scaled_identity(n - 1, 0.5 * h * h);
        return bk_umbilic(n, k, at, h);
    };
    if (!(sigma_top(0.0) > 0.0))
        throw DomainError("solve_h: sigma_{k-1} of M is not positive at h = 0");

    // Locate the admissible edge of the component containing h = 0.
    const double cap = 1e6;
    double h_edge = cap;
    double probe = 1.0;
    double last_good = 0.0;
    while (probe <= cap) {
        if (sigma_top(probe) <= 0.0) {
            double lo = last_good;
            double hi = probe;
            for (int iter = 0; iter < 200; ++iter) {
                const double mid = 0.5 * (lo + hi);
                if (sigma_top(mid) > 0.0)
                    lo = mid;
                else
                    hi = mid;
                if (hi - lo < 1e-14 * (1.0 + hi)) break;
            }
            h_edge = lo;
            break;
        }
        last_good = probe;
        probe *= 2.0;
    }

    const double sup = b(h_edge);
    if (sup < c0) {
        std::ostringstream msg;
        msg << "solve_h: target " << c0 << " exceeds the admissible supremum " << sup;
        throw NoRootError(msg.str(), sup);
    }
    double h = detail::bisect_increasing(b, 0.0, h_edge, c0);
    // Newton polish using the exact derivative sigma_{k-1}(A^T(h)).
    for (int iter = 0; iter < 8; ++iter) {
        const double deriv = sigma_top(h);
        if (!(deriv > 0.0)) break;
        const double step = (b(h) - c0) / deriv;
        const double next = h - step;
        if (next < 0.0 || next > h_edge) break;
        h = next;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(h))) break;
    }
    return h;
}

/// Exact linearization coefficients between two conformal factors at a
/// boundary point, as integrals over the straight jet blend
/// u_t = (1-t) u0 + t u1:
///   a_ab = (2/(n-2)) int u_t^{-(n+2)/(n-2)}
///            sum_{s=1}^{k-1} c(n,k,s) h_t^{2k-2s-1} (T_{s-1}(A^T_t))_ab dt
///   b_n  = (2/(n-2)) int u_t^{-n/(n-2)} sigma_{k-1}(A^T_t) dt
/// With these, B_k(u1) - B_k(u0) = -sum a_ab psi_ab - b_n psi_n holds exactly
/// for jet differences psi whose remaining channels vanish.
struct LinearizationCoeffs {
    SymMatrix a;
    double b_n = 0.0;
    int nodes = 0;
};

inline LinearizationCoeffs linearization_coeffs(const fields::ScalarField& u0,
                                                const fields::ScalarField& u1,
                                                const Eigen::VectorXd& x, int k, int nodes = 64) {
    const int n = u0.dim();
    if (u1.dim() != n) throw DomainError("linearization: factor dimensions differ");
    detail::require_bk_shape(n, k, n - 1);
    conformal::require_boundary(x);
    if (nodes < 1) throw DomainError("linearization: need at least one quadrature node");

    const fields::FieldJet j0 = u0.jet(x);
    const fields::FieldJet j1 = u1.jet(x);
    const auto rule = quadrature::gauss_legendre_01(nodes);

    LinearizationCoeffs out;
    out.a = SymMatrix(n - 1);
    out.nodes = nodes;
    const double c1 = 2.0 / (n - 2);
    for (auto [t, w] : rule) {
        fields::FieldJet jt;
        jt.value = (1.0 - t) * j0.value + t * j1.value;
        jt.gradient = (1.0 - t) * j0.gradient + t * j1.gradient;
        jt.hessian = (1.0 - t) * j0.hessian + t * j1.hessian;
        if (jt.value <= 0.0) throw DomainError("linearization: blended factor is not positive");
        const SymMatrix at = conformal::tangential_from_jet(jt, n);
        const double h = conformal::mean_curvature_from_jet(jt, n);
        const auto chain = symfun::sigma_chain(at, k - 1);
        const double pa = std::pow(jt.value, -(n + 2.0) / (n - 2.0));
        const double pb = std::pow(jt.value, -static_cast<double>(n) / (n - 2));
        for (int s = 1; s < k; ++s) {
            const double cs = umbilic_coefficient(n, k, s).value() *
                              detail::ipow(h, 2 * k - 2 * s - 1) * c1 * pa * w;
            out.a += cs * chain.newton[static_cast<std::size_t>(s) - 1];
        }
        out.b_n += w * c1 * pb * chain.sigma[static_cast<std::size_t>(k) - 1];
    }
    return out;
}

/// Confirms the exact linearization identity for a jet difference psi that
/// fits one of the two supported vanishing patterns:
///   normal pattern:     psi, tangential gradient, tangential hessian all 0;
///                       difference = -b_n psi_n
///   tangential pattern: psi and the full gradient 0;
///                       difference = -sum_ab a_ab psi_ab
/// Channels outside the detected pattern must vanish to 1e-12, else
/// PreconditionError.
inline CheckReport verify_linearization(const fields::ScalarField& u0,
                                        const fields::ScalarField& u1, const Eigen::VectorXd& x,
                                        int k, int nodes = 64) {
    const int n = u0.dim();
    if (u1.dim() != n) throw DomainError("linearization: factor dimensions differ");
    conformal::require_boundary(x);

    const fields::FieldJet j0 = u0.jet(x);
    const fields::FieldJet j1 = u1.jet(x);
    const double psi_value = j1.value - j0.value;
    const Eigen::VectorXd psi_grad = j1.gradient - j0.gradient;
    const SymMatrix psi_hess = j1.hessian - j0.hessian;

    const double gate = 1e-12;
    if (std::abs(psi_value) > gate)
        throw PreconditionError("linearization: perturbation value does not vanish at the point");
    double tan_grad = 0.0;
    for (int a = 0; a + 1 < n; ++a) tan_grad = std::max(tan_grad, std::abs(psi_grad[a]));
    if (tan_grad > gate)
        throw PreconditionError("linearization: tangential gradient of the perturbation survives");
    double tan_hess = 0.0;
    for (int a = 0; a + 1 < n; ++a)
        for (int b = a; b + 1 < n; ++b) tan_hess = std::max(tan_hess, std::abs(psi_hess(a, b)));
    const double psi_n = psi_grad[n - 1];

    const bool normal_pattern = tan_hess <= gate;
    const bool tangential_pattern = std::abs(psi_n) <= gate;
    if (!normal_pattern && !tangential_pattern)
        throw PreconditionError("linearization: perturbation fits neither vanishing pattern");

    const auto lc = linearization_coeffs(u0, u1, x, k, nodes);
    double predicted = 0.0;
    std::string pattern;
    if (normal_pattern) {
        predicted = -lc.b_n * psi_n;
        pattern = "normal-derivative channel";
    } else {
        for (int a = 0; a + 1 < n; ++a)
            for (int b = 0; b + 1 < n; ++b) predicted -= lc.a(a, b) * psi_hess(a, b);
        pattern = "tangential-hessian channel";
    }

    const double diff = bk_of_field(u1, x, k) - bk_of_field(u0, x, k);
    CheckReport rep;
    rep.name = "linearization-identity";
    rep.values = {diff};
    rep.references = {predicted};
    rep.abs_err = std::abs(diff - predicted);
    rep.tol = 1e-8 * (1.0 + std::abs(predicted));
    rep.pass = rep.abs_err <= rep.tol;
    rep.note = pattern;
    return rep;
}

/// Ellipticity of the boundary operator at a point: when the Schouten tensor
/// sits in the order-k cone, the tangential coefficient block must be
/// positive-definite (vacuous for k = 1), the normal coefficient positive,
/// and the curvature must carry the sign of h. Outside the cone the report
/// is informational.
inline CheckReport ellipticity_report(const fields::ScalarField& u, const Eigen::VectorXd& x,
                                      int k) {
    const int n = u.dim();
    detail::require_bk_shape(n, k, n - 1);
    conformal::require_boundary(x);

    CheckReport rep;
    rep.name = "boundary-ellipticity";
    const SymMatrix A = conformal::schouten(u, x);
    const int cone = symfun::cone_classify(A);
    if (cone < k) {
        rep.informational = true;
        rep.pass = true;
        std::ostringstream note;
        note << "not applicable: Schouten tensor has cone order " << cone << " < " << k;
        rep.note = note.str();
        return rep;
    }

    const auto lc = linearization_coeffs(u, u, x, k);
    double min_eig = 0.0;
    if (k > 1) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lc.a.dense());
        min_eig = es.eigenvalues().minCoeff();
    }
    const double bk = bk_of_field(u, x, k);
    const double h = conformal::mean_curvature(u, x);
    const bool sign_ok = (std::abs(h) <= 1e-14 && std::abs(bk) <= 1e-14) || (bk * h > 0.0);
    rep.values = {min_eig, lc.b_n, bk, h};
    rep.references = {0.0, 0.0, 0.0, 0.0};
    rep.abs_err = 0.0;
    rep.tol = 0.0;
    rep.pass = (k == 1 || min_eig > 0.0) && lc.b_n > 0.0 && sign_ok;
    rep.note = (k == 1) ? "k = 1 has no tangential second-order part"
                        : "tangential block eigenvalue floor, normal coefficient, curvature, h";
    return rep;
}

}  // namespace conflab::boundary
