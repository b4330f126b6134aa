#pragma once

// Elementary symmetric functions of symmetric-matrix eigenvalues, their
// matrix gradients (Newton tensors), cone classification, and the exact
// rational boundary-coefficient combinatorics.
//
// sigma_k is evaluated by the Faddeev-LeVerrier trace recursion
//     T_0 = I,  sigma_j = trace(A T_{j-1}) / j,  T_j = sigma_j I - A T_{j-1},
// which yields every sigma_j and Newton tensor in one sweep and avoids
// eigendecomposition entirely.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "conflab/common.hpp"
#include "conflab/symmat.hpp"

namespace conflab::symfun {

/// n! as a checked 64-bit integer. n < 0 or overflow -> DomainError.
inline std::int64_t checked_factorial(int n) {
    if (n < 0) throw DomainError("factorial of negative integer");
    std::int64_t r = 1;
    for (int i = 2; i <= n; ++i) {
        if (__builtin_mul_overflow(r, static_cast<std::int64_t>(i), &r))
            throw DomainError("factorial overflows 64-bit integer");
    }
    return r;
}

/// n!! with the conventions (-1)!! = 0!! = 1. n < -1 or overflow -> DomainError.
inline std::int64_t checked_double_factorial(int n) {
    if (n < -1) throw DomainError("double factorial below -1");
    std::int64_t r = 1;
    for (int i = n; i >= 2; i -= 2) {
        if (__builtin_mul_overflow(r, static_cast<std::int64_t>(i), &r))
            throw DomainError("double factorial overflows 64-bit integer");
    }
    return r;
}

/// Exact reduced fraction with 64-bit parts.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline Rational make_rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw DomainError("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational{num, den};
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw DomainError("rational coefficient overflows 64-bit integer");
    return r;
}

/// Boundary-operator combinatorial constant
///   C(n,k,i) = (2k-i-1)! (n-2k+i)! / ((n-k)! (2k-2i-1)!! i!)
/// carried exactly. Requires n >= 2k, k >= 1, 0 <= i <= k.
inline Rational coefficient_C(int n, int k, int i) {
    if (k < 1) throw DomainError("coefficient_C: k must be positive");
    if (n < 2 * k) throw DomainError("coefficient_C: requires n >= 2k");
    if (i < 0 || i > k) throw DomainError("coefficient_C: index i outside [0, k]");
    const std::int64_t num = checked_mul(checked_factorial(2 * k - i - 1), checked_factorial(n - 2 * k + i));
    std::int64_t den = checked_mul(checked_factorial(n - k), checked_double_factorial(2 * k - 2 * i - 1));
    den = checked_mul(den, checked_factorial(i));
    return make_rational(num, den);
}

/// sigma_0..sigma_kmax together with the Newton tensors T_0..T_{kmax-1},
/// where T_{j-1} = d sigma_j / dA.
struct SigmaChain {
    std::vector<double> sigma;      // size kmax + 1
    std::vector<SymMatrix> newton;  // size kmax, newton[j] = T_j
};

inline SigmaChain sigma_chain(const SymMatrix& A, int kmax) {
    const int m = A.dim();
    if (kmax < 0 || kmax > m) throw DomainError("sigma: degree outside [0, dim]");
    if (!A.all_finite()) throw DomainError("sigma: matrix has non-finite entries");
    SigmaChain out;
    out.sigma.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
    out.sigma[0] = 1.0;
    if (kmax == 0) return out;
    const Eigen::MatrixXd D = A.dense();
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(m, m);
    out.newton.reserve(kmax);
    out.newton.push_back(SymMatrix::identity(m));
    for (int j = 1; j <= kmax; ++j) {
        const Eigen::MatrixXd P = D * T;
        out.sigma[j] = P.trace() / j;
        if (j < kmax) {
            T = out.sigma[j] * Eigen::MatrixXd::Identity(m, m) - P;
            T = 0.5 * (T + T.transpose()).eval();  // P commutes with D; kill rounding skew
            out.newton.push_back(SymMatrix::from_dense(T));
        }
    }
    return out;
}

/// k-th elementary symmetric function of the eigenvalues of A.
inline double sigma(const SymMatrix& A, int k) { return sigma_chain(A, k).sigma[static_cast<std::size_t>(k)]; }

/// Matrix gradient d sigma_k / dA, i.e. the Newton tensor T_{k-1}(A).
/// Entry (i,j) is the derivative with respect to the (i,j) slot treated as
/// independent; symmetric perturbations therefore pick up both mirrored slots.
inline SymMatrix sigma_gradient(const SymMatrix& A, int k) {
    if (k < 1 || k > A.dim()) throw DomainError("sigma_gradient: degree outside [1, dim]");
    return sigma_chain(A, k).newton[static_cast<std::size_t>(k) - 1];
}

/// Largest k such that sigma_1, ..., sigma_k are all strictly positive
/// (the Garding cone membership order); 0 if sigma_1 <= 0.
inline int cone_classify(const SymMatrix& A) {
    const SigmaChain ch = sigma_chain(A, A.dim());
    int k = 0;
    while (k < A.dim() && ch.sigma[static_cast<std::size_t>(k) + 1] > 0.0) ++k;
    return k;
}

/// Verifies trace(d sigma_s / dA) = (m - s + 1) sigma_{s-1} on an m x m input.
inline CheckReport newton_trace_check(const SymMatrix& A, int s) {
    if (s < 1 || s > A.dim()) throw DomainError("newton_trace_check: degree outside [1, dim]");
    const SigmaChain ch = sigma_chain(A, s);
    const double lhs = ch.newton[static_cast<std::size_t>(s) - 1].trace();
    const double rhs = (A.dim() - s + 1) * ch.sigma[static_cast<std::size_t>(s) - 1];
    CheckReport rep;
    rep.name = "newton-trace";
    rep.values = {lhs};
    rep.references = {rhs};
    rep.abs_err = std::abs(lhs - rhs);
    rep.tol = 1e-10 * (1.0 + std::abs(rhs));
    rep.pass = rep.abs_err <= rep.tol;
    return rep;
}

}  // namespace conflab::symfun
