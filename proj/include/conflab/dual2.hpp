#pragma once

// Second-order forward-mode jets: value, gradient, and Hessian propagated
// together through arithmetic. One evaluation yields exact derivatives; no
// finite differencing is involved anywhere on this path.

#include <Eigen/Dense>

#include <cmath>

#include "conflab/common.hpp"
#include "conflab/symmat.hpp"

namespace conflab {

struct Jet2 {
    double v = 0.0;
    Eigen::VectorXd g;
    SymMatrix h;

    Jet2() = default;
    Jet2(int n, double value) : v(value), g(Eigen::VectorXd::Zero(n)), h(n) {}

    static Jet2 constant(int n, double c) { return Jet2(n, c); }

    static Jet2 variable(int n, int i, double x) {
        Jet2 j(n, x);
        j.g[i] = 1.0;
        return j;
    }

    int dim() const { return static_cast<int>(g.size()); }
};

/// x x^T as a SymMatrix.
inline SymMatrix jet_outer(const Eigen::VectorXd& x) {
    SymMatrix M(static_cast<int>(x.size()));
    for (int i = 0; i < M.dim(); ++i)
        for (int j = i; j < M.dim(); ++j) M.set(i, j, x[i] * x[j]);
    return M;
}

/// x y^T + y x^T as a SymMatrix.
inline SymMatrix jet_sym_outer(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    SymMatrix M(static_cast<int>(x.size()));
    for (int i = 0; i < M.dim(); ++i)
        for (int j = i; j < M.dim(); ++j) M.set(i, j, x[i] * y[j] + x[j] * y[i]);
    return M;
}

inline Jet2 operator-(const Jet2& a) {
    Jet2 r = a;
    r.v = -r.v;
    r.g = -r.g;
    r.h *= -1.0;
    return r;
}

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
    Jet2 r = a;
    r.v += b.v;
    r.g += b.g;
    r.h += b.h;
    return r;
}
inline Jet2 operator+(const Jet2& a, double c) {
    Jet2 r = a;
    r.v += c;
    return r;
}
inline Jet2 operator+(double c, const Jet2& a) { return a + c; }

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
    Jet2 r = a;
    r.v -= b.v;
    r.g -= b.g;
    r.h -= b.h;
    return r;
}
inline Jet2 operator-(const Jet2& a, double c) { return a + (-c); }
inline Jet2 operator-(double c, const Jet2& a) { return -a + c; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 r(a.dim(), a.v * b.v);
    r.g = a.g * b.v + b.g * a.v;
    r.h = a.h * b.v + b.h * a.v + jet_sym_outer(a.g, b.g);
    return r;
}
inline Jet2 operator*(const Jet2& a, double c) {
    Jet2 r = a;
    r.v *= c;
    r.g *= c;
    r.h *= c;
    return r;
}
inline Jet2 operator*(double c, const Jet2& a) { return a * c; }

/// Composition with a scalar function given f(a.v), f'(a.v), f''(a.v).
inline Jet2 jet_chain(const Jet2& a, double f, double fp, double fpp) {
    Jet2 r(a.dim(), f);
    r.g = fp * a.g;
    r.h = a.h * fp + jet_outer(a.g) * fpp;
    return r;
}

inline Jet2 jinv(const Jet2& a) {
    if (a.v == 0.0) throw DomainError("jet arithmetic: division by zero");
    const double iv = 1.0 / a.v;
    return jet_chain(a, iv, -iv * iv, 2.0 * iv * iv * iv);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * jinv(b); }
inline Jet2 operator/(const Jet2& a, double c) {
    if (c == 0.0) throw DomainError("jet arithmetic: division by zero");
    return a * (1.0 / c);
}
inline Jet2 operator/(double c, const Jet2& a) { return jinv(a) * c; }

inline Jet2 jexp(const Jet2& a) {
    const double e = std::exp(a.v);
    return jet_chain(a, e, e, e);
}

inline Jet2 jln(const Jet2& a) {
    if (a.v <= 0.0) throw DomainError("ln requires a positive argument");
    const double iv = 1.0 / a.v;
    return jet_chain(a, std::log(a.v), iv, -iv * iv);
}

inline Jet2 jsqrt(const Jet2& a) {
    if (a.v <= 0.0) throw DomainError("sqrt requires a positive argument");
    const double s = std::sqrt(a.v);
    return jet_chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

inline Jet2 jabs(const Jet2& a) {
    const double s = a.v < 0.0 ? -1.0 : 1.0;
    return a * s;
}

/// Integer power by repeated multiplication; valid for any base.
inline Jet2 jpow_int(const Jet2& a, long m) {
    if (m < 0) return jinv(jpow_int(a, -m));
    Jet2 acc = Jet2::constant(a.dim(), 1.0);
    Jet2 base = a;
    unsigned long e = static_cast<unsigned long>(m);
    while (e > 0) {
        if (e & 1UL) acc = acc * base;
        e >>= 1UL;
        if (e > 0) base = base * base;
    }
    return acc;
}

/// General power a^c = exp(c ln a); requires a > 0.
inline Jet2 jpow(const Jet2& a, double c) { return jexp(jln(a) * c); }
inline Jet2 jpow(const Jet2& a, const Jet2& c) { return jexp(jln(a) * c); }

}  // namespace conflab
