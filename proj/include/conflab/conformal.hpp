#pragma once

// Curvature data of the conformally flat metric u^{4/(n-2)} |dx|^2 on the
// upper half space: the (1,1) Schouten tensor, its tangential restriction on
// the flat boundary, the boundary mean curvature, sigma_k curvature, the
// log-density form of the same tensor, and cone classification along point
// samples. Everything is computed from exact second-order jets of u.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "conflab/common.hpp"
#include "conflab/fields.hpp"
#include "conflab/symfun.hpp"
#include "conflab/symmat.hpp"

namespace conflab::conformal {

/// Points with |x_n| at or below this count as boundary points.
inline constexpr double kBoundaryTolerance = 1e-12;

inline void require_boundary(const Eigen::VectorXd& x) {
    if (x.size() == 0 || std::abs(x[x.size() - 1]) > kBoundaryTolerance)
        throw DomainError("boundary point required: last coordinate must vanish");
}

/// Full (1,1) Schouten tensor of u^{4/(n-2)} |dx|^2 assembled from a jet:
///   A = -c1 u^{-(n+2)/(n-2)} Hess u + c2 u^{-2n/(n-2)} grad u grad u^T
///       - c3 u^{-2n/(n-2)} |grad u|^2 I
/// with c1 = 2/(n-2), c2 = 2n/(n-2)^2, c3 = 2/(n-2)^2.
inline SymMatrix schouten_from_jet(const fields::FieldJet& jet, int n) {
    if (n < 3) throw DomainError("schouten requires dimension >= 3");
    if (jet.value <= 0.0) throw DomainError("schouten requires a positive conformal factor");
    const double c1 = 2.0 / (n - 2);
    const double c2 = 2.0 * n / ((n - 2.0) * (n - 2.0));
    const double c3 = 2.0 / ((n - 2.0) * (n - 2.0));
    const double p1 = std::pow(jet.value, -(n + 2.0) / (n - 2.0));
    const double p2 = std::pow(jet.value, -2.0 * n / (n - 2.0));
    const double gg = jet.gradient.squaredNorm();
    SymMatrix A(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double v = -c1 * p1 * jet.hessian(i, j) + c2 * p2 * jet.gradient[i] * jet.gradient[j];
            if (i == j) v -= c3 * p2 * gg;
            A.set(i, j, v);
        }
    }
    return A;
}

/// Tangential Schouten tensor on the boundary: the (n-1) x (n-1) block over
/// the tangential slots, with the |grad u|^2 contraction still taken over
/// the full gradient (normal derivative included).
inline SymMatrix tangential_from_jet(const fields::FieldJet& jet, int n) {
    if (n < 3) throw DomainError("tangential schouten requires dimension >= 3");
    if (jet.value <= 0.0) throw DomainError("tangential schouten requires a positive conformal factor");
    const double c1 = 2.0 / (n - 2);
    const double c2 = 2.0 * n / ((n - 2.0) * (n - 2.0));
    const double c3 = 2.0 / ((n - 2.0) * (n - 2.0));
    const double p1 = std::pow(jet.value, -(n + 2.0) / (n - 2.0));
    const double p2 = std::pow(jet.value, -2.0 * n / (n - 2.0));
    const double gg = jet.gradient.squaredNorm();
    SymMatrix T(n - 1);
    for (int a = 0; a + 1 < n; ++a) {
        for (int b = a; b + 1 < n; ++b) {
            double v = -c1 * p1 * jet.hessian(a, b) + c2 * p2 * jet.gradient[a] * jet.gradient[b];
            if (a == b) v -= c3 * p2 * gg;
            T.set(a, b, v);
        }
    }
    return T;
}

/// Boundary mean curvature h = -(2/(n-2)) u^{-n/(n-2)} du/dx_n.
inline double mean_curvature_from_jet(const fields::FieldJet& jet, int n) {
    if (n < 3) throw DomainError("mean curvature requires dimension >= 3");
    if (jet.value <= 0.0) throw DomainError("mean curvature requires a positive conformal factor");
    return -(2.0 / (n - 2)) * std::pow(jet.value, -static_cast<double>(n) / (n - 2)) *
           jet.gradient[n - 1];
}

inline SymMatrix schouten(const fields::ScalarField& u, const Eigen::VectorXd& x) {
    return schouten_from_jet(u.jet(x), u.dim());
}

inline SymMatrix tangential_schouten(const fields::ScalarField& u, const Eigen::VectorXd& x) {
    require_boundary(x);
    return tangential_from_jet(u.jet(x), u.dim());
}

inline double mean_curvature(const fields::ScalarField& u, const Eigen::VectorXd& x) {
    require_boundary(x);
    return mean_curvature_from_jet(u.jet(x), u.dim());
}

inline double sigma_k_curvature(const fields::ScalarField& u, const Eigen::VectorXd& x, int k) {
    if (k < 1 || k > u.dim()) throw DomainError("sigma_k curvature: degree outside [1, dim]");
    return symfun::sigma(schouten(u, x), k);
}

/// Same tensor in log density form: with W = (2/(n-2)) ln u,
///   A[W] = -Hess W + dW dW^T - |dW|^2/2 I,
/// so that the Schouten tensor above equals u^{-4/(n-2)} A[W].
inline SymMatrix log_schouten(const fields::ScalarField& u, const Eigen::VectorXd& x) {
    const int n = u.dim();
    const fields::FieldJet jet = u.jet(x);
    const double c = 2.0 / (n - 2);
    const Eigen::VectorXd gw = (c / jet.value) * jet.gradient;
    const Eigen::MatrixXd hw =
        (c / jet.value) * jet.hessian.dense() -
        (c / (jet.value * jet.value)) * (jet.gradient * jet.gradient.transpose());
    const Eigen::MatrixXd aw = -hw + gw * gw.transpose() -
                               0.5 * gw.squaredNorm() * Eigen::MatrixXd::Identity(n, n);
    return SymMatrix::from_dense(aw);
}

/// Checks strict order-k cone membership of the Schouten tensor at every
/// sample point; the reported value is the worst sigma margin encountered.
inline CheckReport cone_along(const fields::ScalarField& u, const std::vector<Eigen::VectorXd>& pts,
                              int k) {
    if (k < 1 || k > u.dim()) throw DomainError("cone check: degree outside [1, dim]");
    if (pts.empty()) throw DomainError("cone check: no sample points");
    double worst = std::numeric_limits<double>::infinity();
    std::size_t worst_at = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto chain = symfun::sigma_chain(schouten(u, pts[i]), k);
        for (int j = 1; j <= k; ++j) {
            if (chain.sigma[static_cast<std::size_t>(j)] < worst) {
                worst = chain.sigma[static_cast<std::size_t>(j)];
                worst_at = i;
            }
        }
    }
    CheckReport rep;
    rep.name = "cone-along";
    rep.values = {worst};
    rep.references = {0.0};
    rep.abs_err = std::max(0.0, -worst);
    rep.tol = 0.0;
    rep.pass = worst > 0.0;
    std::ostringstream note;
    note << "worst sigma margin at sample " << worst_at << " of " << pts.size();
    rep.note = note.str();
    return rep;
}

/// Boundary-point bundle: jet plus derived tangential tensor and mean curvature.
struct BoundaryJet {
    Eigen::VectorXd location;
    fields::FieldJet jet;
    SymMatrix a_tangential;
    double h = 0.0;
};

inline BoundaryJet boundary_jet(const fields::ScalarField& u, const Eigen::VectorXd& x) {
    require_boundary(x);
    const int n = u.dim();
    fields::FieldJet jet = u.jet(x);
    SymMatrix tan = tangential_from_jet(jet, n);
    const double h = mean_curvature_from_jet(jet, n);
    return BoundaryJet{x, std::move(jet), std::move(tan), h};
}

/// Interior-point bundle: Schouten tensor, sigma_0..sigma_k, cone order.
struct CurvaturePoint {
    Eigen::VectorXd location;
    SymMatrix schouten_tensor;
    std::vector<double> sigmas;
    int cone = 0;
};

inline CurvaturePoint curvature_point(const fields::ScalarField& u, const Eigen::VectorXd& x,
                                      int k) {
    if (k < 1 || k > u.dim()) throw DomainError("curvature point: degree outside [1, dim]");
    SymMatrix A = schouten(u, x);
    auto chain = symfun::sigma_chain(A, k);
    const int cone = symfun::cone_classify(A);
    return CurvaturePoint{x, std::move(A), std::move(chain.sigma), cone};
}

}  // namespace conflab::conformal
