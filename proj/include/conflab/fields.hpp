#pragma once

// Scalar conformal-factor fields: closed-form bubbles, parsed expressions,
// Kelvin/inversion images, and linear perturbations. A field evaluates to a
// value or to a full second-order jet; the positive-value invariant is
// enforced at evaluation time. `signed_*` accessors skip the positivity gate
// for fields used as perturbation directions.

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "conflab/common.hpp"
#include "conflab/dual2.hpp"
#include "conflab/expr.hpp"
#include "conflab/symmat.hpp"

namespace conflab::fields {

/// Exclusion radius around inversion centers and other singular points.
inline constexpr double kSingularRadius = 1e-9;

struct FieldJet {
    double value = 0.0;
    Eigen::VectorXd gradient;
    SymMatrix hessian;
};

class FieldImpl {
public:
    virtual ~FieldImpl() = default;
    virtual int dim() const = 0;
    virtual double raw_value(const Eigen::VectorXd& x) const = 0;
    virtual FieldJet raw_jet(const Eigen::VectorXd& x) const = 0;
    virtual std::string describe() const = 0;
};

class ScalarField {
public:
    explicit ScalarField(std::shared_ptr<const FieldImpl> impl) : impl_(std::move(impl)) {}

    int dim() const { return impl_->dim(); }
    std::string describe() const { return impl_->describe(); }
    const FieldImpl& impl() const { return *impl_; }

    double value(const Eigen::VectorXd& x) const {
        const double v = signed_value(x);
        if (v <= 0.0) throw DomainError("field is not positive at the evaluation point");
        return v;
    }

    FieldJet jet(const Eigen::VectorXd& x) const {
        FieldJet j = signed_jet(x);
        if (j.value <= 0.0) throw DomainError("field is not positive at the evaluation point");
        return j;
    }

    double signed_value(const Eigen::VectorXd& x) const {
        check_point(x);
        const double v = impl_->raw_value(x);
        if (!std::isfinite(v)) throw DomainError("field value is not finite");
        return v;
    }

    FieldJet signed_jet(const Eigen::VectorXd& x) const {
        check_point(x);
        FieldJet j = impl_->raw_jet(x);
        if (!std::isfinite(j.value) || !j.gradient.allFinite() || !j.hessian.all_finite())
            throw DomainError("field jet is not finite");
        return j;
    }

private:
    void check_point(const Eigen::VectorXd& x) const {
        if (static_cast<int>(x.size()) != impl_->dim())
            throw DomainError("evaluation point dimension mismatch");
        if (!x.allFinite()) throw DomainError("evaluation point has non-finite coordinates");
    }

    std::shared_ptr<const FieldImpl> impl_;
};

struct BubbleParams {
    int n = 0;
    double b = 1.0;
    Eigen::VectorXd center;
};

namespace detail {

inline FieldJet jet_from(const Jet2& j) {
    FieldJet out;
    out.value = j.v;
    out.gradient = j.g;
    out.hessian = j.h;
    return out;
}

class BubbleImpl final : public FieldImpl {
public:
    explicit BubbleImpl(BubbleParams p) : p_(std::move(p)) {}

    int dim() const override { return p_.n; }

    double raw_value(const Eigen::VectorXd& x) const override {
        const double w = 1.0 + p_.b * (x - p_.center).squaredNorm();
        return std::pow(p_.b, 0.25 * (p_.n - 2)) * std::pow(w, -0.5 * (p_.n - 2));
    }

    FieldJet raw_jet(const Eigen::VectorXd& x) const override {
        const int n = p_.n;
        const Eigen::VectorXd d = x - p_.center;
        const double w = 1.0 + p_.b * d.squaredNorm();
        const double amp = std::pow(p_.b, 0.25 * (n - 2));
        const double wn = std::pow(w, -0.5 * n);  // w^(-n/2)
        FieldJet j;
        j.value = amp * std::pow(w, -0.5 * (n - 2));
        const double c1 = -(n - 2) * p_.b * amp;
        j.gradient = c1 * wn * d;
        Eigen::MatrixXd H =
            c1 * (wn * Eigen::MatrixXd::Identity(n, n) - (n * p_.b * wn / w) * (d * d.transpose()));
        j.hessian = SymMatrix::from_dense(H);
        return j;
    }

    std::string describe() const override {
        std::ostringstream os;
        os << "bubble(n=" << p_.n << ", b=" << p_.b << ", center=[";
        for (int i = 0; i < p_.center.size(); ++i) os << (i ? "," : "") << p_.center[i];
        os << "])";
        return os.str();
    }

    const BubbleParams& params() const { return p_; }

private:
    BubbleParams p_;
};

class ConstantImpl final : public FieldImpl {
public:
    ConstantImpl(int n, double c) : n_(n), c_(c) {}
    int dim() const override { return n_; }
    double raw_value(const Eigen::VectorXd&) const override { return c_; }
    FieldJet raw_jet(const Eigen::VectorXd&) const override {
        FieldJet j;
        j.value = c_;
        j.gradient = Eigen::VectorXd::Zero(n_);
        j.hessian = SymMatrix(n_);
        return j;
    }
    std::string describe() const override {
        std::ostringstream os;
        os << "constant(" << c_ << ")";
        return os.str();
    }

private:
    int n_;
    double c_;
};

class ExprImpl final : public FieldImpl {
public:
    ExprImpl(expr::Ast ast, int n) : ast_(std::move(ast)), n_(n) {}

    int dim() const override { return n_; }

    double raw_value(const Eigen::VectorXd& x) const override {
        std::vector<double> vars(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) vars[static_cast<std::size_t>(i)] = x[i];
        return expr::evaluate<double>(ast_, ast_.root, vars, n_);
    }

    FieldJet raw_jet(const Eigen::VectorXd& x) const override {
        std::vector<Jet2> vars;
        vars.reserve(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) vars.push_back(Jet2::variable(n_, i, x[i]));
        return jet_from(expr::evaluate<Jet2>(ast_, ast_.root, vars, n_));
    }

    std::string describe() const override { return "expr(" + ast_.source + ")"; }

private:
    expr::Ast ast_;
    int n_;
};

// Inversion about the sphere of radius `lambda` centered at `p`, with the
// conformal prefactor (lambda/|y-p|)^(n-2) applied to the pulled-back base
// field. Optionally restricted to a ball domain.
class InversionImpl final : public FieldImpl {
public:
    InversionImpl(ScalarField base, Eigen::VectorXd p, double lambda,
                  std::optional<std::pair<Eigen::VectorXd, double>> ball)
        : base_(std::move(base)), p_(std::move(p)), lambda_(lambda), ball_(std::move(ball)) {}

    int dim() const override { return base_.dim(); }

    double raw_value(const Eigen::VectorXd& y) const override {
        const int n = dim();
        const Eigen::VectorXd d = y - p_;
        const double r2 = check_radius(y, d);
        const Eigen::VectorXd z = p_ + (lambda_ * lambda_ / r2) * d;
        const double pref = std::pow(lambda_ * lambda_ / r2, 0.5 * (n - 2));
        return pref * base_.value(z);
    }

    FieldJet raw_jet(const Eigen::VectorXd& y) const override {
        const int n = dim();
        const Eigen::VectorXd d = y - p_;
        check_radius(y, d);

        // Jets of s = |y-p|^2, the mapped point z, and the prefactor.
        Jet2 s(n, d.squaredNorm());
        s.g = 2.0 * d;
        s.h = SymMatrix::scaled_identity(n, 2.0);
        const Jet2 invs = jinv(s);
        const double lam2 = lambda_ * lambda_;
        const Jet2 pref = jpow(s * (1.0 / lam2), -0.5 * (n - 2));

        std::vector<Jet2> z(static_cast<std::size_t>(n));
        Eigen::VectorXd zval(n);
        for (int i = 0; i < n; ++i) {
            Jet2 di(n, d[i]);
            di.g = Eigen::VectorXd::Zero(n);
            di.g[i] = 1.0;
            di.h = SymMatrix(n);
            z[static_cast<std::size_t>(i)] = di * invs * lam2 + p_[i];
            zval[i] = z[static_cast<std::size_t>(i)].v;
        }

        const FieldJet base = base_.jet(zval);

        // Chain rule through the map: value, J^T grad, and
        // sum_j g_j Hess(z_j) + J^T Hess(u) J with J(j,a) = dz_j/dy_a.
        Eigen::MatrixXd J(n, n);
        for (int j = 0; j < n; ++j) J.row(j) = z[static_cast<std::size_t>(j)].g.transpose();
        Eigen::VectorXd grad = J.transpose() * base.gradient;
        Eigen::MatrixXd H = J.transpose() * base.hessian.dense() * J;
        for (int j = 0; j < n; ++j) H += base.gradient[j] * z[static_cast<std::size_t>(j)].h.dense();

        // Product rule with the prefactor jet.
        FieldJet out;
        out.value = pref.v * base.value;
        out.gradient = pref.v * grad + base.value * pref.g;
        Eigen::MatrixXd Ht = pref.v * H + base.value * pref.h.dense() +
                             pref.g * grad.transpose() + grad * pref.g.transpose();
        out.hessian = SymMatrix::from_dense(Ht);
        return out;
    }

    std::string describe() const override {
        std::ostringstream os;
        os << "kelvin(center=[";
        for (int i = 0; i < p_.size(); ++i) os << (i ? "," : "") << p_[i];
        os << "], lambda=" << lambda_ << ") of " << base_.describe();
        return os.str();
    }

    const ScalarField& base() const { return base_; }
    const Eigen::VectorXd& center() const { return p_; }
    double lambda() const { return lambda_; }

private:
    double check_radius(const Eigen::VectorXd& y, const Eigen::VectorXd& d) const {
        const double r2 = d.squaredNorm();
        if (std::sqrt(r2) <= kSingularRadius)
            throw DomainError("evaluation at the inversion singularity");
        if (ball_ && (y - ball_->first).norm() > ball_->second + 1e-12)
            throw DomainError("evaluation outside the ball domain");
        return r2;
    }

    ScalarField base_;
    Eigen::VectorXd p_;
    double lambda_;
    std::optional<std::pair<Eigen::VectorXd, double>> ball_;
};

class PerturbImpl final : public FieldImpl {
public:
    PerturbImpl(ScalarField u, ScalarField phi, double eps)
        : u_(std::move(u)), phi_(std::move(phi)), eps_(eps) {}

    int dim() const override { return u_.dim(); }

    double raw_value(const Eigen::VectorXd& x) const override {
        return u_.value(x) + eps_ * phi_.signed_value(x);
    }

    FieldJet raw_jet(const Eigen::VectorXd& x) const override {
        FieldJet a = u_.jet(x);
        if (eps_ == 0.0) return a;
        const FieldJet b = phi_.signed_jet(x);
        a.value += eps_ * b.value;
        a.gradient += eps_ * b.gradient;
        a.hessian += b.hessian * eps_;
        return a;
    }

    std::string describe() const override {
        std::ostringstream os;
        os << u_.describe() << " + " << eps_ << " * " << phi_.describe();
        return os.str();
    }

private:
    ScalarField u_;
    ScalarField phi_;
    double eps_;
};

}  // namespace detail

inline ScalarField bubble_field(const BubbleParams& p) {
    if (p.n < 3) throw DomainError("bubble_field: dimension must be at least 3");
    if (!(p.b > 0.0) || !std::isfinite(p.b)) throw DomainError("bubble_field: b must be positive");
    if (static_cast<int>(p.center.size()) != p.n)
        throw DomainError("bubble_field: center dimension mismatch");
    return ScalarField(std::make_shared<detail::BubbleImpl>(p));
}

inline ScalarField constant_field(int n, double c) {
    if (n < 3) throw DomainError("constant_field: dimension must be at least 3");
    if (!(c > 0.0)) throw DomainError("constant_field: value must be positive");
    return ScalarField(std::make_shared<detail::ConstantImpl>(n, c));
}

inline ScalarField parse_field(const std::string& source, int n) {
    if (n < 3 || n > 20) throw DomainError("parse_field: dimension outside [3, 20]");
    expr::Ast ast = expr::parse(source);
    if (ast.max_var > n)
        throw DomainError("parse_field: expression uses x" + std::to_string(ast.max_var) +
                          " but the dimension is " + std::to_string(n));
    return ScalarField(std::make_shared<detail::ExprImpl>(std::move(ast), n));
}

/// Inversion-with-prefactor image of `u` about the sphere |y - center| = lambda.
/// No boundary constraint on the center; optionally restricted to a ball.
inline ScalarField inversion_field(
    const ScalarField& u, const Eigen::VectorXd& center, double lambda,
    std::optional<std::pair<Eigen::VectorXd, double>> ball = std::nullopt) {
    if (static_cast<int>(center.size()) != u.dim())
        throw DomainError("inversion_field: center dimension mismatch");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw DomainError("inversion_field: radius must be positive");
    return ScalarField(
        std::make_shared<detail::InversionImpl>(u, center, lambda, std::move(ball)));
}

/// Kelvin transform u_{x,lambda}(y) = (lambda/|y-x|)^(n-2) u(x + lambda^2 (y-x)/|y-x|^2)
/// with the center on the boundary hyperplane {x_n = 0}.
inline ScalarField kelvin_field(const ScalarField& u, const Eigen::VectorXd& x, double lambda) {
    if (static_cast<int>(x.size()) != u.dim())
        throw DomainError("kelvin_field: center dimension mismatch");
    if (std::abs(x[x.size() - 1]) > 1e-12)
        throw DomainError("kelvin_field: center must lie on the boundary hyperplane");
    return inversion_field(u, x, lambda);
}

/// u + eps * phi. `phi` may be sign-changing; the sum is positivity-checked
/// wherever it is evaluated.
inline ScalarField perturb_field(const ScalarField& u, const ScalarField& phi, double eps) {
    if (phi.dim() != u.dim()) throw DomainError("perturb_field: dimension mismatch");
    if (!std::isfinite(eps)) throw DomainError("perturb_field: eps must be finite");
    return ScalarField(std::make_shared<detail::PerturbImpl>(u, phi, eps));
}

/// Recovers bubble parameters when the field is an exact closed-form bubble.
inline std::optional<BubbleParams> as_bubble(const ScalarField& u) {
    if (auto* b = dynamic_cast<const detail::BubbleImpl*>(&u.impl())) return b->params();
    return std::nullopt;
}

}  // namespace conflab::fields
