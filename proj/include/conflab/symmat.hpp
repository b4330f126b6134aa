#pragma once

// Dense real symmetric matrix with packed upper-triangle storage. Symmetry
// holds by construction: (i,j) and (j,i) name the same slot.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "conflab/common.hpp"

namespace conflab {

class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * (dim + 1) / 2, 0.0) {
        if (dim < 0) throw DomainError("SymMatrix: negative dimension");
    }

    static SymMatrix identity(int dim) { return scaled_identity(dim, 1.0); }

    static SymMatrix scaled_identity(int dim, double c) {
        SymMatrix M(dim);
        for (int i = 0; i < dim; ++i) M.set(i, i, c);
        return M;
    }

    /// Builds from a dense matrix, symmetrizing as (M + M^T)/2.
    static SymMatrix from_dense(const Eigen::MatrixXd& M) {
        if (M.rows() != M.cols()) throw DomainError("SymMatrix: dense input not square");
        SymMatrix S(static_cast<int>(M.rows()));
        for (int i = 0; i < S.dim_; ++i)
            for (int j = i; j < S.dim_; ++j) S.set(i, j, 0.5 * (M(i, j) + M(j, i)));
        return S;
    }

    int dim() const { return dim_; }

    double operator()(int i, int j) const { return a_[index(i, j)]; }
    void set(int i, int j, double v) { a_[index(i, j)] = v; }

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd M(dim_, dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = i; j < dim_; ++j) M(i, j) = M(j, i) = (*this)(i, j);
        return M;
    }

    /// Leading principal m x m block.
    SymMatrix top_left(int m) const {
        if (m < 0 || m > dim_) throw DomainError("SymMatrix: block size out of range");
        SymMatrix B(m);
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) B.set(i, j, (*this)(i, j));
        return B;
    }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
        return t;
    }

    bool all_finite() const {
        for (double v : a_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    SymMatrix& operator+=(const SymMatrix& o) {
        require_same_dim(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    SymMatrix& operator-=(const SymMatrix& o) {
        require_same_dim(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    SymMatrix& operator*=(double c) {
        for (double& v : a_) v *= c;
        return *this;
    }

    friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
    friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
    friend SymMatrix operator*(double c, SymMatrix a) { return a *= c; }
    friend SymMatrix operator*(SymMatrix a, double c) { return a *= c; }

private:
    std::size_t index(int i, int j) const {
        if (i < 0 || j < 0 || i >= dim_ || j >= dim_) throw DomainError("SymMatrix: index out of range");
        if (i > j) std::swap(i, j);
        return static_cast<std::size_t>(i) * dim_ - static_cast<std::size_t>(i) * (i + 1) / 2 + j;
    }
    void require_same_dim(const SymMatrix& o) const {
        if (o.dim_ != dim_) throw DomainError("SymMatrix: dimension mismatch");
    }

    int dim_ = 0;
    std::vector<double> a_;
};

}  // namespace conflab
