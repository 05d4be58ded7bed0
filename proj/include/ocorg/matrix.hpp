#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "ocorg/errors.hpp"
#include "ocorg/rng.hpp"

namespace ocorg {

// Dense real matrix, row-major storage. Column vectors are 1-column matrices;
// the Vector alias and operator[] exist for readability at call sites.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_)
            throw DimensionMismatch("Matrix: entry count " + std::to_string(data_.size()) +
                                    " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
        for (double v : data_)
            if (!std::isfinite(v))
                throw Error("Matrix: non-finite entry");
    }

    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_)
                throw DimensionMismatch("Matrix: ragged initializer");
            for (double v : row) {
                if (!std::isfinite(v)) throw Error("Matrix: non-finite entry");
                data_.push_back(v);
            }
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

    static Matrix column(std::vector<double> entries) {
        const std::size_t n = entries.size();
        return Matrix(n, 1, std::move(entries));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool is_vector() const { return cols_ == 1; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    // Vector element access; valid for any shape, indexes storage order.
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    const std::vector<double>& data() const { return data_; }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix& operator+=(const Matrix& o) {
        require_same_shape(o, "operator+=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }

    Matrix& operator-=(const Matrix& o) {
        require_same_shape(o, "operator-=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }

    Matrix& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }
    friend Matrix operator-(Matrix a) { return a *= -1.0; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_)
            throw DimensionMismatch("operator*: " + shape_str(a) + " x " + shape_str(b));
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

private:
    static std::string shape_str(const Matrix& m) {
        return std::to_string(m.rows_) + "x" + std::to_string(m.cols_);
    }

    void require_same_shape(const Matrix& o, const char* op) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw DimensionMismatch(std::string(op) + ": " + shape_str(*this) + " vs " + shape_str(o));
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using Vector = Matrix; // column vector by convention

inline Vector vec(std::initializer_list<double> entries) {
    return Matrix::column(std::vector<double>(entries));
}

inline double dot(const Matrix& a, const Matrix& b) {
    if (a.size() != b.size())
        throw DimensionMismatch("dot: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double norm2(const Matrix& v) { return std::sqrt(dot(v, v)); }

inline double max_abs(const Matrix& m) {
    double r = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) r = std::max(r, std::abs(m[k]));
    return r;
}

// Row-sum norm ||M||_inf; equals max |entry| for column vectors.
inline double inf_norm(const Matrix& m) {
    double r = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += std::abs(m(i, j));
        r = std::max(r, s);
    }
    return r;
}

inline Matrix hstack(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw DimensionMismatch("hstack: row counts differ");
    Matrix c(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
        for (std::size_t j = 0; j < b.cols(); ++j) c(i, a.cols() + j) = b(i, j);
    }
    return c;
}

inline Matrix vstack(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw DimensionMismatch("vstack: column counts differ");
    Matrix c(a.rows() + b.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) c(a.rows() + i, j) = b(i, j);
    return c;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return c;
}

namespace detail {

// LU with partial pivoting, in place. Returns the permutation; throws
// SingularMatrix when a pivot falls below pivot_tol.
inline std::vector<std::size_t> lu_factor(Matrix& a, double pivot_tol, const char* caller) {
    const std::size_t n = a.rows();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best <= pivot_tol)
            throw SingularMatrix(std::string(caller) + ": pivot " + std::to_string(best) +
                                 " below tolerance at column " + std::to_string(k));
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(perm[k], perm[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            a(i, k) = f;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return perm;
}

inline Matrix lu_solve(const Matrix& lu, const std::vector<std::size_t>& perm, const Matrix& b) {
    const std::size_t n = lu.rows();
    Matrix x(n, b.cols());
    for (std::size_t col = 0; col < b.cols(); ++col) {
        // forward substitution on permuted rhs
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = b(perm[i], col);
            for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * y[j];
            y[i] = s;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t j = ii + 1; j < n; ++j) s -= lu(ii, j) * x(j, col);
            x(ii, col) = s / lu(ii, ii);
        }
    }
    return x;
}

} // namespace detail

// Solves AX = b by LU with partial pivoting (pivot tolerance 1e-12), with
// iterative refinement until ||AX - b||_inf <= 1e-9 (1 + ||b||_inf).
inline Matrix solve_linear(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols())
        throw DimensionMismatch("solve_linear: A not square");
    if (a.rows() != b.rows())
        throw DimensionMismatch("solve_linear: A and b row counts differ");
    Matrix lu = a;
    const auto perm = detail::lu_factor(lu, 1e-12, "solve_linear");
    Matrix x = detail::lu_solve(lu, perm, b);
    const double bound = 1e-9 * (1.0 + inf_norm(b));
    for (int pass = 0; pass < 3; ++pass) {
        const Matrix r = a * x - b;
        if (inf_norm(r) <= bound) return x;
        x -= detail::lu_solve(lu, perm, r);
    }
    if (inf_norm(a * x - b) <= bound) return x;
    throw SingularMatrix("solve_linear: residual bound not met after refinement");
}

namespace detail {

struct PowerIterResult {
    double value = 0.0;    // signed Rayleigh quotient
    double residual = 0.0; // ||Sx - value x||
    bool converged = false;
};

inline PowerIterResult power_iterate(const Matrix& s, Vector x, std::size_t max_iter, double tol) {
    const std::size_t n = s.rows();
    PowerIterResult out;
    double nx = norm2(x);
    if (nx == 0.0) return out;
    x *= 1.0 / nx;
    double mu_prev = 0.0;
    int stagnant = 0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        Vector y = s * x;
        const double mu = dot(x, y);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = y[i] - mu * x[i];
            res += d * d;
        }
        res = std::sqrt(res);
        out.value = mu;
        out.residual = res;
        if (res <= tol * std::max(1.0, std::abs(mu))) {
            out.converged = true;
            return out;
        }
        // clustered spectra: the Rayleigh value settles long before the
        // vector does, and any value inside the cluster is acceptable
        if (it > 0 && std::abs(mu - mu_prev) <= 1e-13 * std::max(1.0, std::abs(mu))) {
            if (++stagnant >= 10) {
                out.converged = true;
                return out;
            }
        } else {
            stagnant = 0;
        }
        mu_prev = mu;
        const double ny = norm2(y);
        if (ny <= 1e-300) {
            // x is (numerically) in the null space; eigenvalue 0 along this start
            out.value = 0.0;
            out.residual = 0.0;
            out.converged = true;
            return out;
        }
        x = y * (1.0 / ny);
    }
    return out;
}

// Dominant (largest |.|) eigenvalue of a symmetric matrix. Starts from the
// all-ones vector; a fixed-seed random restart guards against starts that are
// orthogonal to (or exactly aligned with a non-dominant) eigenvector.
inline double dominant_symmetric_eig(const Matrix& s) {
    const std::size_t n = s.rows();
    Vector ones(n, 1);
    for (std::size_t i = 0; i < n; ++i) ones[i] = 1.0;
    const std::size_t max_iter = 200000;
    const double tol = 1e-11;
    PowerIterResult best = power_iterate(s, ones, max_iter, tol);
    SplitMix64 rng(0x0c05c0ffee15600dULL);
    for (int restart = 0; restart < 2; ++restart) {
        Vector x(n, 1);
        for (std::size_t i = 0; i < n; ++i) x[i] = rng.uniform(-1.0, 1.0);
        const PowerIterResult r = power_iterate(s, x, max_iter, tol);
        const bool better_mag = std::abs(r.value) > std::abs(best.value) + 1e-12 * std::abs(best.value);
        if ((r.converged && !best.converged) || (r.converged == best.converged && better_mag))
            best = r;
        // one agreeing random start is enough to rule out an unlucky
        // all-ones alignment
        if (best.converged && !better_mag) break;
    }
    return best.value;
}

} // namespace detail

// Extreme eigenvalues of a symmetric matrix via power iteration on S and on
// the shifted matrix S - mu1 I. Symmetry tolerance 1e-10.
inline std::pair<double, double> sym_eig_extremes(const Matrix& s) {
    if (s.rows() != s.cols())
        throw DimensionMismatch("sym_eig_extremes: not square");
    const std::size_t n = s.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(s(i, j) - s(j, i)) > 1e-10)
                throw NotSymmetric("sym_eig_extremes: |S(i,j) - S(j,i)| = " +
                                   std::to_string(std::abs(s(i, j) - s(j, i))));
    if (n == 1) return {s(0, 0), s(0, 0)};
    const double mu1 = detail::dominant_symmetric_eig(s);
    Matrix shifted = s;
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= mu1;
    const double mu2 = detail::dominant_symmetric_eig(shifted);
    const double other = mu1 + mu2;
    return {std::min(mu1, other), std::max(mu1, other)};
}

// Induced 2-norm as sqrt(lambda_max(M^T M)).
inline double spectral_norm(const Matrix& m) {
    const Matrix g = m.transpose() * m;
    const auto [lo, hi] = sym_eig_extremes(g);
    (void)lo;
    return std::sqrt(std::max(0.0, hi));
}

// Solves A^T P A - P = -I via the vectorized n^2 x n^2 linear system
// (kron(A^T, A^T) - I) vec(P) = -vec(I). Returns the symmetrized P, which
// exists and is positive definite exactly when A is Schur stable.
inline Matrix solve_discrete_lyapunov(const Matrix& a) {
    if (a.rows() != a.cols())
        throw DimensionMismatch("solve_discrete_lyapunov: not square");
    const std::size_t n = a.rows();
    const Matrix at = a.transpose();
    Matrix sys = kron(at, at);
    for (std::size_t k = 0; k < n * n; ++k) sys(k, k) -= 1.0;
    Matrix rhs(n * n, 1);
    for (std::size_t i = 0; i < n; ++i) rhs[i * n + i] = -1.0;
    Matrix p_vec(0, 0);
    try {
        p_vec = solve_linear(sys, rhs);
    } catch (const SingularMatrix&) {
        throw NotSchurStable("solve_discrete_lyapunov: Lyapunov system singular (rho(A) >= 1)");
    }
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p(i, j) = p_vec[i * n + j];
    // symmetrize; the exact solution is symmetric
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (p(i, j) + p(j, i));
            p(i, j) = v;
            p(j, i) = v;
        }
    const Matrix res = at * p * a - p + Matrix::identity(n);
    if (inf_norm(res) > 1e-8)
        throw NotSchurStable("solve_discrete_lyapunov: residual " + std::to_string(inf_norm(res)));
    const auto [lo, hi] = sym_eig_extremes(p);
    (void)hi;
    if (lo <= 0.0)
        throw NotSchurStable("solve_discrete_lyapunov: P not positive definite (lambda_min = " +
                             std::to_string(lo) + ")");
    return p;
}

// Geometric decay certificate ||A^t|| <= c sigma^t for Schur-stable A.
struct DecayEnvelope {
    double c = 1.0;     // >= 1
    double sigma = 0.5; // in (0, 1)
};

// c = sqrt(lmax(P)/lmin(P)), sigma = sqrt(1 - 1/lmax(P)) from the Lyapunov
// decrement V(Ax) <= (1 - 1/lmax) V(x). sigma is clamped into (0,1).
inline DecayEnvelope schur_decay_envelope(const Matrix& a) {
    const Matrix p = solve_discrete_lyapunov(a);
    const auto [lmin, lmax] = sym_eig_extremes(p);
    DecayEnvelope env;
    env.c = std::max(1.0, std::sqrt(lmax / lmin));
    env.sigma = std::sqrt(std::max(0.0, 1.0 - 1.0 / lmax));
    env.sigma = std::min(std::max(env.sigma, 1e-9), 1.0 - 1e-12);
    return env;
}

} // namespace ocorg
