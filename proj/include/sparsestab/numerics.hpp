#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <optional>
#include <vector>

#include "sparsestab/common.hpp"

namespace sparsestab {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dense real vector. Constructors reject NaN/Inf entries.
class Vec {
  public:
    Vec() = default;
    explicit Vec(std::size_t n, double fill = 0.0) : v_(n, fill) { check(); }
    Vec(std::initializer_list<double> xs) : v_(xs) { check(); }
    explicit Vec(std::vector<double> xs) : v_(std::move(xs)) { check(); }

    std::size_t size() const { return v_.size(); }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    const std::vector<double>& raw() const { return v_; }

    auto begin() { return v_.begin(); }
    auto end() { return v_.end(); }
    auto begin() const { return v_.begin(); }
    auto end() const { return v_.end(); }

  private:
    void check() const {
        for (double x : v_)
            if (!std::isfinite(x)) throw NonFiniteData("Vec: non-finite entry");
    }
    std::vector<double> v_;
};

/// Dense row-major matrix with positive dimensions and finite entries.
class Mat {
  public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : r_(rows), c_(cols), a_(rows * cols, fill) {
        if (rows == 0 || cols == 0) throw BadDimensions("Mat: zero dimension");
    }
    Mat(std::initializer_list<std::initializer_list<double>> rows);
    static Mat identity(std::size_t n);
    /// Zero-row/zero-col matrices for empty constraint blocks.
    static Mat empty(std::size_t rows, std::size_t cols) {
        Mat m;
        m.r_ = rows;
        m.c_ = cols;
        m.a_.assign(rows * cols, 0.0);
        return m;
    }

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }
    double* row(std::size_t i) { return a_.data() + i * c_; }
    const double* row(std::size_t i) const { return a_.data() + i * c_; }

    Vec row_vec(std::size_t i) const;
    Vec col_vec(std::size_t j) const;
    Mat transposed() const;

  private:
    std::size_t r_ = 0, c_ = 0;
    std::vector<double> a_;
};

/// Sorted set of distinct 0-based indices into {0, ..., n-1}.
class IndexSet {
  public:
    IndexSet() = default;
    explicit IndexSet(std::vector<int> idx);
    static IndexSet range(int n);

    const std::vector<int>& items() const { return idx_; }
    std::size_t size() const { return idx_.size(); }
    bool contains(int i) const;
    IndexSet complement(int n) const;
    bool operator==(const IndexSet& o) const { return idx_ == o.idx_; }

  private:
    std::vector<int> idx_;
};

/// Norm family: phi(e_i) = 1 and phi*(e_i) = 1 for every basis vector.
/// Lp covers p in [1, inf]; MixedInfOne is alpha*||.||_inf + (1-alpha)*||.||_1.
class NormSpec {
  public:
    enum class Kind { Lp, MixedInfOne };

    static NormSpec lp(double p);
    static NormSpec mixed(double alpha);

    Kind kind() const { return kind_; }
    double p() const { return p_; }
    double alpha() const { return alpha_; }
    bool is_polyhedral() const;

  private:
    NormSpec(Kind k, double p, double a) : kind_(k), p_(p), alpha_(a) {}
    Kind kind_;
    double p_ = 2.0;
    double alpha_ = 1.0;
};

// basic dense kernels
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm1(const Vec& a);
double norm_inf(const Vec& a);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(const Vec& a, double s);
Vec matvec(const Mat& m, const Vec& x);
Vec mat_t_vec(const Mat& m, const Vec& x);
Mat matmul(const Mat& a, const Mat& b);
Vec pos_part(const Vec& a);   // componentwise max(x_i, 0)
Vec neg_part(const Vec& a);   // componentwise min(x_i, 0), kept signed
Vec abs_vec(const Vec& a);

double norm(const Vec& v, const NormSpec& spec);
double dual_norm(const Vec& v, const NormSpec& spec);

/// Exact induced inf->1 norm by sign-vector enumeration; exact because the
/// maximum of a convex function over the cube sits at a vertex.
double induced_norm_inf_to_1(const Mat& q);

/// l1 mass of x outside its k largest-magnitude entries.
double best_k_term_error(const Vec& x, int k);
/// The support selected by the same ordering (|x_i| desc, index asc).
IndexSet top_k_support(const Vec& x, int k);

/// Numerical rank plus a factor able to solve (Q Q^T) z = b for full-row-rank Q.
class RankFactor {
  public:
    explicit RankFactor(const Mat& q);
    int rank() const { return rank_; }
    /// Solves (Q Q^T) z = b. Throws SingularGram unless rank == rows.
    Vec solve_gram(const Vec& b) const;

  private:
    int rank_ = 0;
    std::size_t m_ = 0;
    Mat chol_;  // lower Cholesky factor of Q Q^T when full row rank
    bool full_row_rank_ = false;
};

int numerical_rank(const Mat& q);

struct EigResult {
    Vec values;   // ascending
    Mat vectors;  // columns are eigenvectors, matching values order
};

/// All eigenvalues of a symmetric matrix (size <= 32) via cyclic Jacobi
/// rotations, run until the off-diagonal norm is <= 1e-12 * ||Q||_F.
EigResult symmetric_eigs(const Mat& q);

// small dense solvers used across the library
std::optional<Vec> solve_square(Mat a, Vec b, double tol = 1e-12);
/// Least squares min ||A x - b||_2 via Householder QR with column pivoting;
/// returns a minimum-residual solution (basic solution on the detected rank).
Vec least_squares(const Mat& a, const Vec& b, double rank_tol = 1e-11);
/// min ||A x - b||_2 subject to x >= 0 (Lawson-Hanson active set).
Vec nnls(const Mat& a, const Vec& b, int max_iter = 0);
/// Orthonormal basis of the null space of A, as columns (n x (n - rank)).
Mat null_basis(const Mat& a);

}  // namespace sparsestab
