#include "sparsestab/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>
#include <numeric>

namespace sparsestab {

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
    r_ = rows.size();
    if (r_ == 0) throw BadDimensions("Mat: no rows");
    c_ = rows.begin()->size();
    if (c_ == 0) throw BadDimensions("Mat: no cols");
    a_.reserve(r_ * c_);
    for (const auto& row : rows) {
        if (row.size() != c_) throw BadDimensions("Mat: ragged rows");
        for (double x : row) {
            if (!std::isfinite(x)) throw NonFiniteData("Mat: non-finite entry");
            a_.push_back(x);
        }
    }
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vec Mat::row_vec(std::size_t i) const {
    std::vector<double> out(row(i), row(i) + c_);
    return Vec(std::move(out));
}

Vec Mat::col_vec(std::size_t j) const {
    std::vector<double> out(r_);
    for (std::size_t i = 0; i < r_; ++i) out[i] = (*this)(i, j);
    return Vec(std::move(out));
}

Mat Mat::transposed() const {
    Mat t = Mat::empty(c_, r_);
    for (std::size_t i = 0; i < r_; ++i)
        for (std::size_t j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

IndexSet::IndexSet(std::vector<int> idx) : idx_(std::move(idx)) {
    std::sort(idx_.begin(), idx_.end());
    for (std::size_t i = 0; i + 1 < idx_.size(); ++i)
        if (idx_[i] == idx_[i + 1]) throw BadDimensions("IndexSet: duplicate index");
    if (!idx_.empty() && idx_.front() < 0) throw BadDimensions("IndexSet: negative index");
}

IndexSet IndexSet::range(int n) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    return IndexSet(std::move(v));
}

bool IndexSet::contains(int i) const {
    return std::binary_search(idx_.begin(), idx_.end(), i);
}

IndexSet IndexSet::complement(int n) const {
    if (!idx_.empty() && idx_.back() >= n) throw BadDimensions("IndexSet: out of range");
    std::vector<int> out;
    out.reserve(n - idx_.size());
    for (int i = 0; i < n; ++i)
        if (!contains(i)) out.push_back(i);
    return IndexSet(std::move(out));
}

namespace {

// Unit-vector norm checks required of every NormSpec, run in a probe dimension.
void check_unit_axioms(const NormSpec& s) {
    Vec e{1.0, 0.0, 0.0};
    double n = norm(e, s), d = dual_norm(e, s);
    if (std::abs(n - 1.0) > 1e-12 || std::abs(d - 1.0) > 1e-12)
        throw BadDimensions("NormSpec: phi(e_i) or phi*(e_i) differs from 1");
}

}  // namespace

NormSpec NormSpec::lp(double p) {
    if (!(p >= 1.0)) throw BadDimensions("NormSpec: p must be >= 1");
    NormSpec s(Kind::Lp, p, 1.0);
    check_unit_axioms(s);
    return s;
}

NormSpec NormSpec::mixed(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw BadDimensions("NormSpec: alpha outside [0,1]");
    NormSpec s(Kind::MixedInfOne, 2.0, alpha);
    check_unit_axioms(s);
    return s;
}

bool NormSpec::is_polyhedral() const {
    if (kind_ == Kind::MixedInfOne) return true;
    return p_ == 1.0 || p_ == kInf;
}

double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm1(const Vec& a) {
    double s = 0.0;
    for (double x : a) s += std::abs(x);
    return s;
}

double norm_inf(const Vec& a) {
    double s = 0.0;
    for (double x : a) s = std::max(s, std::abs(x));
    return s;
}

Vec add(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Vec sub(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

Vec scale(const Vec& a, double s) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
    return out;
}

Vec matvec(const Mat& m, const Vec& x) {
    assert(x.size() == m.cols());
    Vec out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* r = m.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += r[j] * x[j];
        out[i] = s;
    }
    return out;
}

Vec mat_t_vec(const Mat& m, const Vec& x) {
    assert(x.size() == m.rows());
    Vec out(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) out[j] += r[j] * x[i];
    }
    return out;
}

Mat matmul(const Mat& a, const Mat& b) {
    assert(a.cols() == b.rows());
    Mat out = Mat::empty(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

Vec pos_part(const Vec& a) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], 0.0);
    return out;
}

Vec neg_part(const Vec& a) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::min(a[i], 0.0);
    return out;
}

Vec abs_vec(const Vec& a) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::abs(a[i]);
    return out;
}

namespace {

double lp_norm(const Vec& v, double p) {
    if (p == 1.0) return norm1(v);
    if (p == kInf) return norm_inf(v);
    if (p == 2.0) return norm2(v);
    // scaled accumulation, robust for large p
    double mx = norm_inf(v);
    if (mx == 0.0) return 0.0;
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x) / mx, p);
    return mx * std::pow(s, 1.0 / p);
}

}  // namespace

double norm(const Vec& v, const NormSpec& spec) {
    if (spec.kind() == NormSpec::Kind::MixedInfOne)
        return spec.alpha() * norm_inf(v) + (1.0 - spec.alpha()) * norm1(v);
    return lp_norm(v, spec.p());
}

namespace {

// Dual norm of alpha*||.||_inf + (1-alpha)*||.||_1. The dual unit ball is the
// Minkowski sum alpha*B_1 + (1-alpha)*B_inf, so phi*(v) is the gauge
//   min{ t >= 0 : sum_i (|v_i| - (1-alpha) t)^+ <= alpha t },
// whose defining equation g(t) = sum_i (|v_i| - (1-alpha) t)^+ - alpha t is
// piecewise linear and strictly decreasing; the root is found exactly by
// scanning breakpoints.
double mixed_dual_norm(const Vec& v, double alpha) {
    if (alpha == 1.0) return norm1(v);
    if (alpha == 0.0) return norm_inf(v);
    std::vector<double> a(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) a[i] = std::abs(v[i]);
    std::sort(a.begin(), a.end(), std::greater<double>());
    double total = std::accumulate(a.begin(), a.end(), 0.0);
    if (total == 0.0) return 0.0;
    const double beta = 1.0 - alpha;
    // with t between breakpoints a_{k}/beta (desc), the active set is the top k
    double prefix = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        prefix += a[k];
        // candidate root with exactly k+1 active terms:
        //   prefix - (k+1) beta t = alpha t  =>  t = prefix / (alpha + (k+1) beta)
        double t = prefix / (alpha + (k + 1) * beta);
        double lo = (k + 1 < a.size()) ? a[k + 1] / beta : 0.0;
        double hi = a[k] / beta;
        if (t >= lo - 1e-15 && t <= hi + 1e-15) return t;
    }
    return prefix / (alpha + a.size() * beta);  // all entries active
}

}  // namespace

double dual_norm(const Vec& v, const NormSpec& spec) {
    if (spec.kind() == NormSpec::Kind::MixedInfOne) return mixed_dual_norm(v, spec.alpha());
    double p = spec.p();
    if (p == 1.0) return norm_inf(v);
    if (p == kInf) return norm1(v);
    return lp_norm(v, p / (p - 1.0));
}

double induced_norm_inf_to_1(const Mat& q) {
    std::size_t n = q.cols(), m = q.rows();
    if (n > 24) throw ColumnLimitExceeded("induced_norm_inf_to_1: more than 24 columns");
    // Gray-code walk over sign vectors with x_0 fixed to +1 (symmetry).
    std::vector<double> y(m, 0.0);
    std::vector<int> sign(n, 1);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) y[i] += q(i, j);
    auto l1 = [&] {
        double s = 0.0;
        for (double x : y) s += std::abs(x);
        return s;
    };
    double best = l1();
    if (n == 1) return best;
    std::uint64_t count = 1ull << (n - 1);
    std::uint64_t prev_gray = 0;
    for (std::uint64_t it = 1; it < count; ++it) {
        std::uint64_t gray = it ^ (it >> 1);
        std::uint64_t diff = gray ^ prev_gray;
        prev_gray = gray;
        int bit = 0;
        while (!((diff >> bit) & 1ull)) ++bit;
        std::size_t j = static_cast<std::size_t>(bit) + 1;  // x_0 stays fixed
        double step = -2.0 * sign[j];
        sign[j] = -sign[j];
        for (std::size_t i = 0; i < m; ++i) y[i] += step * q(i, j);
        best = std::max(best, l1());
    }
    return best;
}

namespace {

std::vector<std::size_t> magnitude_order(const Vec& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(x[a]) > std::abs(x[b]);
    });
    return idx;
}

}  // namespace

double best_k_term_error(const Vec& x, int k) {
    if (k < 0) throw BadDimensions("best_k_term_error: negative k");
    if (static_cast<std::size_t>(k) >= x.size()) return 0.0;
    auto idx = magnitude_order(x);
    double s = 0.0;
    for (std::size_t r = k; r < idx.size(); ++r) s += std::abs(x[idx[r]]);
    return s;
}

IndexSet top_k_support(const Vec& x, int k) {
    if (k < 0) throw BadDimensions("top_k_support: negative k");
    auto idx = magnitude_order(x);
    std::vector<int> keep;
    for (std::size_t r = 0; r < idx.size() && r < static_cast<std::size_t>(k); ++r)
        keep.push_back(static_cast<int>(idx[r]));
    return IndexSet(std::move(keep));
}

namespace {

// Householder QR with column pivoting; returns rank against tol * |R_00|.
struct PivotedQr {
    Mat r;                      // upper trapezoid after reflections (in place)
    std::vector<Vec> house;     // Householder vectors
    std::vector<std::size_t> perm;
    int rank = 0;

    PivotedQr(const Mat& a, double rel_tol) : r(a) {
        std::size_t m = a.rows(), n = a.cols();
        perm.resize(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<double> colnorm(n);
        auto col_norm2 = [&](std::size_t j, std::size_t from) {
            double s = 0.0;
            for (std::size_t i = from; i < m; ++i) s += r(i, j) * r(i, j);
            return s;
        };
        double first_pivot = 0.0;
        std::size_t kmax = std::min(m, n);
        for (std::size_t k = 0; k < kmax; ++k) {
            for (std::size_t j = k; j < n; ++j) colnorm[j] = col_norm2(j, k);
            std::size_t best = k;
            for (std::size_t j = k + 1; j < n; ++j)
                if (colnorm[j] > colnorm[best]) best = j;
            if (best != k) {
                for (std::size_t i = 0; i < m; ++i) std::swap(r(i, k), r(i, best));
                std::swap(perm[k], perm[best]);
            }
            double nrm = std::sqrt(colnorm[best]);
            if (k == 0) first_pivot = nrm;
            if (nrm <= rel_tol * std::max(first_pivot, 1e-300)) break;
            // Householder reflector for column k
            Vec v(m - k);
            for (std::size_t i = k; i < m; ++i) v[i - k] = r(i, k);
            double alpha = (v[0] >= 0 ? -nrm : nrm);
            v[0] -= alpha;
            double vnorm = norm2(v);
            if (vnorm > 0) {
                for (std::size_t i = 0; i < v.size(); ++i) v[i] /= vnorm;
                for (std::size_t j = k; j < n; ++j) {
                    double s = 0.0;
                    for (std::size_t i = k; i < m; ++i) s += v[i - k] * r(i, j);
                    s *= 2.0;
                    for (std::size_t i = k; i < m; ++i) r(i, j) -= s * v[i - k];
                }
            }
            house.push_back(v);
            ++rank;
        }
    }

    // applies Q^T to a vector
    Vec qt(const Vec& b) const {
        Vec y = b;
        std::size_t m = y.size();
        for (int k = 0; k < rank; ++k) {
            const Vec& v = house[k];
            double s = 0.0;
            for (std::size_t i = k; i < m; ++i) s += v[i - k] * y[i];
            s *= 2.0;
            for (std::size_t i = k; i < m; ++i) y[i] -= s * v[i - k];
        }
        return y;
    }
};

}  // namespace

int numerical_rank(const Mat& q) {
    PivotedQr f(q, 1e-10);
    return f.rank;
}

RankFactor::RankFactor(const Mat& q) : m_(q.rows()) {
    rank_ = numerical_rank(q);
    full_row_rank_ = (static_cast<std::size_t>(rank_) == m_);
    if (full_row_rank_) {
        // Cholesky of the Gram matrix Q Q^T
        Mat g = matmul(q, q.transposed());
        chol_ = Mat(m_, m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = g(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= chol_(i, k) * chol_(j, k);
                if (i == j) {
                    if (s <= 0.0) {
                        full_row_rank_ = false;
                        return;
                    }
                    chol_(i, i) = std::sqrt(s);
                } else {
                    chol_(i, j) = s / chol_(j, j);
                }
            }
        }
    }
}

Vec RankFactor::solve_gram(const Vec& b) const {
    if (!full_row_rank_) throw SingularGram("solve_gram: Q Q^T not invertible");
    if (b.size() != m_) throw BadDimensions("solve_gram: size mismatch");
    Vec y(m_);
    for (std::size_t i = 0; i < m_; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= chol_(i, k) * y[k];
        y[i] = s / chol_(i, i);
    }
    Vec z(m_);
    for (std::size_t ii = m_; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < m_; ++k) s -= chol_(k, ii) * z[k];
        z[ii] = s / chol_(ii, ii);
    }
    return z;
}

EigResult symmetric_eigs(const Mat& q) {
    std::size_t n = q.rows();
    if (n != q.cols()) throw NotSymmetric("symmetric_eigs: not square");
    if (n > 32) throw SizeLimit("symmetric_eigs: size > 32");
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale += q(i, j) * q(i, j);
    scale = std::sqrt(scale);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(q(i, j) - q(j, i)) > 1e-10 * std::max(1.0, scale))
                throw NotSymmetric("symmetric_eigs: asymmetry above tolerance");

    Mat a = q;
    // symmetrize exactly so rotations preserve symmetry bit-for-bit
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = a(j, i) = v;
        }
    Mat v = Mat::identity(n);
    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };
    const double target = 1e-12 * std::max(scale, 1e-300);
    for (int sweep = 0; sweep < 100 && off_norm() > target; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t r = p + 1; r < n; ++r) {
                double apq = a(p, r);
                if (apq == 0.0) continue;
                double theta = (a(r, r) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, r);
                    a(k, p) = c * akp - s * akq;
                    a(k, r) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(r, k);
                    a(p, k) = c * apk - s * aqk;
                    a(r, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, r);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, r) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
    EigResult out;
    out.values = Vec(n);
    out.vectors = Mat(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

std::optional<Vec> solve_square(Mat a, Vec b, double tol) {
    std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw BadDimensions("solve_square: shape");
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
    if (scale == 0.0) return std::nullopt;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (std::abs(a(piv, k)) <= tol * scale) return std::nullopt;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    Vec x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
        x[ii] = s / a(ii, ii);
    }
    return x;
}

Vec least_squares(const Mat& a, const Vec& b, double rank_tol) {
    if (b.size() != a.rows()) throw BadDimensions("least_squares: shape");
    PivotedQr f(a, rank_tol);
    Vec y = f.qt(b);
    std::size_t n = a.cols();
    Vec xp(static_cast<std::size_t>(f.rank));
    for (std::size_t ii = f.rank; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t j = ii + 1; j < static_cast<std::size_t>(f.rank); ++j)
            s -= f.r(ii, j) * xp[j];
        xp[ii] = s / f.r(ii, ii);
    }
    Vec x(n, 0.0);
    for (int k = 0; k < f.rank; ++k) x[f.perm[k]] = xp[k];
    return x;
}

Vec nnls(const Mat& a, const Vec& b, int max_iter) {
    std::size_t m = a.rows(), n = a.cols();
    if (max_iter <= 0) max_iter = static_cast<int>(10 * n + 100);
    std::vector<bool> passive(n, false);
    Vec x(n, 0.0);
    auto residual = [&] {
        Vec r = b;
        for (std::size_t j = 0; j < n; ++j)
            if (x[j] != 0.0)
                for (std::size_t i = 0; i < m; ++i) r[i] -= a(i, j) * x[j];
        return r;
    };
    auto solve_passive = [&]() -> Vec {
        std::vector<std::size_t> cols;
        for (std::size_t j = 0; j < n; ++j)
            if (passive[j]) cols.push_back(j);
        if (cols.empty()) return Vec(n, 0.0);
        Mat sub = Mat::empty(m, cols.size());
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < cols.size(); ++j) sub(i, j) = a(i, cols[j]);
        Vec z = least_squares(sub, b);
        Vec full(n, 0.0);
        for (std::size_t j = 0; j < cols.size(); ++j) full[cols[j]] = z[j];
        return full;
    };
    for (int it = 0; it < max_iter; ++it) {
        Vec r = residual();
        // gradient of 0.5||Ax-b||^2 is -A^T r
        Vec g = mat_t_vec(a, r);
        double best = 1e-10 * std::max(1.0, norm_inf(g));
        int enter = -1;
        for (std::size_t j = 0; j < n; ++j)
            if (!passive[j] && g[j] > best) {
                best = g[j];
                enter = static_cast<int>(j);
            }
        if (enter < 0) return x;  // KKT satisfied
        passive[enter] = true;
        Vec z = solve_passive();
        // inner loop: retreat while the passive solution leaves the orthant
        while (true) {
            double alpha = 1.0;
            int blocker = -1;
            for (std::size_t j = 0; j < n; ++j) {
                if (!passive[j] || z[j] > 0.0) continue;
                double denom = x[j] - z[j];
                if (denom <= 0.0) continue;
                double step = x[j] / denom;
                if (step < alpha) {
                    alpha = step;
                    blocker = static_cast<int>(j);
                }
            }
            if (blocker < 0) break;
            for (std::size_t j = 0; j < n; ++j)
                if (passive[j]) x[j] += alpha * (z[j] - x[j]);
            for (std::size_t j = 0; j < n; ++j)
                if (passive[j] && x[j] <= 1e-14) {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            z = solve_passive();
        }
        x = z;
    }
    return x;  // best effort; callers verify KKT where it matters
}

Mat null_basis(const Mat& e) {
    std::size_t n = e.cols();
    Mat a = e.transposed();  // n x me, QR: null space = trailing Q columns
    std::size_t m = a.rows(), k = a.cols();
    std::vector<Vec> reflectors;
    std::size_t rank = 0;
    double first = 0.0;
    for (std::size_t col = 0; col < std::min(m, k); ++col) {
        double nrm = 0.0;
        for (std::size_t i = col; i < m; ++i) nrm += a(i, col) * a(i, col);
        nrm = std::sqrt(nrm);
        if (col == 0) first = nrm;
        if (nrm <= 1e-12 * std::max(first, 1.0)) break;
        Vec v(m - col);
        for (std::size_t i = col; i < m; ++i) v[i - col] = a(i, col);
        double alpha = v[0] >= 0 ? -nrm : nrm;
        v[0] -= alpha;
        double vn = norm2(v);
        if (vn > 0)
            for (auto& vv : v) vv /= vn;
        for (std::size_t jj = col; jj < k; ++jj) {
            double s = 0.0;
            for (std::size_t i = col; i < m; ++i) s += v[i - col] * a(i, jj);
            s *= 2.0;
            for (std::size_t i = col; i < m; ++i) a(i, jj) -= s * v[i - col];
        }
        reflectors.push_back(v);
        ++rank;
    }
    std::size_t nulldim = n - rank;
    Mat basis = Mat::empty(n, nulldim);
    for (std::size_t jj = 0; jj < nulldim; ++jj) {
        Vec q(n, 0.0);
        q[rank + jj] = 1.0;  // apply Q = H_1 ... H_r to e_{rank+jj}
        for (std::size_t rr = reflectors.size(); rr-- > 0;) {
            const Vec& v = reflectors[rr];
            double s = 0.0;
            for (std::size_t i = rr; i < n; ++i) s += v[i - rr] * q[i];
            s *= 2.0;
            for (std::size_t i = rr; i < n; ++i) q[i] -= s * v[i - rr];
        }
        for (std::size_t i = 0; i < n; ++i) basis(i, jj) = q[i];
    }
    return basis;
}

}  // namespace sparsestab
