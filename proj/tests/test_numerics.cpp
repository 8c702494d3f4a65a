#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sparsestab/io.hpp"
#include "sparsestab/numerics.hpp"

using namespace sparsestab;

namespace {

// deterministic test stream
std::mt19937_64 rng(12345);
double unif(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}
Vec random_vec(std::size_t n, double scale = 1.0) {
    Vec v(n);
    for (auto& x : v) x = scale * unif();
    return v;
}
Mat random_mat(std::size_t m, std::size_t n, double scale = 1.0) {
    Mat a(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = scale * unif();
    return a;
}

// row-echelon rank oracle, independent of the QR path
int echelon_rank(Mat a) {
    std::size_t m = a.rows(), n = a.cols(), row = 0;
    double scale = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
    if (scale == 0.0) return 0;
    for (std::size_t col = 0; col < n && row < m; ++col) {
        std::size_t piv = row;
        for (std::size_t i = row + 1; i < m; ++i)
            if (std::abs(a(i, col)) > std::abs(a(piv, col))) piv = i;
        if (std::abs(a(piv, col)) < 1e-10 * scale) continue;
        if (piv != row)
            for (std::size_t j = 0; j < n; ++j) std::swap(a(row, j), a(piv, j));
        for (std::size_t i = row + 1; i < m; ++i) {
            double f = a(i, col) / a(row, col);
            for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(row, j);
        }
        ++row;
    }
    return static_cast<int>(row);
}

}  // namespace

TEST_CASE("vector and matrix constructors reject non-finite data") {
    CHECK_THROWS_AS(Vec({1.0, std::nan("")}), NonFiniteData);
    CHECK_THROWS_AS(Mat({{1.0, kInf}}), NonFiniteData);
    CHECK_THROWS_AS(Mat(0, 3), BadDimensions);
}

TEST_CASE("norm values") {
    CHECK(norm(Vec{3, -4}, NormSpec::lp(2)) == doctest::Approx(5.0));
    CHECK(norm(Vec{3, -4}, NormSpec::mixed(0.5)) == doctest::Approx(5.5));
    CHECK(norm(Vec{1, 1, 1}, NormSpec::lp(kInf)) == doctest::Approx(1.0));
    CHECK(norm(Vec{0, 0}, NormSpec::lp(3)) == 0.0);
}

TEST_CASE("dual norm values and Hoelder sampling") {
    CHECK(dual_norm(Vec{1, 1}, NormSpec::lp(1)) == doctest::Approx(1.0));
    CHECK(dual_norm(Vec{3, -4}, NormSpec::lp(2)) == doctest::Approx(5.0));
    for (const auto& spec : {NormSpec::lp(1), NormSpec::lp(1.5), NormSpec::lp(2),
                             NormSpec::lp(4), NormSpec::lp(kInf), NormSpec::mixed(0.0),
                             NormSpec::mixed(0.3), NormSpec::mixed(1.0)}) {
        for (int t = 0; t < 1000; ++t) {
            Vec v = random_vec(4), u = random_vec(4);
            CHECK(dot(v, u) <= norm(v, spec) * dual_norm(u, spec) + 1e-10);
        }
    }
}

TEST_CASE("norm axioms on random pairs") {
    for (const auto& spec :
         {NormSpec::lp(1), NormSpec::lp(2), NormSpec::lp(3.5), NormSpec::lp(kInf),
          NormSpec::mixed(0.25), NormSpec::mixed(0.75)}) {
        for (int t = 0; t < 2000; ++t) {
            Vec a = random_vec(5), b = random_vec(5);
            double s = unif(-3, 3);
            CHECK(norm(add(a, b), spec) <= norm(a, spec) + norm(b, spec) + 1e-10);
            CHECK(norm(scale(a, s), spec) ==
                  doctest::Approx(std::abs(s) * norm(a, spec)).epsilon(1e-10));
        }
    }
}

TEST_CASE("dual of dual round trip for lp norms") {
    for (double p : {1.0, 1.2, 2.0, 3.0, 7.0, kInf}) {
        NormSpec spec = NormSpec::lp(p);
        double beta = p == 1.0 ? kInf : (p == kInf ? 1.0 : p / (p - 1.0));
        NormSpec dual_spec = NormSpec::lp(beta);
        for (int t = 0; t < 200; ++t) {
            Vec v = random_vec(6);
            CHECK(dual_norm(v, dual_spec) == doctest::Approx(norm(v, spec)).epsilon(1e-10));
        }
    }
}

TEST_CASE("mixed dual norm agrees with decomposition search") {
    // brute-force gauge of the Minkowski sum alpha*B1 + (1-alpha)*Binf by
    // fine bisection over t with an exact decomposition test
    auto brute = [](const Vec& v, double alpha) {
        double lo = 0.0, hi = norm1(v) / std::max(alpha, 1e-9) + norm_inf(v) + 1.0;
        for (int it = 0; it < 200; ++it) {
            double t = 0.5 * (lo + hi);
            double excess = 0.0;
            for (double x : v) excess += std::max(std::abs(x) - (1 - alpha) * t, 0.0);
            (excess <= alpha * t ? hi : lo) = t;
        }
        return hi;
    };
    for (double alpha : {0.1, 0.5, 0.9}) {
        for (int t = 0; t < 300; ++t) {
            Vec v = random_vec(5, 3.0);
            CHECK(dual_norm(v, NormSpec::mixed(alpha)) ==
                  doctest::Approx(brute(v, alpha)).epsilon(1e-9));
        }
    }
}

TEST_CASE("induced inf->1 norm") {
    CHECK(induced_norm_inf_to_1(Mat::identity(2)) == doctest::Approx(2.0));
    CHECK(induced_norm_inf_to_1(Mat{{1, 2}, {3, 4}}) == doctest::Approx(10.0));
    CHECK(induced_norm_inf_to_1(Mat{{1, 1}}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(induced_norm_inf_to_1(Mat(1, 25)), ColumnLimitExceeded);
    // lower-bound consistency against random probes
    Mat q = random_mat(4, 6);
    double nrm = induced_norm_inf_to_1(q);
    for (int t = 0; t < 1000; ++t) {
        Vec x = random_vec(6);
        for (auto& xi : x) xi = std::clamp(xi, -1.0, 1.0);
        CHECK(norm1(matvec(q, x)) <= nrm + 1e-10);
    }
}

TEST_CASE("best k-term error") {
    CHECK(best_k_term_error(Vec{3, -1, 2}, 1) == doctest::Approx(3.0));
    Vec x = random_vec(7);
    CHECK(best_k_term_error(x, 0) == doctest::Approx(norm1(x)));
    CHECK(best_k_term_error(x, 7) == 0.0);
    CHECK(best_k_term_error(x, 12) == 0.0);
    double prev = norm1(x);
    for (int k = 0; k <= 7; ++k) {
        double e = best_k_term_error(x, k);
        CHECK(e <= prev + 1e-15);
        prev = e;
    }
    // zero iff k-sparse
    Vec sp{0, 2, 0, -1, 0};
    CHECK(best_k_term_error(sp, 2) == 0.0);
    CHECK(best_k_term_error(sp, 1) > 0.0);
    // tie break keeps lower index
    IndexSet s = top_k_support(Vec{2, -2, 1}, 1);
    CHECK(s.items() == std::vector<int>{0});
}

TEST_CASE("rank and gram factor") {
    CHECK(RankFactor(Mat::identity(3)).rank() == 3);
    CHECK(RankFactor(Mat{{1, 2}, {2, 4}}).rank() == 1);
    for (int t = 0; t < 50; ++t) {
        Mat a = random_mat(4, 8);
        RankFactor f(a);
        CHECK(f.rank() == 4);
        CHECK(f.rank() == echelon_rank(a));
        Vec b = random_vec(4);
        Vec z = f.solve_gram(b);
        Vec res = sub(matvec(matmul(a, a.transposed()), z), b);
        CHECK(norm_inf(res) < 1e-9);
    }
    CHECK_THROWS_AS(RankFactor(Mat{{1, 2}, {2, 4}}).solve_gram(Vec{1, 1}), SingularGram);
}

TEST_CASE("symmetric eigenvalues") {
    auto ev = symmetric_eigs(Mat::identity(2)).values;
    CHECK(ev[0] == doctest::Approx(1.0));
    CHECK(ev[1] == doctest::Approx(1.0));
    ev = symmetric_eigs(Mat{{2, 0}, {0, 3}}).values;
    CHECK(ev[0] == doctest::Approx(2.0));
    CHECK(ev[1] == doctest::Approx(3.0));
    ev = symmetric_eigs(Mat{{0, 1}, {1, 0}}).values;
    CHECK(ev[0] == doctest::Approx(-1.0));
    CHECK(ev[1] == doctest::Approx(1.0));
    CHECK_THROWS_AS(symmetric_eigs(Mat{{0, 1}, {2, 0}}), NotSymmetric);

    for (int t = 0; t < 30; ++t) {
        Mat a = random_mat(6, 6);
        Mat s = Mat(6, 6, 0.0);
        double fro = 0.0;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                s(i, j) = 0.5 * (a(i, j) + a(j, i));
                fro += s(i, j) * s(i, j);
            }
        fro = std::sqrt(fro);
        EigResult r = symmetric_eigs(s);
        // reconstruction residual Q V = V diag(lambda)
        Mat qv = matmul(s, r.vectors);
        for (int j = 0; j < 6; ++j)
            for (int i = 0; i < 6; ++i)
                CHECK(std::abs(qv(i, j) - r.values[j] * r.vectors(i, j)) <=
                      1e-8 * std::max(1.0, fro));
        for (int j = 0; j + 1 < 6; ++j) CHECK(r.values[j] <= r.values[j + 1] + 1e-12);
    }
}

TEST_CASE("least squares and nnls") {
    for (int t = 0; t < 100; ++t) {
        Mat a = random_mat(6, 3);
        Vec x0 = random_vec(3);
        Vec b = matvec(a, x0);
        Vec x = least_squares(a, b);
        CHECK(norm_inf(sub(x, x0)) < 1e-8);
    }
    for (int t = 0; t < 100; ++t) {
        Mat a = random_mat(5, 4);
        Vec b = random_vec(5);
        Vec x = nnls(a, b);
        for (std::size_t j = 0; j < 4; ++j) CHECK(x[j] >= -1e-12);
        // KKT: gradient of 0.5||Ax-b||^2 nonnegative at zeros, ~0 at positives
        Vec g = mat_t_vec(a, sub(matvec(a, x), b));
        for (std::size_t j = 0; j < 4; ++j) {
            if (x[j] > 1e-10)
                CHECK(std::abs(g[j]) < 1e-7);
            else
                CHECK(g[j] > -1e-7);
        }
    }
}

TEST_CASE("csv and json round trips") {
    for (int t = 0; t < 20; ++t) {
        Mat a = random_mat(3, 4, 1e3);
        Mat b = io::matrix_from_csv(io::matrix_to_csv(a));
        REQUIRE(b.rows() == a.rows());
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 4; ++j) CHECK(b(i, j) == a(i, j));
        Mat c = io::matrix_from_json(io::matrix_to_json(a));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 4; ++j) CHECK(c(i, j) == a(i, j));
        Vec v = random_vec(6, 1e-3);
        CHECK(io::vector_from_csv(io::vector_to_csv(v)).raw() == v.raw());
        CHECK(io::vector_from_json(io::vector_to_json(v)).raw() == v.raw());
    }
}

TEST_CASE("index sets") {
    IndexSet s({4, 1, 2});
    CHECK(s.items() == std::vector<int>{1, 2, 4});
    CHECK(s.contains(2));
    CHECK(!s.contains(3));
    CHECK(s.complement(6).items() == std::vector<int>{0, 3, 5});
    CHECK_THROWS_AS(IndexSet({1, 1}), BadDimensions);
}
