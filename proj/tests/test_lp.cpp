#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "sparsestab/lp.hpp"

using namespace sparsestab;
using namespace sparsestab::lp;

namespace {

std::mt19937_64 rng(777);
double unif(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// oracle: min ||x||_1 s.t. Ax=y by basic-solution enumeration over supports
double l1_min_oracle(const Mat& a, const Vec& y) {
    std::size_t m = a.rows(), n = a.cols();
    double best = kInf;
    std::vector<std::size_t> idx(m);
    // all m-subsets of columns
    std::vector<std::size_t> comb(m);
    for (std::size_t i = 0; i < m; ++i) comb[i] = i;
    while (true) {
        Mat sq(m, m, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) sq(i, j) = a(i, comb[j]);
        if (auto sol = solve_square(sq, y, 1e-10)) {
            double v = norm1(*sol);
            best = std::min(best, v);
        }
        std::size_t k = m;
        while (k > 0 && comb[k - 1] == n - m + (k - 1)) --k;
        if (k == 0) break;
        ++comb[k - 1];
        for (std::size_t j = k; j < m; ++j) comb[j] = comb[j - 1] + 1;
    }
    return best;
}

LpProblem l1_min_as_lp(const Mat& a, const Vec& y) {
    // variables (x, t); min e^T t s.t. x<=t, -x<=t, Ax=y
    std::size_t n = a.cols();
    LpProblem p(2 * n);
    for (std::size_t j = 0; j < n; ++j) p.c[n + j] = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        Vec r1(2 * n, 0.0), r2(2 * n, 0.0);
        r1[j] = 1.0;
        r1[n + j] = -1.0;
        r2[j] = -1.0;
        r2[n + j] = -1.0;
        p.add_ineq(r1, 0.0);
        p.add_ineq(r2, 0.0);
    }
    for (std::size_t i = 0; i < a.rows(); ++i) {
        Vec r(2 * n, 0.0);
        for (std::size_t j = 0; j < n; ++j) r[j] = a(i, j);
        p.add_eq(r, y[i]);
    }
    return p;
}

void check_optimal_invariants(const LpProblem&, const LpSolution& s) {
    REQUIRE(s.status == Status::Optimal);
    CHECK(s.primal_residual <= 1e-8);
    CHECK(s.dual_residual <= 1e-8);
    CHECK(s.compl_residual <= 1e-7);
    CHECK(s.gap <= 1e-8 * (1.0 + std::abs(s.value)));
    for (std::size_t i = 0; i < s.dual_ineq.size(); ++i) CHECK(s.dual_ineq[i] >= 0.0);
}

}  // namespace

TEST_CASE("trivial solves") {
    // min x1+x2 s.t. x1+x2 >= 1, x >= 0
    LpProblem p(2);
    p.c = Vec{1, 1};
    p.nonneg = {true, true};
    p.add_ineq(Vec{-1, -1}, -1.0);
    LpSolution s = solve(p);
    CHECK(s.value == doctest::Approx(1.0));
    check_optimal_invariants(p, s);

    // max x s.t. x <= 0, x >= 1 : infeasible
    LpProblem q(1);
    q.c = Vec{1};
    q.sense = Sense::Max;
    q.add_ineq(Vec{1}, 0.0);
    q.add_ineq(Vec{-1}, -1.0);
    CHECK(solve(q).status == Status::Infeasible);

    // unbounded
    LpProblem u(1);
    u.c = Vec{1};
    u.sense = Sense::Max;
    u.add_ineq(Vec{-1}, 0.0);
    CHECK(solve(u).status == Status::Unbounded);
}

TEST_CASE("l1 minimization against the hand oracle") {
    Mat a{{1, 0, 1}, {0, 1, 1}};
    Vec y{1, 1};
    LpProblem p = l1_min_as_lp(a, y);
    LpSolution s = solve(p);
    CHECK(s.value == doctest::Approx(1.0));
    CHECK(s.z[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(s.z[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(s.z[2] == doctest::Approx(1.0));
    check_optimal_invariants(p, s);

    for (int t = 0; t < 30; ++t) {
        Mat rnd(3, 6);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 6; ++j) rnd(i, j) = unif();
        Vec y2(3);
        for (auto& v : y2) v = unif();
        LpProblem lp2 = l1_min_as_lp(rnd, y2);
        LpSolution s2 = solve(lp2);
        if (s2.status != Status::Optimal) continue;
        CHECK(s2.value == doctest::Approx(l1_min_oracle(rnd, y2)).epsilon(1e-8));
        check_optimal_invariants(lp2, s2);
    }
}

TEST_CASE("feasibility probe") {
    LpProblem p(1);
    p.add_ineq(Vec{1}, 1.0);
    p.add_ineq(Vec{-1}, 0.0);
    auto [ok, w] = feasible(p);
    CHECK(ok);
    CHECK((*w)[0] >= -1e-9);
    CHECK((*w)[0] <= 1.0 + 1e-9);

    LpProblem q(1);
    q.add_ineq(Vec{1}, -1.0);
    q.add_ineq(Vec{-1}, 0.0);
    CHECK(!feasible(q).first);
}

TEST_CASE("value invariant under row permutation") {
    for (int t = 0; t < 20; ++t) {
        std::size_t n = 3, r = 6;
        LpProblem p(n);
        for (auto& c : p.c) c = unif();
        std::vector<std::pair<Vec, double>> rows;
        for (std::size_t i = 0; i < r; ++i) {
            Vec row(n);
            for (auto& v : row) v = unif();
            rows.push_back({row, unif(0.5, 2.0)});
        }
        // box to keep it bounded
        for (std::size_t j = 0; j < n; ++j) {
            Vec e(n, 0.0);
            e[j] = 1.0;
            rows.push_back({e, 3.0});
            e[j] = -1.0;
            rows.push_back({e, 3.0});
        }
        LpProblem p1 = p, p2 = p;
        for (const auto& [row, rhs] : rows) p1.add_ineq(row, rhs);
        std::vector<std::size_t> perm(rows.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i : perm) p2.add_ineq(rows[i].first, rows[i].second);
        LpSolution s1 = solve(p1), s2 = solve(p2);
        REQUIRE(s1.status == Status::Optimal);
        REQUIRE(s2.status == Status::Optimal);
        CHECK(s1.value == doctest::Approx(s2.value).epsilon(1e-9));
    }
}

TEST_CASE("vertex enumeration") {
    // unit square
    Mat g{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    Vec h{1, 1, 1, 1};
    VertexSet vs = enumerate_vertices(g, h);
    CHECK(vs.size() == 4);

    // triangle
    Mat g2{{-1, 0}, {0, -1}, {1, 1}};
    Vec h2{0, 0, 1};
    CHECK(enumerate_vertices(g2, h2).size() == 3);

    // cross-polytope
    Mat g3{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    Vec h3{1, 1, 1, 1};
    VertexSet vs3 = enumerate_vertices(g3, h3);
    CHECK(vs3.size() == 4);
    for (const Vec& v : vs3) CHECK(norm1(v) == doctest::Approx(1.0));

    // every vertex strictly satisfies non-active rows
    for (const Vec& v : vs3) {
        Vec gz = matvec(g3, v);
        for (std::size_t i = 0; i < 4; ++i) CHECK(gz[i] <= h3[i] + 1e-9);
    }

    // unbounded detection
    Mat g4{{1, 0}, {0, 1}};
    Vec h4{1, 1};
    CHECK_THROWS_AS(enumerate_vertices(g4, h4), Unbounded);
    CHECK_THROWS_AS(enumerate_vertices(Mat::empty(41, 2), Vec(41, 1.0)), SizeLimit);
}

TEST_CASE("duality on random bounded problems") {
    for (int t = 0; t < 50; ++t) {
        std::size_t n = 4;
        LpProblem p(n);
        for (auto& c : p.c) c = unif();
        for (int i = 0; i < 5; ++i) {
            Vec row(n);
            for (auto& v : row) v = unif();
            p.add_ineq(row, unif(0.2, 1.5));
        }
        for (std::size_t j = 0; j < n; ++j) {
            Vec e(n, 0.0);
            e[j] = 1.0;
            p.add_ineq(e, 2.0);
            e[j] = -1.0;
            p.add_ineq(e, 2.0);
        }
        Vec eq(n);
        for (auto& v : eq) v = unif();
        p.add_eq(eq, 0.1);
        LpSolution s = solve(p);
        if (s.status != Status::Optimal) continue;
        check_optimal_invariants(p, s);
    }
}

TEST_CASE("duality on max-sense problems") {
    for (int t = 0; t < 30; ++t) {
        std::size_t n = 3;
        LpProblem p(n);
        p.sense = Sense::Max;
        p.nonneg.assign(n, true);
        for (auto& c : p.c) c = unif(-1, 1);
        for (int i = 0; i < 4; ++i) {
            Vec row(n);
            for (auto& v : row) v = unif(0.1, 1.0);
            p.add_ineq(row, unif(0.5, 2.0));
        }
        Vec eq(n);
        for (auto& v : eq) v = unif(0.2, 1.0);
        p.add_eq(eq, 0.7);
        LpSolution s = solve(p);
        if (s.status != Status::Optimal) continue;
        check_optimal_invariants(p, s);
        // explicit strong duality: h^T lambda + f^T nu == value
        double dual_value = dot(p.h, s.dual_ineq) + dot(p.f, s.dual_eq);
        CHECK(dual_value == doctest::Approx(s.value).epsilon(1e-8));
    }
}

TEST_CASE("mixed dual norm agrees with its lp evaluation") {
    // phi*(v) = max v.u over alpha ||u||_inf + (1-alpha) ||u||_1 <= 1, written
    // as an lp over (u, w, s) with |u_i| <= w_i, |u_i| <= s
    auto lp_dual_norm = [](const Vec& v, double alpha) {
        std::size_t n = v.size();
        LpProblem p(2 * n + 1);  // u, w, s
        p.sense = Sense::Max;
        for (std::size_t i = 0; i < n; ++i) p.c[i] = v[i];
        for (std::size_t i = 0; i < n; ++i) {
            p.nonneg[n + i] = true;
            Vec r1(2 * n + 1, 0.0), r2(2 * n + 1, 0.0), r3(2 * n + 1, 0.0), r4(2 * n + 1, 0.0);
            r1[i] = 1.0;
            r1[n + i] = -1.0;  // u <= w
            r2[i] = -1.0;
            r2[n + i] = -1.0;  // -u <= w
            r3[i] = 1.0;
            r3[2 * n] = -1.0;  // u <= s
            r4[i] = -1.0;
            r4[2 * n] = -1.0;  // -u <= s
            p.add_ineq(r1, 0.0);
            p.add_ineq(r2, 0.0);
            p.add_ineq(r3, 0.0);
            p.add_ineq(r4, 0.0);
        }
        p.nonneg[2 * n] = true;
        Vec budget(2 * n + 1, 0.0);
        budget[2 * n] = alpha;
        for (std::size_t i = 0; i < n; ++i) budget[n + i] = 1.0 - alpha;
        p.add_ineq(budget, 1.0);
        return solve(p).value;
    };
    for (double alpha : {0.0, 0.3, 0.7, 1.0}) {
        NormSpec spec = NormSpec::mixed(alpha);
        for (int t = 0; t < 40; ++t) {
            Vec v(4);
            for (auto& x : v) x = unif(-2, 2);
            CHECK(dual_norm(v, spec) ==
                  doctest::Approx(lp_dual_norm(v, alpha)).epsilon(1e-9));
        }
    }
}

TEST_CASE("debug dump mentions every row") {
    LpProblem p(2);
    p.c = Vec{1, 0};
    p.add_ineq(Vec{1, 1}, 2.0);
    p.add_eq(Vec{1, -1}, 0.0);
    std::string d = dump(p);
    CHECK(d.find("ineq 0") != std::string::npos);
    CHECK(d.find("eq   0") != std::string::npos);
}
