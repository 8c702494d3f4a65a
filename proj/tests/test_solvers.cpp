#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sparsestab/solvers.hpp"

using namespace sparsestab;
using namespace sparsestab::solve;

namespace {

std::mt19937_64 rng(20240);
double unif(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}
Mat random_mat(std::size_t m, std::size_t n) {
    Mat a(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = unif();
    return a;
}

// oracle: min ||x||_1 s.t. Ax = y over basic solutions
double l1_min_oracle(const Mat& a, const Vec& y) {
    std::size_t m = a.rows(), n = a.cols();
    double best = kInf;
    std::vector<std::size_t> comb(m);
    for (std::size_t i = 0; i < m; ++i) comb[i] = i;
    while (true) {
        Mat sq(m, m, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) sq(i, j) = a(i, comb[j]);
        if (auto sol = solve_square(sq, y, 1e-10)) best = std::min(best, norm1(*sol));
        std::size_t k = m;
        while (k > 0 && comb[k - 1] == n - m + (k - 1)) --k;
        if (k == 0) break;
        ++comb[k - 1];
        for (std::size_t j = k; j < m; ++j) comb[j] = comb[j - 1] + 1;
    }
    return best;
}

Instance basic_instance() {
    Instance inst;
    inst.A = Mat{{1, 0, 1}, {0, 1, 1}};
    inst.mspec = MSpec::same_as_a();
    inst.y = matvec(inst.A, Vec{0, 0, 1});
    inst.phi = NormSpec::mixed(1.0);
    inst.tau = 0.0;
    return inst;
}

// Frank-Wolfe oracle for min ||Ax-y||_2 over the l1 ball of radius mu;
// exact line search on the quadratic 0.5||Ax-y||^2
double lasso_fw_oracle(const Mat& a, const Vec& y, double mu, int iters = 20000) {
    std::size_t n = a.cols();
    Vec x(n, 0.0);
    for (int t = 0; t < iters; ++t) {
        Vec r = sub(matvec(a, x), y);
        Vec g = mat_t_vec(a, r);
        std::size_t best = 0;
        for (std::size_t j = 1; j < n; ++j)
            if (std::abs(g[j]) > std::abs(g[best])) best = j;
        Vec s(n, 0.0);
        s[best] = g[best] > 0 ? -mu : mu;
        Vec d = sub(s, x);
        Vec ad = matvec(a, d);
        double denom = dot(ad, ad);
        if (denom < 1e-16) break;
        double gamma = std::clamp(-dot(r, ad) / denom, 0.0, 1.0);
        if (gamma < 1e-14) break;
        for (std::size_t j = 0; j < n; ++j) x[j] += gamma * d[j];
    }
    return norm2(sub(matvec(a, x), y));
}

}  // namespace

TEST_CASE("instance json round trip and validation") {
    Instance inst = basic_instance();
    inst.tau = 0.25;
    Instance back = instance_from_json(instance_to_json(inst));
    CHECK(back.A(0, 2) == 1.0);
    CHECK(*back.tau == doctest::Approx(0.25));
    CHECK(back.phi.kind() == NormSpec::Kind::MixedInfOne);

    Instance bad = inst;
    bad.A = Mat{{1, 0, 1}, {2, 0, 2}};  // rank 1
    CHECK_THROWS_AS(bad.validate(), BadDimensions);

    Instance lp2;
    lp2.A = Mat{{1, 0, 1}, {0, 1, 1}};
    lp2.mspec = MSpec::identity();
    lp2.y = Vec{1, 1};
    lp2.phi = NormSpec::lp(2);
    lp2.mu = 2.0;
    std::string js = instance_to_json(lp2);
    Instance lp2b = instance_from_json(js);
    CHECK(*lp2b.mu == doctest::Approx(2.0));
    CHECK(lp2b.q() == 2);
}

TEST_CASE("linear selector: zero solution when tau is generous") {
    Instance inst = basic_instance();
    inst.tau = 10.0;  // x = 0 feasible since phi(M^T y) <= tau
    SolveResult r = solve_ds_linear(inst);
    CHECK(r.value == doctest::Approx(0.0));
    CHECK(norm_inf(r.xstar) < 1e-9);
}

TEST_CASE("linear selector at tau=0 equals l1 minimization") {
    Instance inst = basic_instance();
    SolveResult r = solve_ds_linear(inst);
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.xstar[2] == doctest::Approx(1.0));
    CHECK(std::abs(r.xstar[0]) < 1e-9);

    // alpha = 0 collapses to the same solution at tau = 0
    Instance inst0 = inst;
    inst0.phi = NormSpec::mixed(0.0);
    SolveResult r0 = solve_ds_linear(inst0);
    CHECK(r0.value == doctest::Approx(r.value));
    CHECK(norm_inf(sub(r0.xstar, r.xstar)) < 1e-8);

    for (int t = 0; t < 15; ++t) {
        Instance g;
        g.A = random_mat(2, 5);
        g.mspec = MSpec::same_as_a();
        Vec x0(5, 0.0);
        x0[t % 5] = unif(0.5, 1.5);
        g.y = matvec(g.A, x0);
        g.phi = NormSpec::mixed(1.0);
        g.tau = 0.0;
        SolveResult rr = solve_ds_linear(g);
        CHECK(rr.value == doctest::Approx(l1_min_oracle(g.A, g.y)).epsilon(1e-7));
    }
}

TEST_CASE("linear selector duals satisfy the dual program") {
    for (int t = 0; t < 20; ++t) {
        Instance g;
        g.A = random_mat(3, 6);
        g.mspec = (t % 2) ? MSpec::same_as_a() : MSpec::identity();
        Vec x0(6, 0.0);
        x0[t % 6] = 1.0;
        x0[(t + 3) % 6] = -0.5;
        g.y = matvec(g.A, x0);
        g.phi = NormSpec::mixed(t % 3 == 0 ? 1.0 : (t % 3 == 1 ? 0.0 : 0.5));
        g.tau = 0.05 + 0.1 * (t % 4);
        SolveResult r = solve_ds_linear(g);
        REQUIRE(r.dual_w.size() == 7);
        CHECK(dual_feasibility_residual(g, KktVariant::LinearDS, r.dual_w) <= 1e-8);
        // strong duality: dual objective equals the primal value
        Vec by = mat_t_vec(g.M(), g.y);
        double dualobj = -(*g.tau) * r.dual_w[2][0];
        for (std::size_t k = 0; k < g.q(); ++k)
            dualobj += by[k] * (r.dual_w[3][k] - r.dual_w[4][k] - r.dual_w[5][k] + r.dual_w[6][k]);
        CHECK(dualobj == doctest::Approx(r.value).epsilon(1e-7));
    }
}

TEST_CASE("kkt system dimensions and membership") {
    Instance g;
    g.A = random_mat(2, 4);  // n = 4
    std::size_t n = 4, q = 2;
    g.mspec = MSpec::identity();
    Vec x0(n, 0.0);
    x0[1] = 1.0;
    g.y = matvec(g.A, x0);
    g.phi = NormSpec::mixed(0.5);
    g.tau = 0.1;
    KktSystem sys = build_kkt_linear(g);
    CHECK(sys.M1.rows() == 5 * n + 9 * q + 3);
    CHECK(sys.M2.rows() == n + 1);
    CHECK(sys.width() == 4 * n + 2 + 5 * q);
    REQUIRE(sys.layout.size() == 11);
    CHECK(sys.layout[0].name == "x");
    CHECK(sys.layout[10].name == "w7");

    // a solver optimum assembled with (t,xi,v) = (|x|, ||theta||_inf, |theta|)
    // and its duals must lie in the optimality set
    SolveResult r = solve_ds_linear(g);
    Vec theta = mat_t_vec(g.M(), sub(matvec(g.A, r.xstar), g.y));
    std::vector<Vec> blocks = {r.xstar,        abs_vec(r.xstar), Vec{norm_inf(theta)},
                               abs_vec(theta), r.dual_w[0],      r.dual_w[1],
                               r.dual_w[2],    r.dual_w[3],      r.dual_w[4],
                               r.dual_w[5],    r.dual_w[6]};
    Vec z = sys.assemble(blocks);
    CHECK(sys.residual(z) <= 1e-7);

    // perturbing one coordinate of x breaks membership
    blocks[0][0] += 0.1;
    CHECK(sys.residual(sys.assemble(blocks)) > 1e-4);
}

TEST_CASE("dual certificate construction for the linear selector") {
    Instance g;
    g.A = Mat{{1, 0, 1}, {0, 1, 1}};
    g.mspec = MSpec::same_as_a();
    Vec xhat{0, 0, 0.7};
    g.y = matvec(g.A, xhat);
    g.tau = 0.05;
    for (double alpha : {1.0, 0.0, 0.5}) {
        g.phi = NormSpec::mixed(alpha);
        // pattern for S1 = {2}: zeta_3 = 1 via u = (0.5, 0.5)
        Vec u{0.5, 0.5};
        Vec zeta = mat_t_vec(g.A, u);
        CertificateBundle cert =
            construct_dual_certificate(g, xhat, 1, zeta, u, KktVariant::LinearDS);
        CHECK(cert.dual_residual <= 1e-9);
        REQUIRE(cert.w.size() == 7);
        // w1 - w2 must reproduce zeta
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(cert.w[0][i] - cert.w[1][i] == doctest::Approx(zeta[i]).epsilon(1e-12));
        if (alpha == 1.0) {
            CHECK(norm_inf(cert.w[5]) == 0.0);  // w6
            CHECK(norm_inf(cert.w[6]) == 0.0);  // w7
        }
        if (alpha == 0.0) {
            CHECK(norm_inf(cert.w[3]) == 0.0);  // w4
            CHECK(norm_inf(cert.w[4]) == 0.0);  // w5
        }
    }
    // wrong pattern rejected
    Vec ubad{0.0, 0.0};
    Vec zbad = mat_t_vec(g.A, ubad);
    CHECK_THROWS_AS(construct_dual_certificate(g, xhat, 1, zbad, ubad, KktVariant::LinearDS),
                    PatternInfeasible);
}

TEST_CASE("nonlinear selector: relaxation values are monotone, bracket is tight") {
    Instance g;
    g.A = Mat{{1.0, 0.2, -0.4}, {-0.3, 1.1, 0.5}};
    g.mspec = MSpec::identity();
    Vec xhat{0, 0, 1.2};
    g.y = matvec(g.A, xhat);
    g.phi = NormSpec::lp(2);
    g.tau = 0.1;
    ball::EpsSchedule sched;
    SolveResult r = solve_ds_nonlinear(g, sched, 0.01);
    REQUIRE(r.trace.size() >= 2);
    for (std::size_t j = 0; j + 1 < r.trace.size(); ++j)
        CHECK(r.trace[j].value <= r.trace[j + 1].value + 1e-9);
    CHECK(r.stop_level >= 1);
    CHECK(r.nhat > 0);
    CHECK(r.feas_residual <= 1e-6 * (*g.tau));
    CHECK(r.lower_bound <= r.value + 1e-12);
    CHECK(r.value - r.lower_bound <= 1e-4 * std::max(1.0, r.lower_bound));

    // routing: p = inf behaves exactly like the linear path
    Instance gi = g;
    gi.phi = NormSpec::lp(kInf);
    SolveResult ri = solve_ds_nonlinear(gi, sched, 0.01);
    Instance gl = g;
    gl.phi = NormSpec::mixed(1.0);
    SolveResult rl = solve_ds_linear(gl);
    CHECK(ri.value == doctest::Approx(rl.value).epsilon(1e-9));
}

TEST_CASE("nonlinear selector stopping statistic decreases to delta") {
    Instance g;
    g.A = Mat{{1.0, 0.2, -0.4}, {-0.3, 1.1, 0.5}};
    g.mspec = MSpec::identity();
    g.y = matvec(g.A, Vec{0, 0, 1.2});
    g.phi = NormSpec::lp(2);
    g.tau = 0.1;
    SolveResult r = solve_ds_nonlinear(g, ball::EpsSchedule(), 0.01);
    double last = kInf;
    bool reached = false;
    for (const auto& te : r.trace) {
        if (te.hausdorff_stat < 0) continue;
        CHECK(te.hausdorff_stat <= last + 1e-9);
        last = te.hausdorff_stat;
        if (te.hausdorff_stat <= 0.01) reached = true;
    }
    CHECK(reached);
}

TEST_CASE("nonlinear selector with a generous tau returns zero") {
    Instance g;
    g.A = Mat{{1.0, 0.2, -0.4}, {-0.3, 1.1, 0.5}};
    g.mspec = MSpec::identity();
    g.y = matvec(g.A, Vec{0, 0, 0.4});  // 1-sparse truth, small data
    g.phi = NormSpec::lp(2);
    g.tau = 50.0;  // x = 0 is feasible
    SolveResult r = solve_ds_nonlinear(g, ball::EpsSchedule(), 0.5);
    CHECK(r.value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(norm_inf(r.xstar) < 1e-8);
}

TEST_CASE("relaxed optima lie in the nonlinear optimality sets") {
    Instance g;
    g.A = Mat{{1.0, 0.2, -0.4}, {-0.3, 1.1, 0.5}};
    g.mspec = MSpec::identity();
    g.y = matvec(g.A, Vec{0, 0, 1.2});
    g.phi = NormSpec::lp(2);
    g.tau = 0.1;
    SolveResult r = solve_ds_nonlinear(g, ball::EpsSchedule(), 0.01);
    REQUIRE(r.relax_poly);
    KktSystem sys = build_kkt_nonlinear(g, *r.relax_poly);
    Vec z = sys.assemble({r.x_relaxed, abs_vec(r.x_relaxed), r.dual_w[0], r.dual_w[1],
                          r.dual_w[2]});
    CHECK(sys.residual(z) <= 1e-7);

    Instance gl = g;
    gl.tau.reset();
    gl.mu = 0.9;
    SolveResult rl = solve_lasso(gl, ball::EpsSchedule(), 0.01);
    REQUIRE(rl.relax_poly);
    KktSystem lsys = build_kkt_lasso(gl, *rl.relax_poly);
    Vec zl = lsys.assemble({rl.x_relaxed, abs_vec(rl.x_relaxed), Vec{rl.lower_bound},
                            rl.dual_w[0], rl.dual_w[1], rl.dual_w[2], rl.dual_w[3]});
    CHECK(lsys.residual(zl) <= 1e-7);
}

TEST_CASE("nonlinear selector with tau = 0 falls back to the equality system") {
    Instance g;
    g.A = Mat{{1, 0, 1}, {0, 1, 1}};
    g.mspec = MSpec::identity();
    g.y = matvec(g.A, Vec{0, 0, 1});
    g.phi = NormSpec::lp(2);
    g.tau = 0.0;
    SolveResult r = solve_ds_nonlinear(g, ball::EpsSchedule(), 0.01);
    CHECK(r.value == doctest::Approx(1.0));
}

TEST_CASE("lasso: consistent data with a generous budget reaches zero") {
    Instance g;
    g.A = Mat{{1, 0, 1}, {0, 1, 1}};
    g.mspec = MSpec::identity();
    g.y = matvec(g.A, Vec{0, 0, 1});
    g.phi = NormSpec::lp(2);
    g.mu = 2.0;  // >= ||xhat||_1
    SolveResult r = solve_lasso(g, ball::EpsSchedule(), 0.01);
    CHECK(r.value <= 1e-6);
    CHECK(norm1(r.xstar) <= 2.0 + 1e-9);

    g.mu = 0.0;
    CHECK_THROWS_AS(g.validate(), BadDimensions);
}

TEST_CASE("lasso matches the frank-wolfe oracle") {
    Instance g;
    g.A = Mat{{1.0, 0.3, -0.2, 0.5}, {-0.4, 1.0, 0.6, -0.1}};
    g.mspec = MSpec::identity();
    g.y = Vec{1.0, -0.6};
    g.phi = NormSpec::lp(2);
    g.mu = 0.4;
    SolveResult r = solve_lasso(g, ball::EpsSchedule(), 0.005);
    double oracle = lasso_fw_oracle(g.A, g.y, 0.4);
    CHECK(r.value == doctest::Approx(oracle).epsilon(1e-4));
    CHECK(norm1(r.xstar) <= 0.4 + 1e-9);
    for (std::size_t j = 0; j + 1 < r.trace.size(); ++j)
        CHECK(r.trace[j].value <= r.trace[j + 1].value + 1e-9);

    // polyhedral norm solves in one shot
    Instance gl = g;
    gl.phi = NormSpec::lp(kInf);
    SolveResult rl = solve_lasso(gl, ball::EpsSchedule(), 0.01);
    CHECK(rl.trace.size() == 1);
    CHECK(rl.value == doctest::Approx(rl.lower_bound).epsilon(1e-8));
}

TEST_CASE("nonlinear kkt systems and certificates") {
    Instance g;
    g.A = Mat{{1.0, 0.2, -0.4}, {-0.3, 1.1, 0.5}};
    g.mspec = MSpec::identity();
    g.y = matvec(g.A, Vec{0, 0, 1.2});
    g.phi = NormSpec::lp(2);
    g.tau = 0.1;
    ball::EpsSchedule sched;
    ball::Polytope Q = ball::build_Q(g.phi, 2, sched, 2);
    KktSystem sys = build_kkt_nonlinear(g, Q);
    CHECK(sys.width() == 4 * 3 + Q.generators().size());
    CHECK(sys.M2.rows() == 3 + 1);
    CHECK(sys.M1.rows() == 6 * 3 + 2 * Q.generators().size());

    Vec u = Vec{0.1, -0.2};
    Vec zeta = mat_t_vec(g.A, u);  // small entries: valid k = 0 pattern
    CertificateBundle cert =
        construct_dual_certificate(g, Vec{0, 0, 0}, 0, zeta, u, KktVariant::NonlinearDS, &Q);
    CHECK(cert.dual_residual <= 1e-9);

    Instance gl = g;
    gl.tau.reset();
    gl.mu = 1.0;
    KktSystem lsys = build_kkt_lasso(gl, Q);
    CHECK(lsys.width() == 4 * 3 + 2 + Q.generators().size());
    CHECK(lsys.M1.rows() == 6 * 3 + 4 + 2 * Q.generators().size());
    CertificateBundle lcert =
        construct_dual_certificate(gl, Vec{0, 0, 0}, 0, zeta, u, KktVariant::Lasso, &Q, 3.0);
    CHECK(lcert.dual_residual <= 1e-9);
    CHECK_THROWS_AS(
        construct_dual_certificate(gl, Vec{0, 0, 0}, 0, zeta, u, KktVariant::Lasso, &Q),
        MissingConstant);
}

TEST_CASE("weighted transform") {
    Instance g;
    g.A = Mat{{1, 0, 1}, {0, 1, 1}};
    g.mspec = MSpec::same_as_a();
    g.y = matvec(g.A, Vec{0, 0, 1});
    g.phi = NormSpec::mixed(1.0);
    g.tau = 0.01;

    Instance id = weighted_ds_transform(g, Vec{1, 1, 1});
    CHECK(norm_inf(sub(id.A.row_vec(0), g.A.row_vec(0))) == 0.0);

    Instance half = weighted_ds_transform(g, Vec{2, 2, 2});
    CHECK(half.A(0, 0) == doctest::Approx(0.5));
    // M stays the original A
    CHECK(half.M()(0, 0) == doctest::Approx(1.0));
    // with W = 2I the transformed solution is u = W x
    SolveResult ru = solve_ds_linear(half);
    SolveResult rx = solve_ds_linear(g);
    Vec mapped_back(3);
    for (int i = 0; i < 3; ++i) mapped_back[i] = ru.xstar[i] / 2.0;
    CHECK(norm_inf(sub(mapped_back, rx.xstar)) < 1e-7);

    CHECK_THROWS_AS(weighted_ds_transform(g, Vec{1, 0, 1}), SingularWeight);
}

TEST_CASE("solution-set distance") {
    Instance g;
    g.A = Mat{{1, 0, 1}, {0, 1, 1}};
    g.mspec = MSpec::same_as_a();
    g.y = matvec(g.A, Vec{0, 0, 1});
    g.phi = NormSpec::mixed(1.0);
    g.tau = 0.0;
    SolveResult r = solve_ds_linear(g);
    CHECK(distance_to_solution_set(g, r, r.xstar) < 1e-7);
    double d = distance_to_solution_set(g, r, Vec{1, 1, 1});
    CHECK(d > 0.1);
}

TEST_CASE("redundant row pruning") {
    Mat g{{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 0}, {0.5, 0}};
    Vec h{1, 1, 1, 1, 2, 3};  // last two rows are dominated
    ball::HPoly pruned = prune_redundant(ball::HPoly::from_rows(g, h));
    CHECK(pruned.G.rows() == 4);
}
