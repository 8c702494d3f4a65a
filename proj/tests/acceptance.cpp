// Acceptance suite: one pass/fail line per criterion. Run with no arguments
// for the full gate or with a single criterion number.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "sparsestab/bench.hpp"
#include "sparsestab/bounds.hpp"
#include "sparsestab/certify.hpp"
#include "sparsestab/solvers.hpp"

using namespace sparsestab;

namespace {

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<bool(std::string&)> run;
};

bool approx_le(double a, double b, double slack) { return a <= b + slack; }

// fine-discretization oracle: the residual-bounded selector against an
// explicit K-gon outer polytope of the euclidean ball, solved through the
// dual-orientation LP written out here
double ds_fine_oracle(const solve::Instance& inst, int kgon) {
    std::size_t n = inst.n();
    Mat b = matmul(inst.M().transposed(), inst.A);
    Vec by = mat_t_vec(inst.M(), inst.y);
    std::vector<Vec> gens;
    for (int i = 0; i < kgon; ++i) {
        double th = 2.0 * M_PI * i / kgon;
        gens.push_back(Vec{std::cos(th), std::sin(th)});
    }
    std::size_t nh = gens.size();
    lp::LpProblem p(2 * n + nh);
    p.sense = lp::Sense::Max;
    p.nonneg.assign(2 * n + nh, true);
    for (std::size_t g = 0; g < nh; ++g)
        p.c[2 * n + g] = -(*inst.tau + dot(gens[g], by));
    for (std::size_t j = 0; j < n; ++j) {
        Vec r(2 * n + nh, 0.0);
        r[j] = 1.0;
        r[n + j] = -1.0;
        for (std::size_t g = 0; g < nh; ++g) r[2 * n + g] = dot(gens[g], b.col_vec(j));
        p.add_eq(r, 0.0);
    }
    for (std::size_t j = 0; j < n; ++j) {
        Vec r(2 * n + nh, 0.0);
        r[j] = 1.0;
        r[n + j] = 1.0;
        p.add_ineq(r, 1.0);
    }
    lp::LpSolution s = lp::solve(p);
    return s.value;
}

double lasso_fine_oracle(const solve::Instance& inst, int kgon) {
    std::size_t n = inst.n();
    Mat b = matmul(inst.M().transposed(), inst.A);
    Vec by = mat_t_vec(inst.M(), inst.y);
    std::vector<Vec> gens;
    for (int i = 0; i < kgon; ++i) {
        double th = 2.0 * M_PI * i / kgon;
        gens.push_back(Vec{std::cos(th), std::sin(th)});
    }
    std::size_t nh = gens.size();
    std::size_t nv = 2 * n + 1 + nh;
    lp::LpProblem p(nv);
    p.sense = lp::Sense::Max;
    p.nonneg.assign(nv, true);
    p.c[2 * n] = -(*inst.mu);
    for (std::size_t g = 0; g < nh; ++g) p.c[2 * n + 1 + g] = -dot(gens[g], by);
    for (std::size_t j = 0; j < n; ++j) {
        Vec r(nv, 0.0);
        r[j] = 1.0;
        r[n + j] = -1.0;
        for (std::size_t g = 0; g < nh; ++g) r[2 * n + 1 + g] = dot(gens[g], b.col_vec(j));
        p.add_eq(r, 0.0);
    }
    for (std::size_t j = 0; j < n; ++j) {
        Vec r(nv, 0.0);
        r[j] = 1.0;
        r[n + j] = 1.0;
        r[2 * n] = -1.0;
        p.add_ineq(r, 0.0);
    }
    Vec re(nv, 0.0);
    for (std::size_t g = 0; g < nh; ++g) re[2 * n + 1 + g] = 1.0;
    p.add_ineq(re, 1.0);
    lp::LpSolution s = lp::solve(p);
    return s.value;
}

solve::Instance fixed_small_instance() {
    solve::Instance inst;
    inst.A = Mat{{1.0, 0.2, -0.4}, {-0.3, 1.1, 0.5}};
    inst.mspec = solve::MSpec::identity();
    inst.y = matvec(inst.A, Vec{0, 0, 1.2});
    inst.phi = NormSpec::lp(2);
    return inst;
}

// ---------------------------------------------------------------- criterion 1
bool exact_recovery_gate(std::string& detail) {
    bench::ExperimentConfig cfg;
    cfg.seed = 42;
    cfg.m = 4;
    cfg.n = 8;
    cfg.k = 1;
    cfg.instances = 20;
    cfg.taus = {0.0};
    cfg.noise_frac = 0.0;
    auto gens = bench::generate(cfg);
    int holding = 0, failing = 0;
    for (auto& g : gens) {
        certify::CertificateReport rs = certify::rsp(g.inst.A, 1);
        if (rs.holds) {
            ++holding;
            for (std::size_t i = 0; i < 8; ++i) {
                for (double sgn : {1.0, -1.0}) {
                    Vec xhat(8, 0.0);
                    xhat[i] = sgn;
                    solve::Instance inst;
                    inst.A = g.inst.A;
                    inst.mspec = solve::MSpec::same_as_a();
                    inst.y = matvec(inst.A, xhat);
                    inst.phi = NormSpec::mixed(1.0);
                    inst.tau = 0.0;
                    solve::SolveResult r = solve::solve_ds_linear(inst);
                    if (norm_inf(sub(r.xstar, xhat)) > 1e-6) {
                        detail = "certified instance missed a 1-sparse recovery";
                        return false;
                    }
                }
            }
        }
        certify::CertificateReport ns = certify::nsp(g.inst.A, 1, certify::NspVariant::Plain);
        if (!ns.holds) {
            ++failing;
            const Vec& zeta = *ns.counterexample_vector;
            const IndexSet& s = *ns.counterexample_support;
            Vec xhat(8, 0.0);
            for (int i : s.items()) xhat[i] = zeta[i];
            solve::Instance inst;
            inst.A = g.inst.A;
            inst.mspec = solve::MSpec::same_as_a();
            inst.y = matvec(inst.A, xhat);
            inst.phi = NormSpec::mixed(1.0);
            inst.tau = 0.0;
            solve::SolveResult r = solve::solve_ds_linear(inst);
            bool recovered = norm_inf(sub(r.xstar, xhat)) <= 1e-6;
            if (recovered) {
                detail = "null-space counterexample was recovered anyway";
                return false;
            }
        }
    }
    detail = std::to_string(holding) + " instances certified, " + std::to_string(failing) +
             " with null-space counterexamples";
    return true;
}

// ---------------------------------------------------------------- criterion 2
bool certifier_implication_chain(std::string& detail) {
    bench::ExperimentConfig cfg;
    cfg.seed = 42;
    cfg.m = 4;
    cfg.n = 10;
    cfg.k = 1;
    cfg.instances = 50;
    cfg.generator = bench::Generator::GaussianNormalized;  // scale-sensitive gates
    auto gens = bench::generate(cfg);
    const double rip_threshold = 1.0 / std::sqrt(2.0);  // 0.70711
    int violations = 0;
    for (auto& g : gens) {
        for (int k : {1, 2}) {
            certify::CertificateReport rw = certify::weak_rsp(g.inst.A, k);
            certify::CertificateReport rs = certify::rsp(g.inst.A, k);
            certify::CertificateReport rn = certify::nsp(g.inst.A, k, certify::NspVariant::Plain);
            if (rs.holds && !rw.holds) ++violations;
            if (rs.holds != rn.holds) ++violations;
            double d2k = certify::rip_delta(g.inst.A, std::min<int>(2 * k, 10));
            if (d2k < rip_threshold && !rn.holds) ++violations;
            certify::CertificateReport rc = certify::coherence_gate(g.inst.A, k);
            if (rc.holds && !rn.holds) ++violations;
        }
    }
    detail = std::to_string(violations) + " violations over 50 instances x k in {1,2}";
    return violations == 0;
}

// ---------------------------------------------------------------- criterion 3
bool hoffman_inequality(std::string& detail) {
    bench::ExperimentConfig cfg;
    cfg.seed = 42;
    cfg.instances = 10;
    cfg.probes = 1000;
    bench::RunReport rep = bench::run_experiment("hoffman", cfg);
    detail = std::to_string(rep.checks_passed) + "/" + std::to_string(rep.checks_total) +
             " system checks";
    return rep.aggregate_pass;
}

// ---------------------------------------------------------------- criterion 4
bool ds_bound_out_of_sample(std::string& detail) {
    bench::ExperimentConfig cfg;
    cfg.seed = 42;
    cfg.m = 4;
    cfg.n = 8;
    cfg.k = 1;
    cfg.instances = 10;
    cfg.probes = 100;
    cfg.generator = bench::Generator::GaussianNormalized;
    cfg.taus = {0.01, 0.1};
    cfg.alphas = {0.0, 0.5, 1.0};
    bench::RunReport rep = bench::run_experiment("t32", cfg);
    int cells = 0;
    for (auto& r : rep.records) cells += r.ok ? 1 : 0;
    detail = std::to_string(rep.checks_passed) + "/" + std::to_string(rep.checks_total) +
             " probe checks across " + std::to_string(cells) + " certified instances";
    return rep.aggregate_pass && cells == 10;
}

// ---------------------------------------------------------------- criterion 5
bool polytope_sandwich(std::string& detail) {
    NormSpec l2 = NormSpec::lp(2);
    ball::EpsSchedule sched = ball::EpsSchedule::explicit_levels({0.5, 0.25, 0.1, 0.01});
    for (int j = 1; j <= 4; ++j) {
        ball::Polytope q = ball::build_Q(l2, j, sched, 2);
        if (!ball::sandwich_check(q, l2, sched.at(j), 1000)) {
            detail = "sandwich failed at level " + std::to_string(j);
            return false;
        }
    }
    std::vector<Vec> coords = {Vec{1, 0}, Vec{-1, 0}, Vec{0, 1}, Vec{0, -1}};
    ball::Polytope square(l2, 2, coords, 0.1, false);
    if (ball::sandwich_check(square, l2, 0.1, 1000)) {
        detail = "negative control passed unexpectedly";
        return false;
    }
    detail = "4 levels certified, square control rejected";
    return true;
}

// ---------------------------------------------------------------- criterion 6
bool relaxation_convergence(std::string& detail) {
    solve::Instance inst = fixed_small_instance();
    inst.tau = 0.1;
    double delta = 0.01;  // tau / 10
    solve::SolveResult r = solve::solve_ds_nonlinear(inst, ball::EpsSchedule(), delta);
    double prev = -kInf;
    for (const auto& te : r.trace) {
        if (te.value < prev - 1e-9) {
            detail = "relaxed values not monotone";
            return false;
        }
        prev = te.value;
    }
    if (r.feas_residual > 1e-6 * (*inst.tau)) {
        detail = "final constraint violation above 1e-6 tau";
        return false;
    }
    double last_stat = kInf;
    bool reached = false;
    for (const auto& te : r.trace) {
        if (te.hausdorff_stat < 0) continue;
        if (te.hausdorff_stat > last_stat + 1e-9) {
            detail = "stopping statistic not monotone";
            return false;
        }
        last_stat = te.hausdorff_stat;
        reached = reached || te.hausdorff_stat <= delta;
    }
    if (!reached) {
        detail = "stopping statistic never reached delta";
        return false;
    }
    double oracle = ds_fine_oracle(inst, 10000);
    if (std::abs(r.value - oracle) > 1e-4 * std::abs(oracle)) {
        detail = "selector value " + std::to_string(r.value) + " vs oracle " +
                 std::to_string(oracle);
        return false;
    }

    // mirrored l1-budget run
    solve::Instance li = fixed_small_instance();
    li.mu = 0.8 * 1.2;
    solve::SolveResult rl = solve::solve_lasso(li, ball::EpsSchedule(), delta);
    prev = -kInf;
    for (const auto& te : rl.trace) {
        if (te.value < prev - 1e-9) {
            detail = "budget-problem relaxed values not monotone";
            return false;
        }
        prev = te.value;
    }
    last_stat = kInf;
    reached = false;
    for (const auto& te : rl.trace) {
        if (te.hausdorff_stat < 0) continue;
        if (te.hausdorff_stat > last_stat + 1e-9) {
            detail = "budget-problem statistic not monotone";
            return false;
        }
        last_stat = te.hausdorff_stat;
        reached = reached || te.hausdorff_stat <= delta;
    }
    if (!reached) {
        detail = "budget-problem statistic never reached delta";
        return false;
    }
    double loracle = lasso_fine_oracle(li, 10000);
    double denom = std::max(std::abs(loracle), 1e-8);
    if (std::abs(rl.value - loracle) > 1e-4 * denom) {
        detail = "budget value " + std::to_string(rl.value) + " vs oracle " +
                 std::to_string(loracle);
        return false;
    }
    detail = "selector and budget runs converged to the fine oracle";
    return true;
}

// ---------------------------------------------------------------- criterion 7
bool non_recovery_probe(std::string& detail) {
    Mat bad{{1, 0, 0}, {0, 1, 0}};
    certify::CertificateReport w = certify::weak_rsp(bad, 1);
    if (w.holds) {
        detail = "expected failing certification";
        return false;
    }
    certify::NecessityReport nr = certify::necessity_probe(bad, 1, w, {0.0, 1e-3, 1e-2});
    for (double e : nr.errors)
        if (e < 0.9) {
            detail = "recovery error dropped below 0.9";
            return false;
        }
    detail = "errors " + std::to_string(nr.errors[0]) + ", " + std::to_string(nr.errors[1]) +
             ", " + std::to_string(nr.errors[2]);
    return true;
}

// ---------------------------------------------------------------- criterion 8
bool kkt_certificate_roundtrip(std::string& detail) {
    bench::ExperimentConfig cfg;
    cfg.seed = 42;
    cfg.m = 4;
    cfg.n = 8;
    cfg.k = 1;
    cfg.instances = 10;
    cfg.probes = 10;
    cfg.generator = bench::Generator::GaussianNormalized;
    cfg.taus = {0.05};
    auto gens = bench::generate(cfg);
    int done = 0;
    for (auto& g : gens) {
        certify::CertificateReport w = certify::weak_rsp(g.inst.A, 1);
        if (!w.holds) continue;
        for (double alpha : {0.0, 0.5, 1.0}) {
            solve::Instance inst = g.inst;
            inst.phi = NormSpec::mixed(alpha);
            inst.tau = 0.05;
            // dual certificate for the top-k pattern of a sparse probe
            Vec probe(8, 0.0);
            const auto& cert = w.certificates[1];  // first nonempty pattern
            for (int i : cert.pattern.s1.items()) probe[i] = 0.7;
            for (int i : cert.pattern.s2.items()) probe[i] = -0.7;
            solve::CertificateBundle bundle = solve::construct_dual_certificate(
                inst, probe, 1, cert.zeta, cert.u, solve::KktVariant::LinearDS);
            if (bundle.dual_residual > 1e-9) {
                detail = "dual certificate residual above 1e-9";
                return false;
            }
            // the assembled proof point: the structurally-vanishing rows of
            // the optimality system must vanish; only the residual-bound row
            // and the zero-gap row may be active
            solve::KktSystem sys = solve::build_kkt_linear(inst);
            Vec theta = mat_t_vec(inst.M(), sub(matvec(inst.A, probe), inst.y));
            Vec z = sys.assemble({probe, abs_vec(probe), Vec{norm_inf(theta)},
                                  abs_vec(theta), bundle.w[0], bundle.w[1], bundle.w[2],
                                  bundle.w[3], bundle.w[4], bundle.w[5], bundle.w[6]});
            std::size_t n = 8;
            Vec g1 = matvec(sys.M1, z);
            for (std::size_t row = 0; row < sys.M1.rows(); ++row) {
                if (row == 2 * n) continue;  // residual-bound row may float
                if (g1[row] > sys.b1[row] + 1e-9) {
                    detail = "structural inequality row violated in the proof point";
                    return false;
                }
            }
            Vec g2 = matvec(sys.M2, z);
            for (std::size_t row = 0; row < n; ++row)
                if (std::abs(g2[row] - sys.b2[row]) > 1e-9) {
                    detail = "stationarity row violated in the proof point";
                    return false;
                }
            // solver optima lie in the optimality set
            solve::SolveResult solved = solve::solve_ds_linear(inst);
            Vec th2 = mat_t_vec(inst.M(), sub(matvec(inst.A, solved.xstar), inst.y));
            Vec z2 = sys.assemble({solved.xstar, abs_vec(solved.xstar), Vec{norm_inf(th2)},
                                   abs_vec(th2), solved.dual_w[0], solved.dual_w[1],
                                   solved.dual_w[2], solved.dual_w[3], solved.dual_w[4],
                                   solved.dual_w[5], solved.dual_w[6]});
            if (sys.residual(z2) > 1e-7) {
                detail = "solver optimum escapes the optimality set";
                return false;
            }
            ++done;
        }
    }
    detail = std::to_string(done) + " instance/alpha cells round-tripped";
    return done > 0;
}

// ---------------------------------------------------------------- criterion 9
bool projection_inequalities(std::string& detail) {
    bench::Rng rng(42);
    int done = 0;
    for (int t = 0; t < 500; ++t) {
        int dim = 2 + (t % 2);
        int rows = 2 * dim + 4;
        Mat g = Mat::empty(rows, dim);
        Vec h(rows);
        int r = 0;
        for (int j = 0; j < dim; ++j) {
            g(r, j) = 1.0;
            h[r++] = 1.0;
            g(r, j) = -1.0;
            h[r++] = 1.0;
        }
        for (; r < rows; ++r) {
            Vec a(dim);
            for (auto& v : a) v = rng.gaussian();
            double nr = norm2(a);
            if (nr < 1e-9) a[0] = nr = 1.0;
            for (int j = 0; j < dim; ++j) g(r, j) = a[j] / nr;
            h[r] = 0.4 + 0.6 * rng.uniform();
        }
        ball::HPoly big = ball::HPoly::from_rows(g, h);
        ball::HPoly omega = big, uset = big;
        omega.h = scale(h, 0.3 + 0.6 * rng.uniform());
        uset.h = scale(h, 0.3 + 0.6 * rng.uniform());
        double dh = ball::hausdorff_nested(omega, big);
        Vec x(dim);
        for (auto& v : x) v = 2.5 * rng.gaussian();
        Vec po = ball::project(omega, x), pt = ball::project(big, x);
        if (dot(sub(po, pt), sub(po, pt)) > dh * norm2(sub(x, po)) + 1e-7) {
            detail = "squared-projection inequality violated";
            return false;
        }
        lp::VertexSet uv = lp::enumerate_vertices(uset.G, uset.h);
        if (!uv.empty()) {
            const Vec& u = uv[t % uv.size()];
            if (norm2(sub(x, po)) > dh + 2.0 * norm2(sub(x, u)) + 1e-7) {
                detail = "distance inequality violated";
                return false;
            }
        }
        ++done;
    }
    detail = std::to_string(done) + " nested triples checked";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria = {
        {1, "exact-recovery-gate", 60, exact_recovery_gate},
        {2, "certifier-implication-chain", 120, certifier_implication_chain},
        {3, "hoffman-inequality", 120, hoffman_inequality},
        {4, "ds-bound-out-of-sample", 300, ds_bound_out_of_sample},
        {5, "polytope-sandwich", 30, polytope_sandwich},
        {6, "relaxation-convergence", 60, relaxation_convergence},
        {7, "non-recovery-probe", 5, non_recovery_probe},
        {8, "kkt-certificate-roundtrip", 60, kkt_certificate_roundtrip},
        {9, "projection-inequalities", 60, projection_inequalities},
    };
    int only = argc > 1 ? std::atoi(argv[1]) : 0;
    int failures = 0;
    for (auto& c : criteria) {
        if (only && c.id != only) continue;
        auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool in_budget = secs < c.budget_seconds;
        bool pass = ok && in_budget;
        std::printf("[%s] C%d %s (%.2fs, budget %.0fs)%s%s\n", pass ? "PASS" : "FAIL", c.id,
                    c.name.c_str(), secs, c.budget_seconds, detail.empty() ? "" : " -- ",
                    detail.c_str());
        if (!pass) ++failures;
    }
    return failures;
}
