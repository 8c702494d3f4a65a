#include "sparsestab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "sparsestab/ball.hpp"
#include "sparsestab/lp.hpp"

namespace sparsestab::bounds {

namespace {

std::uint64_t splitmix(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double unit_double(std::uint64_t& s) { return (splitmix(s) >> 11) * 0x1.0p-53; }

double gaussian(std::uint64_t& s) {
    double u1 = std::max(unit_double(s), 1e-300), u2 = unit_double(s);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// euclidean projection of h onto the feasible-rhs cone
//   F = { (M'u + r, M''u) : u free, r >= 0 }
// via plain NNLS over (u+, u-, r)
Vec project_onto_rhs_cone(const Mat& mprime, const Mat& mdprime, const Vec& h) {
    std::size_t p1 = mprime.rows(), p2 = mdprime.rows();
    std::size_t q = std::max(mprime.cols(), mdprime.cols());
    Mat stack = Mat::empty(p1 + p2, 2 * q + p1);
    for (std::size_t i = 0; i < p1; ++i) {
        for (std::size_t j = 0; j < q; ++j) {
            stack(i, j) = mprime(i, j);
            stack(i, q + j) = -mprime(i, j);
        }
        stack(i, 2 * q + i) = 1.0;
    }
    for (std::size_t i = 0; i < p2; ++i)
        for (std::size_t j = 0; j < q; ++j) {
            stack(p1 + i, j) = mdprime(i, j);
            stack(p1 + i, q + j) = -mdprime(i, j);
        }
    Vec sol = nnls(stack, h);
    return matvec(stack, sol);
}

// inner problem V(d) = min ||u||_inf s.t. M'u <= d', M''u = d''
double inner_min_supnorm(const Mat& mprime, const Mat& mdprime, const Vec& dprime,
                         const Vec& ddprime) {
    std::size_t q = std::max(mprime.cols(), mdprime.cols());
    lp::LpProblem p(q + 1);  // (u, s)
    p.c[q] = 1.0;
    p.nonneg[q] = true;
    for (std::size_t i = 0; i < q; ++i) {
        Vec r1(q + 1, 0.0), r2(q + 1, 0.0);
        r1[i] = 1.0;
        r1[q] = -1.0;
        r2[i] = -1.0;
        r2[q] = -1.0;
        p.add_ineq(r1, 0.0);
        p.add_ineq(r2, 0.0);
    }
    for (std::size_t i = 0; i < mprime.rows(); ++i) {
        Vec r(q + 1, 0.0);
        for (std::size_t j = 0; j < q; ++j) r[j] = mprime(i, j);
        p.add_ineq(r, dprime[i]);
    }
    for (std::size_t i = 0; i < mdprime.rows(); ++i) {
        Vec r(q + 1, 0.0);
        for (std::size_t j = 0; j < q; ++j) r[j] = mdprime(i, j);
        p.add_eq(r, ddprime[i]);
    }
    lp::LpSolution s = lp::solve(p);
    if (s.status != lp::Status::Optimal) return -1.0;  // infeasible rhs
    return s.value;
}

long binom(long n, long k) {
    if (k < 0 || k > n) return 0;
    long v = 1;
    for (long i = 0; i < k; ++i) {
        v = v * (n - i) / (i + 1);
        if (v > 100000000L) return v;  // saturate
    }
    return v;
}

// All objective gradients h = (-pi, -nu) at vertices of the dual of the inner
// problem: basic solutions of
//   sum(lp + lm) = 1,  lp - lm + M'^T pi + M''^T nu = 0,  lp, lm, pi >= 0.
std::vector<Vec> dual_vertex_gradients(const Mat& mprime, const Mat& mdprime,
                                       const HoffmanOptions& opt) {
    std::size_t p1 = mprime.rows(), p2 = mdprime.rows();
    std::size_t q = std::max(mprime.cols(), mdprime.cols());
    if (p2 > q + 1) throw SizeLimit("hoffman_mu: more equality rows than variables + 1");
    std::size_t signed_vars = 2 * q + p1;  // lp, lm, pi
    std::size_t support = q + 1 - p2;      // nonzero signed vars at a vertex
    if (binom(static_cast<long>(signed_vars), static_cast<long>(support)) > opt.combo_cap)
        throw SizeLimit("hoffman_mu: dual-basis enumeration over budget");

    std::vector<Vec> grads;
    auto push_grad = [&](const Vec& pi, const Vec& nu) {
        Vec h(p1 + p2);
        for (std::size_t i = 0; i < p1; ++i) h[i] = -pi[i];
        for (std::size_t i = 0; i < p2; ++i) h[p1 + i] = -nu[i];
        for (const Vec& g : grads)
            if (norm_inf(sub(g, h)) < 1e-9) return;
        grads.push_back(h);
    };

    std::vector<std::size_t> comb(support);
    std::iota(comb.begin(), comb.end(), 0);
    while (true) {
        // unknowns: chosen signed vars + nu; equations: q + 1
        Mat sys = Mat::empty(q + 1, support + p2);
        Vec rhs(q + 1, 0.0);
        rhs[q] = 1.0;  // normalization row last
        for (std::size_t c = 0; c < support; ++c) {
            std::size_t v = comb[c];
            if (v < q) {  // lp_v
                sys(v, c) = 1.0;
                sys(q, c) = 1.0;
            } else if (v < 2 * q) {  // lm_{v-q}
                sys(v - q, c) = -1.0;
                sys(q, c) = 1.0;
            } else {  // pi_{v-2q}: column of M'^T = row of M'
                std::size_t rr = v - 2 * q;
                for (std::size_t j = 0; j < q; ++j) sys(j, c) = mprime(rr, j);
            }
        }
        for (std::size_t e = 0; e < p2; ++e)
            for (std::size_t j = 0; j < q; ++j) sys(j, support + e) = mdprime(e, j);

        Vec sol = least_squares(sys, rhs);
        Vec res = sub(matvec(sys, sol), rhs);
        if (norm_inf(res) <= 1e-9) {
            bool ok = true;
            for (std::size_t c = 0; c < support && ok; ++c)
                if (sol[c] < -1e-9) ok = false;
            if (ok) {
                Vec pi(p1, 0.0), nu(p2, 0.0);
                for (std::size_t c = 0; c < support; ++c) {
                    std::size_t v = comb[c];
                    if (v >= 2 * q) pi[v - 2 * q] = std::max(sol[c], 0.0);
                }
                for (std::size_t e = 0; e < p2; ++e) nu[e] = sol[support + e];
                push_grad(pi, nu);
            }
        }
        if (support == 0) break;
        std::size_t kk = support;
        while (kk > 0 && comb[kk - 1] == signed_vars - support + (kk - 1)) --kk;
        if (kk == 0) break;
        ++comb[kk - 1];
        for (std::size_t j = kk; j < support; ++j) comb[j] = comb[j - 1] + 1;
    }
    return grads;
}

}  // namespace

RobinsonEstimate hoffman_mu(const Mat& mprime, const Mat& mdprime, RobinsonMode mode,
                            const HoffmanOptions& opt) {
    std::size_t p1 = mprime.rows(), p2 = mdprime.rows();
    RobinsonEstimate est;
    est.mode = mode;
    if (mode == RobinsonMode::ExactTiny) {
        // mu = max over dual-vertex gradients h of || Pi_F(h) ||_2: the inner
        // value is piecewise linear V(d) = max_h h.d on the cone F, and the
        // maximum of a linear functional over F intersected with the unit
        // ball is the norm of the cone projection of its gradient.
        std::vector<Vec> grads = dual_vertex_gradients(mprime, mdprime, opt);
        for (const Vec& h : grads) {
            Vec proj = project_onto_rhs_cone(mprime, mdprime, h);
            double v = norm2(proj);
            if (v > est.value) {
                est.value = v;
                est.worst_direction = v > 0 ? scale(proj, 1.0 / v) : proj;
            }
        }
        return est;
    }
    // sampled lower bound: random directions projected into F
    std::uint64_t seed = opt.seed;
    for (int t = 0; t < opt.sample_budget; ++t) {
        Vec d(p1 + p2);
        for (auto& x : d) x = gaussian(seed);
        Vec df = project_onto_rhs_cone(mprime, mdprime, d);
        double nr = norm2(df);
        if (nr < 1e-12) continue;
        Vec unit = scale(df, 1.0 / nr);
        double v = inner_min_supnorm(
            mprime, mdprime, Vec(std::vector<double>(unit.begin(), unit.begin() + p1)),
            Vec(std::vector<double>(unit.begin() + p1, unit.end())));
        ++est.samples;
        if (v > est.value) {
            est.value = v;
            est.worst_direction = unit;
        }
    }
    return est;
}

RobinsonEstimate robinson_sigma(const Mat& m1, const Mat& m2, RobinsonMode mode,
                                const HoffmanOptions& opt) {
    std::size_t r1 = m1.rows(), r2 = m2.rows(), ell = m1.cols();
    if (m2.rows() > 0 && m2.cols() != ell) throw BadDimensions("robinson_sigma: widths differ");
    if (r1 > 12) throw SizeLimit("robinson_sigma: 2^{m1} subset enumeration needs m1 <= 12");
    // M'' = [M1; M2]^T is fixed across subsets
    Mat mdp = Mat::empty(ell, r1 + r2);
    for (std::size_t i = 0; i < r1; ++i)
        for (std::size_t j = 0; j < ell; ++j) mdp(j, i) = m1(i, j);
    for (std::size_t i = 0; i < r2; ++i)
        for (std::size_t j = 0; j < ell; ++j) mdp(j, r1 + i) = m2(i, j);

    RobinsonEstimate best;
    best.mode = mode;
    HoffmanOptions inner = opt;
    for (std::uint64_t mask = 0; mask < (1ull << r1); ++mask) {
        std::vector<int> subset;
        for (std::size_t i = 0; i < r1; ++i)
            if ((mask >> i) & 1ull) subset.push_back(static_cast<int>(i));
        // M' = [I_S 0; -I 0] over u in R^{r1 + r2}
        Mat mp = Mat::empty(subset.size() + r1, r1 + r2);
        for (std::size_t s = 0; s < subset.size(); ++s) mp(s, subset[s]) = 1.0;
        for (std::size_t i = 0; i < r1; ++i) mp(subset.size() + i, i) = -1.0;
        inner.seed = opt.seed + mask;
        RobinsonEstimate mu = hoffman_mu(mp, mdp, mode, inner);
        best.samples += mu.samples;
        if (mu.value > best.value) {
            best.value = mu.value;
            best.worst_subset = subset;
            best.worst_direction = mu.worst_direction;
        }
    }
    return best;
}

HoffmanVerification verify_hoffman_lemma(const Mat& m1, const Mat& m2, const Vec& d1,
                                         const Vec& d2, int probes, std::uint64_t seed) {
    std::size_t ell = m1.cols();
    ball::HPoly L;
    L.G = m1;
    L.h = d1;
    L.E = m2;
    L.f = d2;
    {
        lp::LpProblem p(ell);
        p.G = m1;
        p.h = d1;
        p.E = m2;
        p.f = d2;
        if (!lp::feasible(p).first) throw EmptyPolyhedron("verify_hoffman_lemma: L empty");
    }
    HoffmanVerification out;
    out.probes = probes;
    out.sigma = robinson_sigma(m1, m2, RobinsonMode::ExactTiny).value;
    out.all_hold = true;
    std::uint64_t s = seed;
    for (int t = 0; t < probes; ++t) {
        Vec x(ell);
        for (auto& v : x) v = 2.0 * gaussian(s);
        Vec xstar = ball::project(L, x);
        double lhs = norm2(sub(x, xstar));
        double viol = 0.0;
        Vec g = matvec(m1, x);
        for (std::size_t i = 0; i < m1.rows(); ++i) viol += std::max(g[i] - d1[i], 0.0);
        if (m2.rows()) {
            Vec e = matvec(m2, x);
            for (std::size_t i = 0; i < m2.rows(); ++i) viol += std::abs(e[i] - d2[i]);
        }
        double rhs = out.sigma * viol;
        double slack = rhs - lhs;
        out.worst_slack = std::min(out.worst_slack, slack);
        if (slack < -1e-7) out.all_hold = false;
        if (viol > 1e-12) out.worst_ratio = std::max(out.worst_ratio, lhs / viol);
    }
    return out;
}

double constant_c(const Mat& m, const Mat& a) {
    std::size_t mm = a.rows(), q = m.cols(), n = a.cols();
    if (m.rows() != mm) throw BadDimensions("constant_c: row mismatch");
    if (n > 24) throw ColumnLimitExceeded("constant_c: induced-norm cap n <= 24");
    if (binom(static_cast<long>(q), static_cast<long>(mm)) > 10000)
        throw SizeLimit("constant_c: too many column subsets");
    RankFactor f(a);
    Mat b = Mat::empty(mm, n);  // (A A^T)^{-1} A
    for (std::size_t j = 0; j < n; ++j) {
        Vec col = f.solve_gram(a.col_vec(j));
        for (std::size_t i = 0; i < mm; ++i) b(i, j) = col[i];
    }
    double best = -1.0;
    std::vector<std::size_t> comb(mm);
    std::iota(comb.begin(), comb.end(), 0);
    while (true) {
        Mat mg(mm, mm, 0.0);
        for (std::size_t i = 0; i < mm; ++i)
            for (std::size_t j = 0; j < mm; ++j) mg(i, j) = m(i, comb[j]);
        // solve M_G X = B column-wise; skip singular subsets
        bool ok = true;
        Mat x = Mat::empty(mm, n);
        for (std::size_t j = 0; j < n && ok; ++j) {
            auto sol = solve_square(mg, b.col_vec(j), 1e-10);
            if (!sol) {
                ok = false;
                break;
            }
            for (std::size_t i = 0; i < mm; ++i) x(i, j) = (*sol)[i];
        }
        if (ok) best = std::max(best, induced_norm_inf_to_1(x));
        std::size_t kk = mm;
        while (kk > 0 && comb[kk - 1] == q - mm + (kk - 1)) --kk;
        if (kk == 0) break;
        ++comb[kk - 1];
        for (std::size_t j = kk; j < mm; ++j) comb[j] = comb[j - 1] + 1;
    }
    if (best < 0.0) throw NoInvertibleSubmatrix("constant_c: every M_G singular");
    return best;
}

std::string bound_id_name(BoundId id) {
    switch (id) {
        case BoundId::T32_InqAA: return "T3.2-INQ-AA";
        case BoundId::T32_InqNew: return "T3.2-INQ-new";
        case BoundId::C34_E2: return "C3.4-E2";
        case BoundId::T45_ll2: return "T4.5-ll2";
        case BoundId::T45_45: return "T4.5-45";
        case BoundId::T53_l2: return "T5.3-l2";
        case BoundId::T53_1616: return "T5.3-1616";
        case BoundId::C54_FFNN: return "C5.4-FFNN";
    }
    throw BadDimensions("bound_id_name: bad id");
}

BoundId bound_id_from_name(const std::string& name) {
    for (BoundId id : {BoundId::T32_InqAA, BoundId::T32_InqNew, BoundId::C34_E2,
                       BoundId::T45_ll2, BoundId::T45_45, BoundId::T53_l2,
                       BoundId::T53_1616, BoundId::C54_FFNN})
        if (bound_id_name(id) == name) return id;
    throw BadDimensions("unknown bound id " + name);
}

namespace {

bool needs_tau(BoundId id) {
    return id == BoundId::T32_InqAA || id == BoundId::T32_InqNew || id == BoundId::C34_E2 ||
           id == BoundId::T45_ll2 || id == BoundId::T45_45;
}

}  // namespace

void bound_shape(BoundId id, const BoundExtras& extras, double& base, double& mult) {
    switch (id) {
        case BoundId::T32_InqAA:
        case BoundId::T32_InqNew:
        case BoundId::C34_E2:
            base = 0.0;
            mult = 1.0;
            return;
        case BoundId::T45_ll2:
        case BoundId::T45_45:
        case BoundId::T53_l2:
        case BoundId::T53_1616:
            base = extras.delta;
            mult = 2.0;
            return;
        case BoundId::C54_FFNN:
            base = extras.delta;
            mult = 4.0;
            return;
    }
    throw BadDimensions("bound_shape: bad id");
}

double bound_kernel(BoundId id, const solve::Instance& inst, const Vec& xhat, int k,
                    const BoundExtras& extras) {
    if (extras.c <= 0.0) throw MissingConstant("bound_kernel: c missing");
    Vec theta = mat_t_vec(inst.M(), sub(matvec(inst.A, xhat), inst.y));
    double sk = best_k_term_error(xhat, k);
    double phiv = norm(theta, inst.phi);
    double infv = norm_inf(theta);
    double c = extras.c;
    switch (id) {
        case BoundId::T32_InqAA: {
            if (!inst.tau) throw MissingConstant("bound_kernel: tau missing");
            double tau = *inst.tau;
            return std::max(phiv - tau, 0.0) + 2.0 * sk + c * (tau + infv);
        }
        case BoundId::T32_InqNew:
        case BoundId::C34_E2: {
            if (!inst.tau) throw MissingConstant("bound_kernel: tau missing");
            double tau = *inst.tau;
            return 2.0 * sk + c * tau + c * infv;
        }
        case BoundId::T45_ll2: {
            if (!inst.tau) throw MissingConstant("bound_kernel: tau missing");
            if (extras.nhat == 0) throw MissingConstant("bound_kernel: nhat missing");
            double tau = *inst.tau;
            return static_cast<double>(extras.nhat) * std::max(phiv - tau, 0.0) + 2.0 * sk +
                   c * tau + c * phiv;
        }
        case BoundId::T45_45: {
            if (!inst.tau) throw MissingConstant("bound_kernel: tau missing");
            double tau = *inst.tau;
            return 2.0 * sk + c * tau + c * phiv;
        }
        case BoundId::T53_l2: {
            if (!inst.mu) throw MissingConstant("bound_kernel: mu missing");
            double mu = *inst.mu;
            return std::max(norm1(xhat) - mu, 0.0) + 2.0 * phiv +
                   (std::abs(mu - norm1(xhat)) + 2.0 * sk) / c;
        }
        case BoundId::T53_1616: {
            if (!inst.mu) throw MissingConstant("bound_kernel: mu missing");
            double mu = *inst.mu;
            return 2.0 * phiv + (std::abs(mu - norm1(xhat)) + 2.0 * sk) / c;
        }
        case BoundId::C54_FFNN: {
            if (!inst.mu) throw MissingConstant("bound_kernel: mu missing");
            return phiv + sk / c;
        }
    }
    throw BadDimensions("bound_kernel: bad id");
}

BoundReport evaluate_bound(BoundId id, const solve::Instance& inst, const Vec& xhat,
                           const solve::SolveResult& res, int k, const GammaInfo& gamma,
                           const BoundExtras& extras) {
    if (needs_tau(id) && !inst.tau) throw MissingConstant("evaluate_bound: tau missing");
    if (!needs_tau(id) && !inst.mu) throw MissingConstant("evaluate_bound: mu missing");
    BoundReport rep;
    rep.id = id;
    rep.k = k;
    rep.kernel = bound_kernel(id, inst, xhat, k, extras);
    bound_shape(id, extras, rep.base, rep.mult);
    rep.gamma_value = gamma.value;
    rep.gamma_mode = gamma.mode;
    rep.c = extras.c;
    rep.sigma_k = best_k_term_error(xhat, k);
    rep.tau = inst.tau.value_or(0.0);
    rep.mu = inst.mu.value_or(0.0);
    rep.delta = extras.delta;
    rep.nhat = extras.nhat;
    Vec theta = mat_t_vec(inst.M(), sub(matvec(inst.A, xhat), inst.y));
    rep.phi_residual = norm(theta, inst.phi);
    rep.inf_residual = norm_inf(theta);
    rep.rhs = rep.base + rep.mult * gamma.value * rep.kernel;
    rep.measured = solve::distance_to_solution_set(inst, res, xhat);
    rep.satisfied = rep.measured <= rep.rhs * (1.0 + 1e-12) + 1e-15;
    rep.ratio = rep.kernel > 0.0
                    ? std::max(rep.measured - rep.base, 0.0) / (rep.mult * rep.kernel)
                    : 0.0;
    return rep;
}

double BoundReport::recompute_rhs() const { return base + mult * gamma_value * kernel; }

double empirical_gamma(BoundId id, const std::vector<ProbeSet>& sets) {
    if (sets.empty()) throw BadDimensions("empirical_gamma: no probe sets");
    double best = 0.0;
    for (const ProbeSet& ps : sets) {
        double base, mult;
        bound_shape(id, ps.extras, base, mult);
        for (const Vec& xhat : ps.probes) {
            double kernel = bound_kernel(id, ps.inst, xhat, ps.k, ps.extras);
            if (kernel <= 0.0) continue;
            double measured = solve::distance_to_solution_set(ps.inst, ps.solved, xhat);
            best = std::max(best, std::max(measured - base, 0.0) / (mult * kernel));
        }
    }
    return best;
}

std::string BoundReport::to_json() const {
    nlohmann::json j;
    j["id"] = bound_id_name(id);
    j["rhs"] = rhs;
    j["measured"] = measured;
    j["satisfied"] = satisfied;
    j["kernel"] = kernel;
    j["base"] = base;
    j["mult"] = mult;
    j["ratio"] = ratio;
    j["gamma"] = {{"value", gamma_value}, {"mode", gamma_mode}};
    j["c"] = c;
    j["sigma_k"] = sigma_k;
    j["tau"] = tau;
    j["mu"] = mu;
    j["delta"] = delta;
    j["nhat"] = nhat;
    j["k"] = k;
    j["phi_residual"] = phi_residual;
    j["inf_residual"] = inf_residual;
    return j.dump();
}

}  // namespace sparsestab::bounds
