#include "sparsestab/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <json.hpp>

namespace sparsestab::solve {

namespace {

constexpr int kDualOrientationRows = 200;  // relaxation LP rows above this solve the dual
constexpr int kStatL1Cap = 12;             // sign-row explosion guard for the stopping statistic
constexpr int kStatRowCap = 160;           // post-prune row budget for vertex enumeration

Mat mt_a(const Instance& inst) {  // B = M^T A (q x n)
    return matmul(inst.M().transposed(), inst.A);
}

Vec mt_y(const Instance& inst) { return mat_t_vec(inst.M(), inst.y); }

Vec residual_vec(const Instance& inst, const Vec& x) {  // M^T (A x - y)
    return mat_t_vec(inst.M(), sub(matvec(inst.A, x), inst.y));
}

double mixed_alpha(const NormSpec& phi) {
    if (phi.kind() == NormSpec::Kind::MixedInfOne) return phi.alpha();
    if (phi.p() == 1.0) return 0.0;
    if (phi.p() == kInf) return 1.0;
    throw BadDimensions("linear selector needs a polyhedral norm");
}

std::vector<Vec> sign_rows(std::size_t n) {
    if (n > 16) throw SizeLimit("l1-ball rows need n <= 16");
    std::vector<Vec> rows;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        Vec r(n);
        for (std::size_t j = 0; j < n; ++j) r[j] = ((mask >> j) & 1u) ? 1.0 : -1.0;
        rows.push_back(r);
    }
    return rows;
}

struct RelaxSolve {
    Vec x;
    Vec t;
    double value = 0.0;
    std::vector<Vec> w;
};

// min ||x||_1 s.t. Gamma^T(M^T(Ax - y)) <= tau * ones
RelaxSolve solve_ds_relax(const Instance& inst, const ball::Polytope& Q, double tau) {
    std::size_t n = inst.n(), nhat = Q.generators().size();
    Mat b = mt_a(inst);
    Vec by = mt_y(inst);
    Mat gtb = matmul(Q.rows_matrix(), b);  // nhat x n
    Vec rhs(nhat);
    for (std::size_t k = 0; k < nhat; ++k) rhs[k] = tau + dot(Q.generators()[k], by);

    RelaxSolve out;
    if (2 * n + nhat <= kDualOrientationRows) {
        lp::LpProblem p(2 * n);
        for (std::size_t j = 0; j < n; ++j) {
            p.c[n + j] = 1.0;
            p.nonneg[n + j] = true;
        }
        for (std::size_t j = 0; j < n; ++j) {
            Vec r1(2 * n, 0.0), r2(2 * n, 0.0);
            r1[j] = 1.0;
            r1[n + j] = -1.0;
            r2[j] = -1.0;
            r2[n + j] = -1.0;
            p.add_ineq(r1, 0.0);
            p.add_ineq(r2, 0.0);
        }
        for (std::size_t k = 0; k < nhat; ++k) {
            Vec r(2 * n, 0.0);
            for (std::size_t j = 0; j < n; ++j) r[j] = gtb(k, j);
            p.add_ineq(r, rhs[k]);
        }
        lp::LpSolution s = lp::solve(p);
        if (s.status != lp::Status::Optimal) throw LpFailure("ds relaxation not optimal");
        out.x = Vec(n);
        out.t = Vec(n);
        for (std::size_t j = 0; j < n; ++j) {
            out.x[j] = s.z[j];
            out.t[j] = s.z[n + j];
        }
        out.value = s.value;
        Vec w1(n), w2(n), w3(nhat);
        for (std::size_t j = 0; j < n; ++j) {
            w1[j] = s.dual_ineq[2 * j];
            w2[j] = s.dual_ineq[2 * j + 1];
        }
        for (std::size_t k = 0; k < nhat; ++k) w3[k] = s.dual_ineq[2 * n + k];
        out.w = {w1, w2, w3};
        return out;
    }

    // dual orientation: max -(tau e + Gamma^T M^T y)^T w3
    //                   s.t. A^T M Gamma w3 + w1 - w2 = 0, w1 + w2 <= 1, w >= 0
    lp::LpProblem p(2 * n + nhat);
    p.sense = lp::Sense::Max;
    p.nonneg.assign(2 * n + nhat, true);
    for (std::size_t k = 0; k < nhat; ++k) p.c[2 * n + k] = -rhs[k];
    for (std::size_t j = 0; j < n; ++j) {
        Vec r(2 * n + nhat, 0.0);
        r[j] = 1.0;
        r[n + j] = -1.0;
        for (std::size_t k = 0; k < nhat; ++k) r[2 * n + k] = gtb(k, j);
        p.add_eq(r, 0.0);
    }
    for (std::size_t j = 0; j < n; ++j) {
        Vec r(2 * n + nhat, 0.0);
        r[j] = 1.0;
        r[n + j] = 1.0;
        p.add_ineq(r, 1.0);
    }
    lp::LpSolution s = lp::solve(p);
    if (s.status != lp::Status::Optimal) throw LpFailure("ds relaxation (dual form) not optimal");
    out.value = s.value;
    out.x = scale(s.dual_eq, -1.0);
    out.t = abs_vec(out.x);
    Vec w1(n), w2(n), w3(nhat);
    for (std::size_t j = 0; j < n; ++j) {
        w1[j] = s.z[j];
        w2[j] = s.z[n + j];
    }
    for (std::size_t k = 0; k < nhat; ++k) w3[k] = s.z[2 * n + k];
    out.w = {w1, w2, w3};
    // cross-check the recovered primal point
    Vec g = matvec(gtb, out.x);
    for (std::size_t k = 0; k < nhat; ++k)
        if (g[k] > rhs[k] + 1e-6 * (1.0 + std::abs(rhs[k])))
            throw LpFailure("ds relaxation: primal recovery infeasible");
    if (std::abs(norm1(out.x) - out.value) > 1e-6 * (1.0 + std::abs(out.value)))
        throw LpFailure("ds relaxation: primal recovery value mismatch");
    return out;
}

// min rho s.t. ||x||_1 <= mu, Gamma^T(M^T(Ax-y)) <= rho * ones
RelaxSolve solve_lasso_relax(const Instance& inst, const ball::Polytope& Q, double mu) {
    std::size_t n = inst.n(), nhat = Q.generators().size();
    Mat b = mt_a(inst);
    Vec by = mt_y(inst);
    Mat gtb = matmul(Q.rows_matrix(), b);
    Vec gby(nhat);
    for (std::size_t k = 0; k < nhat; ++k) gby[k] = dot(Q.generators()[k], by);

    RelaxSolve out;
    if (2 * n + 1 + nhat <= kDualOrientationRows) {
        // variables (x, t, rho)
        lp::LpProblem p(2 * n + 1);
        p.c[2 * n] = 1.0;
        p.nonneg.assign(2 * n + 1, false);
        for (std::size_t j = 0; j < n; ++j) p.nonneg[n + j] = true;
        p.nonneg[2 * n] = true;
        for (std::size_t j = 0; j < n; ++j) {
            Vec r1(2 * n + 1, 0.0), r2(2 * n + 1, 0.0);
            r1[j] = 1.0;
            r1[n + j] = -1.0;
            r2[j] = -1.0;
            r2[n + j] = -1.0;
            p.add_ineq(r1, 0.0);
            p.add_ineq(r2, 0.0);
        }
        Vec rmu(2 * n + 1, 0.0);
        for (std::size_t j = 0; j < n; ++j) rmu[n + j] = 1.0;
        p.add_ineq(rmu, mu);
        for (std::size_t k = 0; k < nhat; ++k) {
            Vec r(2 * n + 1, 0.0);
            for (std::size_t j = 0; j < n; ++j) r[j] = gtb(k, j);
            r[2 * n] = -1.0;
            p.add_ineq(r, gby[k]);
        }
        lp::LpSolution s = lp::solve(p);
        if (s.status != lp::Status::Optimal) throw LpFailure("lasso relaxation not optimal");
        out.x = Vec(n);
        out.t = Vec(n);
        for (std::size_t j = 0; j < n; ++j) {
            out.x[j] = s.z[j];
            out.t[j] = s.z[n + j];
        }
        out.value = s.value;
        Vec w1(n), w2(n), w3(1), w4(nhat);
        for (std::size_t j = 0; j < n; ++j) {
            w1[j] = s.dual_ineq[2 * j];
            w2[j] = s.dual_ineq[2 * j + 1];
        }
        w3[0] = s.dual_ineq[2 * n];
        for (std::size_t k = 0; k < nhat; ++k) w4[k] = s.dual_ineq[2 * n + 1 + k];
        out.w = {w1, w2, w3, w4};
        return out;
    }

    // dual orientation: max -mu w3 - (y^T M Gamma) w4
    // s.t. A^T M Gamma w4 + w1 - w2 = 0, w1 + w2 - w3 e <= 0, e^T w4 <= 1
    std::size_t nv = 2 * n + 1 + nhat;
    lp::LpProblem p(nv);
    p.sense = lp::Sense::Max;
    p.nonneg.assign(nv, true);
    p.c[2 * n] = -mu;
    for (std::size_t k = 0; k < nhat; ++k) p.c[2 * n + 1 + k] = -gby[k];
    for (std::size_t j = 0; j < n; ++j) {
        Vec r(nv, 0.0);
        r[j] = 1.0;
        r[n + j] = -1.0;
        for (std::size_t k = 0; k < nhat; ++k) r[2 * n + 1 + k] = gtb(k, j);
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
    for (std::size_t k = 0; k < nhat; ++k) re[2 * n + 1 + k] = 1.0;
    p.add_ineq(re, 1.0);
    lp::LpSolution s = lp::solve(p);
    if (s.status != lp::Status::Optimal)
        throw LpFailure("lasso relaxation (dual form) not optimal");
    out.value = s.value;
    out.x = scale(s.dual_eq, -1.0);
    out.t = abs_vec(out.x);
    Vec w1(n), w2(n), w3(1), w4(nhat);
    for (std::size_t j = 0; j < n; ++j) {
        w1[j] = s.z[j];
        w2[j] = s.z[n + j];
    }
    w3[0] = s.z[2 * n];
    for (std::size_t k = 0; k < nhat; ++k) w4[k] = s.z[2 * n + 1 + k];
    out.w = {w1, w2, w3, w4};
    if (norm1(out.x) > mu + 1e-6 * (1.0 + mu))
        throw LpFailure("lasso relaxation: primal recovery infeasible");
    return out;
}

// pull the level solution back to exact feasibility by shrinking the residual
Vec polish_feasible(const Instance& inst, const Vec& x, double tau) {
    Vec theta = residual_vec(inst, x);
    double val = norm(theta, inst.phi);
    if (val <= tau || tau == 0.0) return x;
    double shrink = 1.0 - tau / val;  // residual scales by tau/val exactly
    Vec r = sub(matvec(inst.A, x), inst.y);
    RankFactor f(inst.A);
    Vec z = f.solve_gram(r);  // (A A^T)^{-1} r
    Vec corr = mat_t_vec(inst.A, z);
    return sub(x, scale(corr, shrink));
}

ball::HPoly assemble_xspace_set(const Instance& inst, const ball::Polytope& Q, double l1_bound,
                                double row_rhs_base) {
    // {x : ||x||_1 <= l1_bound, a^T(M^T(Ax-y)) <= row_rhs_base for all gens}
    std::size_t n = inst.n();
    if (n > kStatL1Cap) throw SizeLimit("solution-set assembly: n too large for sign rows");
    Mat b = mt_a(inst);
    Vec by = mt_y(inst);
    std::vector<Vec> rows = sign_rows(n);
    std::vector<double> rhs(rows.size(), l1_bound);
    for (const Vec& a : Q.generators()) {
        Vec row = mat_t_vec(b, a);  // (B^T a)^T x
        rows.push_back(row);
        rhs.push_back(row_rhs_base + dot(a, by));
    }
    Mat g = Mat::empty(rows.size(), n);
    Vec h(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < n; ++j) g(i, j) = rows[i][j];
        h[i] = rhs[i];
    }
    return ball::HPoly::from_rows(g, h);
}

double nested_stat(const Instance& inst, const ball::Polytope& coarse,
                   const ball::Polytope& fine, double l1_bound, double rhs_base) {
    if (inst.n() > static_cast<std::size_t>(kStatL1Cap)) return -1.0;
    ball::HPoly outer = prune_redundant(assemble_xspace_set(inst, coarse, l1_bound, rhs_base));
    if (outer.G.rows() > static_cast<std::size_t>(kStatRowCap)) return -1.0;
    ball::HPoly inner = assemble_xspace_set(inst, fine, l1_bound, rhs_base);
    ball::HausdorffOptions opt;
    opt.check_nested = false;  // structural: same l1 bound, superset of rows
    opt.vertex_budget_rows = kStatRowCap;
    opt.vertex_budget_dim = kStatL1Cap;
    return ball::hausdorff_nested(inner, outer, opt);
}

Vec block_of(const Vec& z, std::size_t off, std::size_t len) {
    Vec out(len);
    for (std::size_t i = 0; i < len; ++i) out[i] = z[off + i];
    return out;
}

// deterministic lowest-index invertible column subset of M
std::vector<std::size_t> pivot_columns(const Mat& m) {
    std::size_t rows = m.rows();
    std::vector<std::size_t> chosen;
    for (std::size_t j = 0; j < m.cols() && chosen.size() < rows; ++j) {
        std::vector<std::size_t> trial = chosen;
        trial.push_back(j);
        Mat sub = Mat::empty(rows, trial.size());
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t k = 0; k < trial.size(); ++k) sub(i, k) = m(i, trial[k]);
        if (numerical_rank(sub) == static_cast<int>(trial.size())) chosen = trial;
    }
    if (chosen.size() < rows) throw NoInvertibleSubmatrix("no invertible m x m submatrix");
    return chosen;
}

}  // namespace

Mat Instance::M() const {
    switch (mspec.kind) {
        case MSpec::Kind::Identity:
            return Mat::identity(m());
        case MSpec::Kind::SameAsA:
            return A;
        case MSpec::Kind::Explicit:
            return mspec.m;
    }
    throw BadDimensions("Instance: bad MSpec");
}

void Instance::validate() const {
    if (m() >= n()) throw BadDimensions("Instance: need m < n");
    Mat mm = M();
    if (mm.rows() != m() || mm.cols() < m()) throw BadDimensions("Instance: M shape");
    if (y.size() != m()) throw BadDimensions("Instance: y size");
    if (numerical_rank(A) != static_cast<int>(m()))
        throw BadDimensions("Instance: rank(A) < m");
    if (numerical_rank(mm) != static_cast<int>(m()))
        throw BadDimensions("Instance: rank(M) < m");
    if (tau && *tau < 0.0) throw BadDimensions("Instance: tau < 0");
    if (mu && *mu <= 0.0) throw BadDimensions("Instance: mu <= 0");
}

Instance instance_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    Instance inst;
    {
        auto ja = j.at("A");
        Mat a(ja.size(), ja[0].size());
        for (std::size_t i = 0; i < ja.size(); ++i)
            for (std::size_t k = 0; k < ja[i].size(); ++k) a(i, k) = ja[i][k].get<double>();
        inst.A = a;
    }
    auto jm = j.at("M");
    if (jm.is_string()) {
        std::string s = jm.get<std::string>();
        if (s == "identity")
            inst.mspec = MSpec::identity();
        else if (s == "same-as-A")
            inst.mspec = MSpec::same_as_a();
        else
            throw ParseError("instance: unknown M tag " + s);
    } else {
        Mat mm(jm.size(), jm[0].size());
        for (std::size_t i = 0; i < jm.size(); ++i)
            for (std::size_t k = 0; k < jm[i].size(); ++k) mm(i, k) = jm[i][k].get<double>();
        inst.mspec = MSpec::explicit_m(mm);
    }
    {
        std::vector<double> yv;
        for (const auto& v : j.at("y")) yv.push_back(v.get<double>());
        inst.y = Vec(std::move(yv));
    }
    auto jp = j.at("phi");
    std::string kind = jp.at("kind").get<std::string>();
    if (kind == "lp") {
        double p = jp.at("p").is_string() ? kInf : jp.at("p").get<double>();
        inst.phi = NormSpec::lp(p);
    } else if (kind == "mixed") {
        inst.phi = NormSpec::mixed(jp.at("alpha").get<double>());
    } else {
        throw ParseError("instance: unknown phi kind " + kind);
    }
    if (j.contains("tau")) inst.tau = j.at("tau").get<double>();
    if (j.contains("mu")) inst.mu = j.at("mu").get<double>();
    inst.validate();
    return inst;
}

std::string instance_to_json(const Instance& inst) {
    nlohmann::json j;
    j["A"] = nlohmann::json::array();
    for (std::size_t i = 0; i < inst.A.rows(); ++i) j["A"].push_back(inst.A.row_vec(i).raw());
    switch (inst.mspec.kind) {
        case MSpec::Kind::Identity:
            j["M"] = "identity";
            break;
        case MSpec::Kind::SameAsA:
            j["M"] = "same-as-A";
            break;
        case MSpec::Kind::Explicit: {
            j["M"] = nlohmann::json::array();
            for (std::size_t i = 0; i < inst.mspec.m.rows(); ++i)
                j["M"].push_back(inst.mspec.m.row_vec(i).raw());
            break;
        }
    }
    j["y"] = inst.y.raw();
    if (inst.phi.kind() == NormSpec::Kind::Lp) {
        j["phi"]["kind"] = "lp";
        if (inst.phi.p() == kInf)
            j["phi"]["p"] = "inf";
        else
            j["phi"]["p"] = inst.phi.p();
    } else {
        j["phi"]["kind"] = "mixed";
        j["phi"]["alpha"] = inst.phi.alpha();
    }
    if (inst.tau) j["tau"] = *inst.tau;
    if (inst.mu) j["mu"] = *inst.mu;
    return j.dump();
}

SolveResult solve_ds_linear(const Instance& inst) {
    inst.validate();
    if (!inst.tau) throw BadDimensions("solve_ds_linear: tau missing");
    double tau = *inst.tau;
    double alpha = mixed_alpha(inst.phi);
    std::size_t n = inst.n(), q = inst.q();
    Mat b = mt_a(inst);
    Vec by = mt_y(inst);

    // variables (x, t, xi, v); rows in the order of the optimality system
    std::size_t nv = 2 * n + 1 + q;
    lp::LpProblem p(nv);
    for (std::size_t j = 0; j < n; ++j) {
        p.c[n + j] = 1.0;
        p.nonneg[n + j] = true;
    }
    p.nonneg[2 * n] = true;
    for (std::size_t k = 0; k < q; ++k) p.nonneg[2 * n + 1 + k] = true;

    for (std::size_t j = 0; j < n; ++j) {  // x - t <= 0
        Vec r(nv, 0.0);
        r[j] = 1.0;
        r[n + j] = -1.0;
        p.add_ineq(r, 0.0);
    }
    for (std::size_t j = 0; j < n; ++j) {  // -x - t <= 0
        Vec r(nv, 0.0);
        r[j] = -1.0;
        r[n + j] = -1.0;
        p.add_ineq(r, 0.0);
    }
    {  // alpha xi + (1-alpha) e^T v <= tau
        Vec r(nv, 0.0);
        r[2 * n] = alpha;
        for (std::size_t k = 0; k < q; ++k) r[2 * n + 1 + k] = 1.0 - alpha;
        p.add_ineq(r, tau);
    }
    auto add_resid_rows = [&](double sgn, bool versus_xi) {
        for (std::size_t k = 0; k < q; ++k) {
            Vec r(nv, 0.0);
            for (std::size_t j = 0; j < n; ++j) r[j] = sgn * b(k, j);
            if (versus_xi)
                r[2 * n] = -1.0;
            else
                r[2 * n + 1 + k] = -1.0;
            p.add_ineq(r, sgn * by[k]);
        }
    };
    add_resid_rows(+1.0, true);   // B x - xi e <= B y
    add_resid_rows(-1.0, true);   // -B x - xi e <= -B y
    add_resid_rows(+1.0, false);  // B x - v <= B y
    add_resid_rows(-1.0, false);  // -B x - v <= -B y

    lp::LpSolution s = lp::solve(p);
    SolveResult out;
    if (s.status == lp::Status::Infeasible) throw Infeasible("ds: no feasible point");
    if (s.status != lp::Status::Optimal) throw LpFailure("ds: solver failure");
    out.xstar = block_of(s.z, 0, n);
    out.value = s.value;
    Vec t = block_of(s.z, n, n);
    for (std::size_t j = 0; j < n; ++j)
        if (std::abs(t[j] - std::abs(out.xstar[j])) > 1e-9 * (1.0 + t[j]))
            throw LpFailure("ds: t != |x| at the optimum");
    // dual blocks; the two xi rows swap to match the dual-program ordering
    Vec w1(n), w2(n), w3{s.dual_ineq[2 * n]}, w4(q), w5(q), w6(q), w7(q);
    for (std::size_t j = 0; j < n; ++j) {
        w1[j] = s.dual_ineq[j];
        w2[j] = s.dual_ineq[n + j];
    }
    for (std::size_t k = 0; k < q; ++k) {
        w5[k] = s.dual_ineq[2 * n + 1 + k];          // B x - xi e rows
        w4[k] = s.dual_ineq[2 * n + 1 + q + k];      // -B x - xi e rows
        w6[k] = s.dual_ineq[2 * n + 1 + 2 * q + k];  // B x - v rows
        w7[k] = s.dual_ineq[2 * n + 1 + 3 * q + k];  // -B x - v rows
    }
    out.dual_w = {w1, w2, w3, w4, w5, w6, w7};
    out.feas_residual =
        std::max(0.0, norm(residual_vec(inst, out.xstar), inst.phi) - tau);
    out.lower_bound = out.upper_bound = out.value;
    return out;
}

namespace {

SolveResult solve_equality_l1(const Instance& inst) {
    // tau = 0 with any norm: the constraint collapses to M^T A x = M^T y
    std::size_t n = inst.n();
    Mat b = mt_a(inst);
    Vec by = mt_y(inst);
    lp::LpProblem p(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
        p.c[n + j] = 1.0;
        p.nonneg[n + j] = true;
    }
    for (std::size_t j = 0; j < n; ++j) {
        Vec r1(2 * n, 0.0), r2(2 * n, 0.0);
        r1[j] = 1.0;
        r1[n + j] = -1.0;
        r2[j] = -1.0;
        r2[n + j] = -1.0;
        p.add_ineq(r1, 0.0);
        p.add_ineq(r2, 0.0);
    }
    for (std::size_t k = 0; k < b.rows(); ++k) {
        Vec r(2 * n, 0.0);
        for (std::size_t j = 0; j < n; ++j) r[j] = b(k, j);
        p.add_eq(r, by[k]);
    }
    lp::LpSolution s = lp::solve(p);
    if (s.status == lp::Status::Infeasible) throw Infeasible("ds: equality system infeasible");
    if (s.status != lp::Status::Optimal) throw LpFailure("ds: solver failure");
    SolveResult out;
    out.xstar = block_of(s.z, 0, n);
    out.value = s.value;
    out.feas_residual = norm(residual_vec(inst, out.xstar), inst.phi);
    out.lower_bound = out.upper_bound = out.value;
    return out;
}

}  // namespace

SolveResult solve_ds_nonlinear(const Instance& inst, const ball::EpsSchedule& sched,
                               double delta, const NonlinearOptions& opt) {
    inst.validate();
    if (!inst.tau) throw BadDimensions("solve_ds_nonlinear: tau missing");
    if (inst.phi.is_polyhedral()) return solve_ds_linear(inst);
    double tau = *inst.tau;
    if (tau == 0.0) return solve_equality_l1(inst);
    if (!(delta > 0.0)) throw BadDimensions("solve_ds_nonlinear: delta must be positive");

    int q = static_cast<int>(inst.q());
    std::vector<ball::Polytope> polys;
    std::vector<RelaxSolve> sols;
    SolveResult out;
    out.delta = delta;
    int j0 = -1;
    double stat_l1_bound = -1.0;  // fixed across levels so the set chain nests
    for (int j = 1; j <= opt.max_level; ++j) {
        polys.push_back(ball::build_Q(inst.phi, j, sched, q));
        const ball::Polytope& Q = polys.back();
        sols.push_back(solve_ds_relax(inst, Q, tau));
        const RelaxSolve& cur = sols.back();
        TraceEntry te;
        te.level = j;
        te.eps = sched.at(j);
        te.value = cur.value;
        te.halfspaces = Q.generators().size();
        te.feas_violation =
            std::max(0.0, norm(residual_vec(inst, cur.x), inst.phi) - tau);
        out.trace.push_back(te);
        if (stat_l1_bound < 0.0) stat_l1_bound = norm1(polish_feasible(inst, cur.x, tau));

        if (j0 < 0 && j > opt.stat_gap) {
            int cand = j - opt.stat_gap;  // statistic for this earlier level
            double stat = nested_stat(inst, polys[cand - 1], polys[j - 1], stat_l1_bound, tau);
            out.trace[cand - 1].hausdorff_stat = stat;
            if (stat >= 0.0 && stat <= delta) {
                j0 = cand;
                out.stop_level = j0;
                out.nhat = polys[cand - 1].generators().size();
            }
        }

        Vec xf = polish_feasible(inst, cur.x, tau);
        double ub = norm1(xf), lb = cur.value;
        if (j0 > 0 && ub - lb <= opt.value_gap * std::max(1.0, lb)) {
            out.xstar = xf;
            out.x_relaxed = cur.x;
            out.value = ub;
            out.lower_bound = lb;
            out.upper_bound = ub;
            out.dual_w = cur.w;
            out.relax_poly = std::make_shared<const ball::Polytope>(Q);
            out.feas_residual =
                std::max(0.0, norm(residual_vec(inst, xf), inst.phi) - tau);
            if (out.feas_residual > opt.feastol * tau)
                throw NoConvergence("ds: polished point misses the feasibility target");
            return out;
        }
    }
    throw NoConvergence("ds: schedule exhausted before the stopping rule fired");
}

SolveResult solve_lasso(const Instance& inst, const ball::EpsSchedule& sched, double delta,
                        const NonlinearOptions& opt) {
    inst.validate();
    if (!inst.mu) throw BadDimensions("solve_lasso: mu missing");
    double mu = *inst.mu;
    int q = static_cast<int>(inst.q());

    if (inst.phi.is_polyhedral()) {
        // exact polytope: one LP
        ball::Polytope Q = ball::build_Q(inst.phi, 1, sched, q);
        RelaxSolve r = solve_lasso_relax(inst, Q, mu);
        SolveResult out;
        out.xstar = r.x;
        out.x_relaxed = r.x;
        out.value = norm(residual_vec(inst, r.x), inst.phi);
        out.dual_w = r.w;
        out.lower_bound = r.value;
        out.upper_bound = out.value;
        out.nhat = Q.generators().size();
        out.relax_poly = std::make_shared<const ball::Polytope>(Q);
        out.feas_residual = std::max(0.0, norm1(r.x) - mu);
        TraceEntry te;
        te.level = 1;
        te.eps = sched.at(1);
        te.value = r.value;
        te.halfspaces = Q.generators().size();
        te.feas_violation = out.feas_residual;
        out.trace.push_back(te);
        return out;
    }
    if (!(delta > 0.0)) throw BadDimensions("solve_lasso: delta must be positive");

    std::vector<ball::Polytope> polys;
    std::vector<RelaxSolve> sols;
    SolveResult out;
    out.delta = delta;
    int j0 = -1;
    double stat_rho_bound = -1.0;  // fixed across levels so the set chain nests
    for (int j = 1; j <= opt.max_level; ++j) {
        polys.push_back(ball::build_Q(inst.phi, j, sched, q));
        const ball::Polytope& Q = polys.back();
        sols.push_back(solve_lasso_relax(inst, Q, mu));
        const RelaxSolve& cur = sols.back();
        double true_val = norm(residual_vec(inst, cur.x), inst.phi);
        TraceEntry te;
        te.level = j;
        te.eps = sched.at(j);
        te.value = cur.value;
        te.halfspaces = Q.generators().size();
        te.feas_violation = std::max(0.0, norm1(cur.x) - mu);
        out.trace.push_back(te);
        if (stat_rho_bound < 0.0) stat_rho_bound = true_val;

        if (j0 < 0 && j > opt.stat_gap) {
            int cand = j - opt.stat_gap;
            double stat = nested_stat(inst, polys[cand - 1], polys[j - 1], mu, stat_rho_bound);
            out.trace[cand - 1].hausdorff_stat = stat;
            if (stat >= 0.0 && stat <= delta) {
                j0 = cand;
                out.stop_level = j0;
                out.nhat = polys[cand - 1].generators().size();
            }
        }

        double gap = true_val - cur.value;  // upper minus lower bracket
        if (j0 > 0 && gap <= opt.value_gap * std::max(1.0, cur.value)) {
            out.xstar = cur.x;
            out.x_relaxed = cur.x;
            out.value = true_val;
            out.lower_bound = cur.value;
            out.upper_bound = true_val;
            out.dual_w = cur.w;
            out.relax_poly = std::make_shared<const ball::Polytope>(Q);
            out.feas_residual = std::max(0.0, norm1(cur.x) - mu);
            return out;
        }
    }
    throw NoConvergence("lasso: schedule exhausted before the stopping rule fired");
}

Vec KktSystem::assemble(const std::vector<Vec>& blocks) const {
    if (blocks.size() != layout.size()) throw BadDimensions("KktSystem: block count");
    Vec z(width(), 0.0);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].size() != layout[b].length) throw BadDimensions("KktSystem: block size");
        for (std::size_t i = 0; i < layout[b].length; ++i)
            z[layout[b].offset + i] = blocks[b][i];
    }
    return z;
}

double KktSystem::residual(const Vec& z) const {
    double worst = 0.0;
    Vec g = matvec(M1, z);
    for (std::size_t i = 0; i < M1.rows(); ++i) worst = std::max(worst, g[i] - b1[i]);
    Vec e = matvec(M2, z);
    for (std::size_t i = 0; i < M2.rows(); ++i) worst = std::max(worst, std::abs(e[i] - b2[i]));
    return worst;
}

namespace {

struct KktFill {
    KktSystem sys;
    std::size_t r1 = 0, r2 = 0;

    KktFill(std::size_t rows1, std::size_t rows2, std::size_t w,
            std::vector<Slice> layout) {
        sys.M1 = Mat::empty(rows1, w);
        sys.b1 = Vec(rows1, 0.0);
        sys.M2 = Mat::empty(rows2, w);
        sys.b2 = Vec(rows2, 0.0);
        sys.layout = std::move(layout);
    }
    // identity-style block: rows x cols at (current block, col offset) scaled
    void ineq_block_rows(std::size_t count) { r1 += count; }
    void set1(std::size_t row_in_block, std::size_t col, double v) {
        sys.M1(r1 + row_in_block, col) = v;
    }
    void rhs1(std::size_t row_in_block, double v) { sys.b1[r1 + row_in_block] = v; }
    void set2(std::size_t row_in_block, std::size_t col, double v) {
        sys.M2(r2 + row_in_block, col) = v;
    }
    void rhs2(std::size_t row_in_block, double v) { sys.b2[r2 + row_in_block] = v; }
    void eq_block_rows(std::size_t count) { r2 += count; }
};

}  // namespace

KktSystem build_kkt_linear(const Instance& inst) {
    inst.validate();
    if (!inst.tau) throw BadDimensions("build_kkt_linear: tau missing");
    double tau = *inst.tau;
    double alpha = mixed_alpha(inst.phi);
    std::size_t n = inst.n(), q = inst.q();
    Mat b = mt_a(inst);           // q x n
    Vec by = mt_y(inst);          // q
    Mat atm = b.transposed();     // n x q  (A^T M)

    std::size_t X = 0, T = n, XI = 2 * n, V = 2 * n + 1, W1 = V + q, W2 = W1 + n,
                W3 = W2 + n, W4 = W3 + 1, W5 = W4 + q, W6 = W5 + q, W7 = W6 + q;
    std::size_t width = W7 + q;
    std::vector<Slice> layout = {{"x", X, n},   {"t", T, n},   {"xi", XI, 1}, {"v", V, q},
                                 {"w1", W1, n}, {"w2", W2, n}, {"w3", W3, 1}, {"w4", W4, q},
                                 {"w5", W5, q}, {"w6", W6, q}, {"w7", W7, q}};
    KktFill f(5 * n + 9 * q + 3, n + 1, width, layout);

    for (std::size_t j = 0; j < n; ++j) {  // x <= t
        f.set1(j, X + j, 1.0);
        f.set1(j, T + j, -1.0);
    }
    f.ineq_block_rows(n);
    for (std::size_t j = 0; j < n; ++j) {  // -x <= t
        f.set1(j, X + j, -1.0);
        f.set1(j, T + j, -1.0);
    }
    f.ineq_block_rows(n);
    f.set1(0, XI, alpha);  // alpha xi + (1-alpha) e^T v <= tau
    for (std::size_t k = 0; k < q; ++k) f.set1(0, V + k, 1.0 - alpha);
    f.rhs1(0, tau);
    f.ineq_block_rows(1);
    auto resid_block = [&](double sgn, bool vs_xi) {
        for (std::size_t k = 0; k < q; ++k) {
            for (std::size_t j = 0; j < n; ++j) f.set1(k, X + j, sgn * b(k, j));
            if (vs_xi)
                f.set1(k, XI, -1.0);
            else
                f.set1(k, V + k, -1.0);
            f.rhs1(k, sgn * by[k]);
        }
        f.ineq_block_rows(q);
    };
    resid_block(+1.0, true);
    resid_block(-1.0, true);
    resid_block(+1.0, false);
    resid_block(-1.0, false);
    for (std::size_t j = 0; j < n; ++j) {  // w1 + w2 <= e
        f.set1(j, W1 + j, 1.0);
        f.set1(j, W2 + j, 1.0);
        f.rhs1(j, 1.0);
    }
    f.ineq_block_rows(n);
    f.set1(0, W3, -alpha);  // -alpha w3 + e^T w4 + e^T w5 <= 0
    for (std::size_t k = 0; k < q; ++k) {
        f.set1(0, W4 + k, 1.0);
        f.set1(0, W5 + k, 1.0);
    }
    f.ineq_block_rows(1);
    for (std::size_t k = 0; k < q; ++k) {  // -(1-alpha) w3 e + w6 + w7 <= 0
        f.set1(k, W3, -(1.0 - alpha));
        f.set1(k, W6 + k, 1.0);
        f.set1(k, W7 + k, 1.0);
    }
    f.ineq_block_rows(q);
    auto nonneg_block = [&](std::size_t off, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) f.set1(i, off + i, -1.0);
        f.ineq_block_rows(len);
    };
    nonneg_block(W1, n);
    nonneg_block(W2, n);
    nonneg_block(W3, 1);
    nonneg_block(W4, q);
    nonneg_block(W5, q);
    nonneg_block(W6, q);
    nonneg_block(W7, q);

    for (std::size_t j = 0; j < n; ++j) {  // -w1 + w2 + A^T M (w4 - w5 - w6 + w7) = 0
        f.set2(j, W1 + j, -1.0);
        f.set2(j, W2 + j, 1.0);
        for (std::size_t k = 0; k < q; ++k) {
            f.set2(j, W4 + k, atm(j, k));
            f.set2(j, W5 + k, -atm(j, k));
            f.set2(j, W6 + k, -atm(j, k));
            f.set2(j, W7 + k, atm(j, k));
        }
    }
    f.eq_block_rows(n);
    for (std::size_t j = 0; j < n; ++j) f.set2(0, T + j, 1.0);  // zero-gap row
    f.set2(0, W3, tau);
    for (std::size_t k = 0; k < q; ++k) {
        f.set2(0, W4 + k, -by[k]);
        f.set2(0, W5 + k, by[k]);
        f.set2(0, W6 + k, by[k]);
        f.set2(0, W7 + k, -by[k]);
    }
    f.eq_block_rows(1);
    return f.sys;
}

KktSystem build_kkt_nonlinear(const Instance& inst, const ball::Polytope& Q) {
    inst.validate();
    if (!inst.tau) throw BadDimensions("build_kkt_nonlinear: tau missing");
    double tau = *inst.tau;
    std::size_t n = inst.n(), nhat = Q.generators().size();
    Mat gtb = matmul(Q.rows_matrix(), mt_a(inst));  // (M Gamma)^T A, nhat x n
    Vec gby = matvec(Q.rows_matrix(), mt_y(inst));  // (M Gamma)^T y, nhat
    Mat atmg = gtb.transposed();                    // A^T M Gamma, n x nhat

    std::size_t X = 0, T = n, W1 = 2 * n, W2 = 3 * n, W3 = 4 * n;
    std::size_t width = 4 * n + nhat;
    std::vector<Slice> layout = {
        {"x", X, n}, {"t", T, n}, {"w1", W1, n}, {"w2", W2, n}, {"w3", W3, nhat}};
    KktFill f(6 * n + 2 * nhat, n + 1, width, layout);

    for (std::size_t j = 0; j < n; ++j) {
        f.set1(j, X + j, 1.0);
        f.set1(j, T + j, -1.0);
    }
    f.ineq_block_rows(n);
    for (std::size_t j = 0; j < n; ++j) {
        f.set1(j, X + j, -1.0);
        f.set1(j, T + j, -1.0);
    }
    f.ineq_block_rows(n);
    for (std::size_t j = 0; j < n; ++j) {  // w1 + w2 <= e
        f.set1(j, W1 + j, 1.0);
        f.set1(j, W2 + j, 1.0);
        f.rhs1(j, 1.0);
    }
    f.ineq_block_rows(n);
    for (std::size_t k = 0; k < nhat; ++k) {  // (M Gamma)^T A x <= (M Gamma)^T y + tau e
        for (std::size_t j = 0; j < n; ++j) f.set1(k, X + j, gtb(k, j));
        f.rhs1(k, gby[k] + tau);
    }
    f.ineq_block_rows(nhat);
    auto nonneg_block = [&](std::size_t off, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) f.set1(i, off + i, -1.0);
        f.ineq_block_rows(len);
    };
    nonneg_block(T, n);
    nonneg_block(W1, n);
    nonneg_block(W2, n);
    nonneg_block(W3, nhat);

    for (std::size_t j = 0; j < n; ++j) {  // w1 - w2 + A^T M Gamma w3 = 0
        f.set2(j, W1 + j, 1.0);
        f.set2(j, W2 + j, -1.0);
        for (std::size_t k = 0; k < nhat; ++k) f.set2(j, W3 + k, atmg(j, k));
    }
    f.eq_block_rows(n);
    for (std::size_t j = 0; j < n; ++j) f.set2(0, T + j, 1.0);  // zero-gap row
    for (std::size_t k = 0; k < nhat; ++k) f.set2(0, W3 + k, tau + gby[k]);
    f.eq_block_rows(1);
    return f.sys;
}

KktSystem build_kkt_lasso(const Instance& inst, const ball::Polytope& Q) {
    inst.validate();
    if (!inst.mu) throw BadDimensions("build_kkt_lasso: mu missing");
    double mu = *inst.mu;
    std::size_t n = inst.n(), nhat = Q.generators().size();
    Mat gtb = matmul(Q.rows_matrix(), mt_a(inst));
    Vec gby = matvec(Q.rows_matrix(), mt_y(inst));
    Mat atmg = gtb.transposed();

    std::size_t X = 0, T = n, RHO = 2 * n, W1 = 2 * n + 1, W2 = 3 * n + 1, W3 = 4 * n + 1,
                W4 = 4 * n + 2;
    std::size_t width = 4 * n + 2 + nhat;
    std::vector<Slice> layout = {{"x", X, n},   {"t", T, n},   {"rho", RHO, 1},
                                 {"w1", W1, n}, {"w2", W2, n}, {"w3", W3, 1},
                                 {"w4", W4, nhat}};
    KktFill f(6 * n + 4 + 2 * nhat, n + 1, width, layout);

    for (std::size_t j = 0; j < n; ++j) {
        f.set1(j, X + j, 1.0);
        f.set1(j, T + j, -1.0);
    }
    f.ineq_block_rows(n);
    for (std::size_t j = 0; j < n; ++j) {
        f.set1(j, X + j, -1.0);
        f.set1(j, T + j, -1.0);
    }
    f.ineq_block_rows(n);
    for (std::size_t j = 0; j < n; ++j) f.set1(0, T + j, 1.0);  // e^T t <= mu
    f.rhs1(0, mu);
    f.ineq_block_rows(1);
    for (std::size_t k = 0; k < nhat; ++k) {  // (M Gamma)^T A x - rho e <= (M Gamma)^T y
        for (std::size_t j = 0; j < n; ++j) f.set1(k, X + j, gtb(k, j));
        f.set1(k, RHO, -1.0);
        f.rhs1(k, gby[k]);
    }
    f.ineq_block_rows(nhat);
    for (std::size_t j = 0; j < n; ++j) {  // w1 + w2 - w3 e <= 0
        f.set1(j, W1 + j, 1.0);
        f.set1(j, W2 + j, 1.0);
        f.set1(j, W3, -1.0);
    }
    f.ineq_block_rows(n);
    for (std::size_t k = 0; k < nhat; ++k) f.set1(0, W4 + k, 1.0);  // e^T w4 <= 1
    f.rhs1(0, 1.0);
    f.ineq_block_rows(1);
    auto nonneg_block = [&](std::size_t off, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) f.set1(i, off + i, -1.0);
        f.ineq_block_rows(len);
    };
    nonneg_block(T, n);
    nonneg_block(RHO, 1);
    nonneg_block(W1, n);
    nonneg_block(W2, n);
    nonneg_block(W3, 1);
    nonneg_block(W4, nhat);

    for (std::size_t j = 0; j < n; ++j) {  // w1 - w2 + A^T M Gamma w4 = 0
        f.set2(j, W1 + j, 1.0);
        f.set2(j, W2 + j, -1.0);
        for (std::size_t k = 0; k < nhat; ++k) f.set2(j, W4 + k, atmg(j, k));
    }
    f.eq_block_rows(n);
    f.set2(0, RHO, 1.0);  // zero-gap row: rho + mu w3 + y^T M Gamma w4 = 0
    f.set2(0, W3, mu);
    for (std::size_t k = 0; k < nhat; ++k) f.set2(0, W4 + k, gby[k]);
    f.eq_block_rows(1);
    return f.sys;
}

double dual_feasibility_residual(const Instance& inst, KktVariant variant,
                                 const std::vector<Vec>& w, const ball::Polytope* Q) {
    std::size_t n = inst.n();
    double worst = 0.0;
    auto neg = [&](const Vec& v) {
        for (double x : v) worst = std::max(worst, -x);
    };
    for (const Vec& blk : w) neg(blk);
    Mat atm = mt_a(inst).transposed();  // n x q

    if (variant == KktVariant::LinearDS) {
        if (w.size() != 7) throw BadDimensions("dual residual: expected 7 blocks");
        double alpha = mixed_alpha(inst.phi);
        const Vec &w1 = w[0], &w2 = w[1], &w3 = w[2], &w4 = w[3], &w5 = w[4], &w6 = w[5],
                  &w7 = w[6];
        for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, w1[j] + w2[j] - 1.0);
        Vec d(w4.size());
        for (std::size_t k = 0; k < w4.size(); ++k) d[k] = w4[k] - w5[k] - w6[k] + w7[k];
        Vec station = add(sub(w2, w1), matvec(atm, d));
        worst = std::max(worst, norm_inf(station));
        double s1 = -alpha * w3[0];
        for (std::size_t k = 0; k < w4.size(); ++k) s1 += w4[k] + w5[k];
        worst = std::max(worst, s1);
        for (std::size_t k = 0; k < w6.size(); ++k)
            worst = std::max(worst, -(1.0 - alpha) * w3[0] + w6[k] + w7[k]);
        return worst;
    }
    if (Q == nullptr) throw BadDimensions("dual residual: polytope required");
    Mat atmg = matmul(Q->rows_matrix(), mt_a(inst)).transposed();  // n x nhat
    if (variant == KktVariant::NonlinearDS) {
        if (w.size() != 3) throw BadDimensions("dual residual: expected 3 blocks");
        Vec station = add(sub(w[0], w[1]), matvec(atmg, w[2]));
        worst = std::max(worst, norm_inf(station));
        for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, w[0][j] + w[1][j] - 1.0);
        return worst;
    }
    // Lasso
    if (w.size() != 4) throw BadDimensions("dual residual: expected 4 blocks");
    Vec station = add(sub(w[0], w[1]), matvec(atmg, w[3]));
    worst = std::max(worst, norm_inf(station));
    for (std::size_t j = 0; j < n; ++j)
        worst = std::max(worst, w[0][j] + w[1][j] - w[2][0]);
    double s = -1.0;
    for (double v : w[3]) s += v;
    worst = std::max(worst, s);
    return worst;
}

CertificateBundle construct_dual_certificate(const Instance& inst, const Vec& x, int k,
                                             const Vec& zeta, const Vec& ustar,
                                             KktVariant variant, const ball::Polytope* Q,
                                             std::optional<double> lasso_c) {
    inst.validate();
    std::size_t n = inst.n(), q = inst.q();
    if (zeta.size() != n || ustar.size() != inst.m())
        throw BadDimensions("certificate: zeta/ustar sizes");
    IndexSet s = top_k_support(x, k);
    std::vector<int> sp, sm;
    for (int i : s.items()) {
        if (x[i] > 0) sp.push_back(i);
        if (x[i] < 0) sm.push_back(i);
    }
    // the sign pattern must be realized by zeta = A^T ustar
    Vec atu = mat_t_vec(inst.A, ustar);
    if (norm_inf(sub(atu, zeta)) > 1e-8 * (1.0 + norm_inf(zeta)))
        throw PatternInfeasible("certificate: zeta is not A^T ustar");
    for (int i : sp)
        if (std::abs(zeta[i] - 1.0) > 1e-7) throw PatternInfeasible("certificate: zeta != 1 on S'");
    for (int i : sm)
        if (std::abs(zeta[i] + 1.0) > 1e-7)
            throw PatternInfeasible("certificate: zeta != -1 on S''");
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(zeta[i]) > 1.0 + 1e-9)
            throw PatternInfeasible("certificate: |zeta| > 1 off support");

    Mat m = inst.M();
    std::vector<std::size_t> jset = pivot_columns(m);
    Mat mj(inst.m(), inst.m(), 0.0);
    for (std::size_t i = 0; i < inst.m(); ++i)
        for (std::size_t c = 0; c < jset.size(); ++c) mj(i, c) = m(i, jset[c]);

    CertificateBundle out;
    if (variant == KktVariant::LinearDS) {
        double alpha = mixed_alpha(inst.phi);
        auto hires = solve_square(mj, ustar);
        if (!hires) throw NoInvertibleSubmatrix("certificate: singular M_J");
        Vec h(q, 0.0);
        for (std::size_t c = 0; c < jset.size(); ++c) h[jset[c]] = (*hires)[c];
        Vec w1(n), w2(n);
        for (std::size_t i = 0; i < n; ++i) {
            w1[i] = (1.0 + zeta[i]) / 2.0;
            w2[i] = (1.0 - zeta[i]) / 2.0;
        }
        for (int i : sp) {
            w1[i] = 1.0;
            w2[i] = 0.0;
        }
        for (int i : sm) {
            w1[i] = 0.0;
            w2[i] = 1.0;
        }
        Vec w3{norm1(h)};
        Vec w4 = scale(pos_part(h), alpha);
        Vec w5 = scale(neg_part(h), -alpha);
        Vec w6 = scale(neg_part(h), -(1.0 - alpha));
        Vec w7 = scale(pos_part(h), 1.0 - alpha);
        out.w = {w1, w2, w3, w4, w5, w6, w7};
        out.dual_residual = dual_feasibility_residual(inst, variant, out.w);
        return out;
    }

    if (Q == nullptr) throw BadDimensions("certificate: polytope required for this variant");
    // slot indices of +-e_i among the generators
    std::vector<int> pos_slot(q, -1), neg_slot(q, -1);
    const auto& gens = Q->generators();
    for (std::size_t g = 0; g < gens.size(); ++g) {
        for (std::size_t i = 0; i < q; ++i) {
            Vec e(q, 0.0);
            e[i] = 1.0;
            if (norm_inf(sub(gens[g], e)) < 1e-9) pos_slot[i] = static_cast<int>(g);
            e[i] = -1.0;
            if (norm_inf(sub(gens[g], e)) < 1e-9) neg_slot[i] = static_cast<int>(g);
        }
    }
    for (std::size_t i = 0; i < q; ++i)
        if (pos_slot[i] < 0 || neg_slot[i] < 0)
            throw BadDimensions("certificate: polytope lacks coordinate half-spaces");

    if (variant == KktVariant::NonlinearDS) {
        auto hres = solve_square(mj, ustar);
        if (!hres) throw NoInvertibleSubmatrix("certificate: singular M_J");
        Vec htilde(q, 0.0);  // M htilde = -ustar
        for (std::size_t c = 0; c < jset.size(); ++c) htilde[jset[c]] = -(*hres)[c];
        Vec w1(n), w2(n);
        for (std::size_t i = 0; i < n; ++i) {
            w1[i] = (std::abs(zeta[i]) + zeta[i]) / 2.0;
            w2[i] = (std::abs(zeta[i]) - zeta[i]) / 2.0;
        }
        for (int i : sp) {
            w1[i] = 1.0;
            w2[i] = 0.0;
        }
        for (int i : sm) {
            w1[i] = 0.0;
            w2[i] = 1.0;
        }
        Vec w3(gens.size(), 0.0);  // Gamma w3 = htilde
        for (std::size_t i = 0; i < q; ++i) {
            if (htilde[i] >= 0.0)
                w3[pos_slot[i]] = htilde[i];
            else
                w3[neg_slot[i]] = -htilde[i];
        }
        out.w = {w1, w2, w3};
        out.dual_residual = dual_feasibility_residual(inst, variant, out.w, Q);
        return out;
    }

    // Lasso: scale everything by 1/c
    if (!lasso_c) throw MissingConstant("certificate: lasso variant needs the constant c");
    double c = *lasso_c;
    if (!(c > 0.0)) throw MissingConstant("certificate: c must be positive");
    auto gres = solve_square(mj, ustar);
    if (!gres) throw NoInvertibleSubmatrix("certificate: singular M_J");
    Vec gtilde(q, 0.0);  // M gtilde = ustar
    for (std::size_t cc = 0; cc < jset.size(); ++cc) gtilde[jset[cc]] = (*gres)[cc];
    Vec w1(n), w2(n);
    for (std::size_t i = 0; i < n; ++i) {
        w1[i] = (std::abs(zeta[i]) + zeta[i]) / (2.0 * c);
        w2[i] = (std::abs(zeta[i]) - zeta[i]) / (2.0 * c);
    }
    for (int i : sp) {
        w1[i] = 1.0 / c;
        w2[i] = 0.0;
    }
    for (int i : sm) {
        w1[i] = 0.0;
        w2[i] = 1.0 / c;
    }
    Vec w3{1.0 / c};
    Vec w4(gens.size(), 0.0);  // Gamma w4 = -gtilde / c
    for (std::size_t i = 0; i < q; ++i) {
        double entry = -gtilde[i] / c;
        if (entry >= 0.0)
            w4[pos_slot[i]] = entry;
        else
            w4[neg_slot[i]] = -entry;
    }
    out.w = {w1, w2, w3, w4};
    out.dual_residual = dual_feasibility_residual(inst, variant, out.w, Q);
    return out;
}

Instance weighted_ds_transform(const Instance& inst, const Vec& w_diag) {
    if (w_diag.size() != inst.n()) throw BadDimensions("weighted transform: diag size");
    for (double w : w_diag)
        if (std::abs(w) < 1e-12) throw SingularWeight("weighted transform: zero diagonal");
    Instance out = inst;
    Mat m = inst.M();  // freeze M before scaling A
    Mat a = inst.A;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) /= w_diag[j];
    out.A = a;
    out.mspec = MSpec::explicit_m(m);
    return out;
}

ball::HPoly ds_linear_solution_set(const Instance& inst, double value) {
    if (!inst.tau) throw BadDimensions("solution set: tau missing");
    if (!inst.phi.is_polyhedral()) throw BadDimensions("solution set: polyhedral phi only");
    ball::Polytope Q =
        ball::build_Q(inst.phi, 1, ball::EpsSchedule(), static_cast<int>(inst.q()));
    return assemble_xspace_set(inst, Q, value, *inst.tau);
}

ball::HPoly ds_constraint_set(const Instance& inst) {
    if (!inst.tau) throw BadDimensions("constraint set: tau missing");
    if (!inst.phi.is_polyhedral()) throw BadDimensions("constraint set: polyhedral phi only");
    ball::Polytope Q =
        ball::build_Q(inst.phi, 1, ball::EpsSchedule(), static_cast<int>(inst.q()));
    Mat b = mt_a(inst);
    Vec by = mt_y(inst);
    std::size_t n = inst.n(), rows = Q.generators().size();
    Mat g = Mat::empty(rows, n);
    Vec h(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        Vec row = mat_t_vec(b, Q.generators()[i]);
        for (std::size_t j = 0; j < n; ++j) g(i, j) = row[j];
        h[i] = *inst.tau + dot(Q.generators()[i], by);
    }
    return ball::HPoly::from_rows(g, h);
}

ball::HPoly relaxed_ds_solution_set(const Instance& inst, const ball::Polytope& Q,
                                    double value) {
    if (!inst.tau) throw BadDimensions("solution set: tau missing");
    return assemble_xspace_set(inst, Q, value, *inst.tau);
}

ball::HPoly relaxed_lasso_solution_set(const Instance& inst, const ball::Polytope& Q,
                                       double rho) {
    if (!inst.mu) throw BadDimensions("solution set: mu missing");
    return assemble_xspace_set(inst, Q, *inst.mu, rho);
}

double distance_to_solution_set(const Instance& inst, const SolveResult& res, const Vec& xhat) {
    ball::HPoly set = ball::HPoly::from_rows(Mat::empty(0, inst.n()), Vec());
    if (inst.tau && inst.phi.is_polyhedral()) {
        set = ds_linear_solution_set(inst, res.value);
    } else {
        // smooth norms: outer proxy through the finest relaxation polytope
        std::shared_ptr<const ball::Polytope> Q = res.relax_poly;
        if (!Q)
            Q = std::make_shared<const ball::Polytope>(
                ball::build_Q(inst.phi, std::max<int>(res.trace.size(), 1),
                              ball::EpsSchedule(), static_cast<int>(inst.q())));
        set = inst.tau ? relaxed_ds_solution_set(inst, *Q, res.value)
                       : relaxed_lasso_solution_set(inst, *Q, res.value);
    }
    Vec p = ball::project(set, xhat);
    return norm2(sub(xhat, p));
}

ball::HPoly prune_redundant(const ball::HPoly& p) {
    std::size_t r = p.G.rows(), n = p.G.cols();
    if (r == 0) return p;
    std::vector<bool> keep(r, true);
    for (std::size_t i = 0; i < r; ++i) {
        // row i is redundant iff max g_i^T x over the other rows stays <= h_i;
        // solve the dual (few equality rows): min h^T lam, G^T lam = g_i, lam >= 0
        std::vector<std::size_t> others;
        for (std::size_t kk = 0; kk < r; ++kk)
            if (kk != i && keep[kk]) others.push_back(kk);
        lp::LpProblem dual(others.size());
        dual.nonneg.assign(others.size(), true);
        for (std::size_t kk = 0; kk < others.size(); ++kk) dual.c[kk] = p.h[others[kk]];
        for (std::size_t j = 0; j < n; ++j) {
            Vec row(others.size());
            for (std::size_t kk = 0; kk < others.size(); ++kk) row[kk] = p.G(others[kk], j);
            dual.add_eq(row, p.G(i, j));
        }
        lp::LpSolution s = lp::solve(dual);
        if (s.status == lp::Status::Optimal && s.value <= p.h[i] + 1e-9 * (1.0 + std::abs(p.h[i])))
            keep[i] = false;
    }
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < r; ++i)
        if (keep[i]) live.push_back(i);
    Mat g = Mat::empty(live.size(), n);
    Vec h(live.size());
    for (std::size_t i = 0; i < live.size(); ++i) {
        for (std::size_t j = 0; j < n; ++j) g(i, j) = p.G(live[i], j);
        h[i] = p.h[live[i]];
    }
    ball::HPoly out = ball::HPoly::from_rows(g, h);
    out.E = p.E;
    out.f = p.f;
    return out;
}

}  // namespace sparsestab::solve
