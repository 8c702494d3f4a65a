#include "sparsestab/lp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <sstream>
#include <cstdio>
#include <cstdlib>

#include "sparsestab/io.hpp"

namespace sparsestab::lp {

namespace {

Mat with_row(const Mat& m, const Vec& row) {
    Mat out = Mat::empty(m.rows() + 1, m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    for (std::size_t j = 0; j < m.cols(); ++j) out(m.rows(), j) = row[j];
    return out;
}

Vec with_entry(const Vec& v, double x) {
    std::vector<double> out(v.begin(), v.end());
    out.push_back(x);
    return Vec(std::move(out));
}

// Standard form min c~.x, A x = b, x >= 0, built column-wise.
struct StdForm {
    std::size_t m = 0;
    std::vector<Vec> cols;    // length m each
    Vec b;
    Vec cost;
    // mapping back to the original problem
    std::vector<int> plus_col, minus_col;  // per original variable
    std::vector<int> slack_col;            // per inequality row
    std::vector<double> row_sign;          // +-1 applied to original row order
    std::size_t n_ineq = 0, n_eq = 0;
};

StdForm build_std(const LpProblem& p, const std::vector<bool>& drop_row) {
    StdForm s;
    s.n_ineq = p.G.rows();
    s.n_eq = p.E.rows();
    std::vector<std::size_t> live_rows;
    for (std::size_t i = 0; i < s.n_ineq + s.n_eq; ++i)
        if (drop_row.empty() || !drop_row[i]) live_rows.push_back(i);
    s.m = live_rows.size();
    s.row_sign.assign(s.n_ineq + s.n_eq, 1.0);

    auto orig_row = [&](std::size_t i, std::size_t j) -> double {
        return i < s.n_ineq ? p.G(i, j) : p.E(i - s.n_ineq, j);
    };
    auto orig_rhs = [&](std::size_t i) -> double {
        return i < s.n_ineq ? p.h[i] : p.f[i - s.n_ineq];
    };

    s.b = Vec(s.m);
    for (std::size_t r = 0; r < s.m; ++r) {
        double rhs = orig_rhs(live_rows[r]);
        if (rhs < 0.0) s.row_sign[live_rows[r]] = -1.0;
        s.b[r] = std::abs(rhs);
    }

    double sense_mul = p.sense == Sense::Min ? 1.0 : -1.0;
    std::size_t nv = p.nvars();
    s.plus_col.assign(nv, -1);
    s.minus_col.assign(nv, -1);
    std::vector<double> costs;
    auto push_col = [&](std::size_t var, double var_sign) {
        Vec col(s.m);
        for (std::size_t r = 0; r < s.m; ++r)
            col[r] = s.row_sign[live_rows[r]] * var_sign * orig_row(live_rows[r], var);
        s.cols.push_back(std::move(col));
        costs.push_back(sense_mul * var_sign * p.c[var]);
        return static_cast<int>(s.cols.size() - 1);
    };
    for (std::size_t j = 0; j < nv; ++j) {
        bool nn = j < p.nonneg.size() && p.nonneg[j];
        s.plus_col[j] = push_col(j, +1.0);
        if (!nn) s.minus_col[j] = push_col(j, -1.0);
    }
    s.slack_col.assign(s.n_ineq, -1);
    for (std::size_t r = 0; r < s.m; ++r) {
        std::size_t i = live_rows[r];
        if (i >= s.n_ineq) continue;
        Vec col(s.m);
        col[r] = s.row_sign[i];
        s.cols.push_back(std::move(col));
        costs.push_back(0.0);
        s.slack_col[i] = static_cast<int>(s.cols.size() - 1);
    }
    s.cost = Vec(std::move(costs));
    return s;
}

// Revised simplex over the standard form with explicit dense basis inverse.
class Simplex {
  public:
    Simplex(const StdForm& s, const Tols& t) : s_(s), t_(t), m_(s.m) {}

    // returns phase-1 objective; basis starts as artificials
    Status run(Vec& x_out, std::vector<int>& basis_out, Vec& y_out,
               std::vector<std::size_t>& redundant_rows) {
        std::size_t n = s_.cols.size();
        basis_.resize(m_);
        binv_ = Mat::identity(std::max<std::size_t>(m_, 1));
        xb_ = s_.b;
        for (std::size_t r = 0; r < m_; ++r) basis_[r] = static_cast<int>(n + r);

        // phase 1: minimize the sum of artificials
        Vec phase1_cost(n + m_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) phase1_cost[n + r] = 1.0;
        Status st = iterate(phase1_cost, /*allow_artificial=*/true);
        if (st != Status::Optimal) return st;  // cannot happen: phase 1 is bounded
        double p1 = 0.0;
        for (std::size_t r = 0; r < m_; ++r)
            if (basis_[r] >= static_cast<int>(n)) p1 += xb_[r];
        if (p1 > t_.primal * (1.0 + norm_inf(s_.b))) return Status::Infeasible;

        // drive remaining artificials out of the basis
        for (std::size_t r = 0; r < m_; ++r) {
            if (basis_[r] < static_cast<int>(n)) continue;
            int enter = -1;
            for (std::size_t j = 0; j < n; ++j) {
                double wrj = 0.0;
                for (std::size_t k = 0; k < m_; ++k) wrj += binv_(r, k) * s_.cols[j][k];
                if (std::abs(wrj) > 1e-9) {
                    bool in_basis = false;
                    for (int bv : basis_)
                        if (bv == static_cast<int>(j)) in_basis = true;
                    if (!in_basis) {
                        enter = static_cast<int>(j);
                        break;
                    }
                }
            }
            if (enter < 0) {
                redundant_rows.push_back(r);
                continue;
            }
            Vec w = ftran(s_.cols[enter]);
            pivot(static_cast<std::size_t>(r), enter, w);
        }
        if (!redundant_rows.empty()) return Status::Optimal;  // caller restarts

        // phase 2
        Vec phase2_cost(n + m_, 0.0);
        for (std::size_t j = 0; j < n; ++j) phase2_cost[j] = s_.cost[j];
        st = iterate(phase2_cost, /*allow_artificial=*/false);
        if (st != Status::Optimal) return st;
        // clean the basis inverse and basic values before extraction
        if (!refactor()) refine_basics();
        refine_basics();

        x_out = Vec(n, 0.0);
        for (std::size_t r = 0; r < m_; ++r)
            if (basis_[r] < static_cast<int>(n)) x_out[basis_[r]] = std::max(xb_[r], 0.0);
        basis_out = basis_;
        // duals of the standard-form rows
        y_out = Vec(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            double s = 0.0;
            for (std::size_t r = 0; r < m_; ++r) {
                double cb = basis_[r] < static_cast<int>(n) ? s_.cost[basis_[r]] : 0.0;
                s += cb * binv_(r, i);
            }
            y_out[i] = s;
        }
        return Status::Optimal;
    }

  private:
    Vec ftran(const Vec& col) const {
        Vec w(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < m_; ++k) s += binv_(i, k) * col[k];
            w[i] = s;
        }
        return w;
    }

    void pivot(std::size_t row, int enter, const Vec& w) {
        double piv = w[row];
        if (std::abs(piv) < t_.pivot) throw NumericalBreakdown("simplex: tiny pivot");
        double inv = 1.0 / piv;
        for (std::size_t k = 0; k < m_; ++k) binv_(row, k) *= inv;
        xb_[row] *= inv;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row) continue;
            double f = w[i];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < m_; ++k) binv_(i, k) -= f * binv_(row, k);
            xb_[i] -= f * xb_[row];
            if (xb_[i] < 0.0 && xb_[i] > -1e-11) xb_[i] = 0.0;
        }
        basis_[row] = enter;
        if (++pivots_since_refactor_ >= refactor_every_) {
            if (refactor() && feasibility_drift() > 1e-7 * (1.0 + norm_inf(s_.b)))
                throw NumericalBreakdown("simplex: basic values drifted");
        }
    }

    double feasibility_drift() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < m_; ++i) worst = std::max(worst, -xb_[i]);
        return worst;
    }

    Vec basis_column(std::size_t r) const {
        std::size_t n = s_.cols.size();
        if (basis_[r] < static_cast<int>(n)) return s_.cols[basis_[r]];
        Vec e(m_, 0.0);
        e[basis_[r] - n] = 1.0;
        return e;
    }

    // recompute the inverse from scratch; returns false (leaving the
    // update-form inverse in place) when the basis is too ill-conditioned
    bool refactor() {
        pivots_since_refactor_ = 0;
        Mat b(std::max<std::size_t>(m_, 1), std::max<std::size_t>(m_, 1), 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            Vec col = basis_column(r);
            for (std::size_t i = 0; i < m_; ++i) b(i, r) = col[i];
        }
        // Gauss-Jordan inverse
        Mat inv = Mat::identity(std::max<std::size_t>(m_, 1));
        for (std::size_t k = 0; k < m_; ++k) {
            std::size_t piv = k;
            for (std::size_t i = k + 1; i < m_; ++i)
                if (std::abs(b(i, k)) > std::abs(b(piv, k))) piv = i;
            if (std::abs(b(piv, k)) < t_.pivot) return false;
            if (piv != k)
                for (std::size_t j = 0; j < m_; ++j) {
                    std::swap(b(k, j), b(piv, j));
                    std::swap(inv(k, j), inv(piv, j));
                }
            double d = 1.0 / b(k, k);
            for (std::size_t j = 0; j < m_; ++j) {
                b(k, j) *= d;
                inv(k, j) *= d;
            }
            for (std::size_t i = 0; i < m_; ++i) {
                if (i == k) continue;
                double f = b(i, k);
                if (f == 0.0) continue;
                for (std::size_t j = 0; j < m_; ++j) {
                    b(i, j) -= f * b(k, j);
                    inv(i, j) -= f * inv(k, j);
                }
            }
        }
        binv_ = inv;
        // refresh basic values
        for (std::size_t i = 0; i < m_; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < m_; ++k) s += binv_(i, k) * s_.b[k];
            xb_[i] = std::max(s, 0.0);
        }
        return true;
    }

    // one step of iterative refinement on the basic values: xb += Binv (b - B xb)
    void refine_basics() {
        Vec res = s_.b;
        for (std::size_t r = 0; r < m_; ++r) {
            Vec col = basis_column(r);
            for (std::size_t i = 0; i < m_; ++i) res[i] -= col[i] * xb_[r];
        }
        for (std::size_t i = 0; i < m_; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < m_; ++k) s += binv_(i, k) * res[k];
            xb_[i] = std::max(xb_[i] + s, 0.0);
        }
    }

    Status iterate(const Vec& cost, bool allow_artificial) {
        std::size_t n = s_.cols.size();
        std::size_t ncols = allow_artificial ? n + m_ : n;
        long max_iters = 4000 + 400L * static_cast<long>(m_ + n);
        for (long it = 0; it < max_iters; ++it) {
            // duals y = c_B B^-1
            Vec y(m_);
            for (std::size_t i = 0; i < m_; ++i) {
                double s = 0.0;
                for (std::size_t r = 0; r < m_; ++r) s += cost[basis_[r]] * binv_(r, i);
                y[i] = s;
            }
            // Bland: first column with negative reduced cost
            int enter = -1;
            for (std::size_t j = 0; j < ncols; ++j) {
                bool in_basis = false;
                for (int bv : basis_)
                    if (bv == static_cast<int>(j)) {
                        in_basis = true;
                        break;
                    }
                if (in_basis) continue;
                double cj = cost[j];
                double yaj;
                if (j < n)
                    yaj = dot(y, s_.cols[j]);
                else
                    yaj = y[j - n];
                if (cj - yaj < -t_.dual) {
                    enter = static_cast<int>(j);
                    break;
                }
            }
            if (enter < 0) return Status::Optimal;
            Vec col = enter < static_cast<int>(n) ? s_.cols[enter] : Vec(m_, 0.0);
            if (enter >= static_cast<int>(n)) col[enter - n] = 1.0;
            Vec w = ftran(col);
            // ratio test with Bland tie-breaking on basic variable index
            double best_ratio = kInf;
            int leave = -1;
            for (std::size_t i = 0; i < m_; ++i) {
                if (w[i] <= ratio_pivot_) continue;
                double ratio = xb_[i] / w[i];
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && (leave < 0 || basis_[i] < basis_[leave]))) {
                    best_ratio = ratio;
                    leave = static_cast<int>(i);
                }
            }
            if (leave < 0) return Status::Unbounded;
            pivot(static_cast<std::size_t>(leave), enter, w);
        }
        throw NumericalBreakdown("simplex: iteration limit");
    }

    const StdForm& s_;
    Tols t_;
    std::size_t m_;
    Mat binv_;
    Vec xb_;
    std::vector<int> basis_;
    int pivots_since_refactor_ = 0;

  public:
    double ratio_pivot_ = 1e-9;
    int refactor_every_ = 64;
};

struct SolverKnobs {
    double ratio_pivot = 1e-9;
    int refactor_every = 64;
};

LpSolution solve_impl(const LpProblem& p, const SolverKnobs& knobs) {
    if (p.h.size() != p.G.rows() || p.f.size() != p.E.rows() || p.G.cols() != p.nvars() ||
        p.E.cols() != p.nvars())
        throw BadDimensions("lp::solve: inconsistent blocks");
    std::vector<bool> drop;
    StdForm s = build_std(p, drop);
    for (int attempt = 0; attempt < 8; ++attempt) {
        Simplex sx(s, p.tols);
        sx.ratio_pivot_ = knobs.ratio_pivot;
        sx.refactor_every_ = knobs.refactor_every;
        Vec x, y;
        std::vector<int> basis;
        std::vector<std::size_t> redundant;
        Status st = sx.run(x, basis, y, redundant);
        if (!redundant.empty()) {
            // rebuild without redundant rows and re-run
            if (drop.empty()) drop.assign(p.G.rows() + p.E.rows(), false);
            std::vector<std::size_t> live;
            for (std::size_t i = 0; i < drop.size(); ++i)
                if (!drop[i]) live.push_back(i);
            for (std::size_t r : redundant) drop[live[r]] = true;
            s = build_std(p, drop);
            continue;
        }
        LpSolution sol;
        sol.status = st;
        if (st != Status::Optimal) return sol;

        std::size_t nv = p.nvars();
        sol.z = Vec(nv);
        for (std::size_t j = 0; j < nv; ++j) {
            double v = x[s.plus_col[j]];
            if (s.minus_col[j] >= 0) v -= x[s.minus_col[j]];
            sol.z[j] = v;
        }
        sol.value = dot(p.c, sol.z);

        // map standard-form duals back through row signs / dropped rows
        sol.dual_ineq = Vec(p.G.rows(), 0.0);
        sol.dual_eq = Vec(p.E.rows(), 0.0);
        std::size_t live_r = 0;
        for (std::size_t i = 0; i < p.G.rows() + p.E.rows(); ++i) {
            if (!drop.empty() && drop[i]) continue;
            // lambda = -sign * y in both senses (reduced-cost sign of the slack)
            double mult = -s.row_sign[i] * y[live_r++];
            if (i < p.G.rows())
                sol.dual_ineq[i] = std::max(mult, 0.0);
            else
                sol.dual_eq[i - p.G.rows()] = mult;
        }

        // residual bookkeeping
        double pres = 0.0;
        std::vector<int> act;
        if (p.G.rows() > 0) {
            Vec gz = matvec(p.G, sol.z);
            for (std::size_t i = 0; i < p.G.rows(); ++i) {
                pres = std::max(pres, gz[i] - p.h[i]);
                if (gz[i] >= p.h[i] - p.tols.primal * (1.0 + std::abs(p.h[i])))
                    act.push_back(static_cast<int>(i));
                sol.compl_residual = std::max(
                    sol.compl_residual, std::abs(sol.dual_ineq[i] * (p.h[i] - gz[i])));
            }
        }
        if (p.E.rows() > 0) {
            Vec ez = matvec(p.E, sol.z);
            for (std::size_t i = 0; i < p.E.rows(); ++i)
                pres = std::max(pres, std::abs(ez[i] - p.f[i]));
        }
        sol.primal_residual = pres;
        sol.active = IndexSet(std::move(act));

        Vec station = p.c;
        double dsign = p.sense == Sense::Min ? 1.0 : -1.0;
        if (p.G.rows() > 0) {
            Vec gt = mat_t_vec(p.G, sol.dual_ineq);
            for (std::size_t j = 0; j < nv; ++j) station[j] += dsign * gt[j];
        }
        if (p.E.rows() > 0) {
            Vec et = mat_t_vec(p.E, sol.dual_eq);
            for (std::size_t j = 0; j < nv; ++j) station[j] += dsign * et[j];
        }
        double dres = 0.0;
        for (std::size_t j = 0; j < nv; ++j) {
            bool nn = j < p.nonneg.size() && p.nonneg[j];
            double sj = dsign * station[j];
            if (nn)
                dres = std::max(dres, -sj);  // must be >= 0
            else
                dres = std::max(dres, std::abs(sj));
        }
        sol.dual_residual = dres;
        double dual_value = -(p.G.rows() ? dot(p.h, sol.dual_ineq) : 0.0) -
                            (p.E.rows() ? dot(p.f, sol.dual_eq) : 0.0);
        if (p.sense == Sense::Max) dual_value = -dual_value;
        sol.gap = std::abs(sol.value - dual_value);
        // a solution that misses the optimality invariants by orders of
        // magnitude is numerical garbage; fail over to the equilibrated retry
        double rhs_scale = 1.0 + (p.h.size() ? norm_inf(p.h) : 0.0) +
                           (p.f.size() ? norm_inf(p.f) : 0.0);
        if (sol.primal_residual > 1e-6 * rhs_scale ||
            sol.gap > 1e-5 * (1.0 + std::abs(sol.value))) {
            if (std::getenv("SPARSESTAB_LP_DEBUG"))
                std::fprintf(stderr, "lp invariant: pres=%.3e dres=%.3e gap=%.3e value=%.6e rows=%zux%zu\n",
                             sol.primal_residual, sol.dual_residual, sol.gap, sol.value,
                             p.G.rows() + p.E.rows(), p.nvars());
            throw NumericalBreakdown("lp::solve: optimality invariants violated");
        }
        return sol;
    }
    throw NumericalBreakdown("lp::solve: redundancy elimination did not settle");
}

LpProblem equilibrated(const LpProblem& p, std::vector<double>& gs, std::vector<double>& es) {
    LpProblem q = p;
    gs.assign(p.G.rows(), 1.0);
    es.assign(p.E.rows(), 1.0);
    for (std::size_t i = 0; i < p.G.rows(); ++i) {
        double mx = std::abs(p.h[i]);
        for (std::size_t j = 0; j < p.G.cols(); ++j) mx = std::max(mx, std::abs(p.G(i, j)));
        if (mx > 0) {
            gs[i] = 1.0 / mx;
            for (std::size_t j = 0; j < p.G.cols(); ++j) q.G(i, j) *= gs[i];
            q.h[i] *= gs[i];
        }
    }
    for (std::size_t i = 0; i < p.E.rows(); ++i) {
        double mx = std::abs(p.f[i]);
        for (std::size_t j = 0; j < p.E.cols(); ++j) mx = std::max(mx, std::abs(p.E(i, j)));
        if (mx > 0) {
            es[i] = 1.0 / mx;
            for (std::size_t j = 0; j < p.E.cols(); ++j) q.E(i, j) *= es[i];
            q.f[i] *= es[i];
        }
    }
    return q;
}

}  // namespace

void LpProblem::add_ineq(const Vec& row, double rhs) {
    if (row.size() != nvars()) throw BadDimensions("add_ineq: row size");
    G = with_row(G, row);
    h = with_entry(h, rhs);
}

void LpProblem::add_eq(const Vec& row, double rhs) {
    if (row.size() != nvars()) throw BadDimensions("add_eq: row size");
    E = with_row(E, row);
    f = with_entry(f, rhs);
}

LpSolution solve(const LpProblem& p) {
    try {
        return solve_impl(p, SolverKnobs{});
    } catch (const NumericalBreakdown&) {
    }
    // retry ladder: row equilibration, then a paranoid pivot discipline
    for (int rung = 0; rung < 2; ++rung) {
        std::vector<double> gs, es;
        LpProblem q = equilibrated(p, gs, es);
        SolverKnobs knobs;
        if (rung == 1) {
            knobs.ratio_pivot = 1e-7;
            knobs.refactor_every = 8;
        }
        try {
            LpSolution sol = solve_impl(q, knobs);
            if (sol.status == Status::Optimal) {
                for (std::size_t i = 0; i < gs.size(); ++i) sol.dual_ineq[i] *= gs[i];
                for (std::size_t i = 0; i < es.size(); ++i) sol.dual_eq[i] *= es[i];
            }
            return sol;
        } catch (const NumericalBreakdown&) {
            if (rung == 1) throw;
        }
    }
    throw NumericalBreakdown("lp::solve: retries exhausted");
}

std::pair<bool, std::optional<Vec>> feasible(const LpProblem& p) {
    LpProblem q = p;
    q.c = Vec(p.nvars(), 0.0);
    q.sense = Sense::Min;
    LpSolution sol = solve(q);
    if (sol.status == Status::Optimal) return {true, sol.z};
    return {false, std::nullopt};
}

VertexSet enumerate_vertices(const Mat& G, const Vec& h, const VertexEnumOptions& opt) {
    std::size_t d = G.cols(), r = G.rows();
    if (static_cast<int>(d) > opt.dim_cap || static_cast<int>(r) > opt.row_cap)
        throw SizeLimit("enumerate_vertices: dimension or row cap exceeded");
    if (opt.check_bounded) {
        for (std::size_t j = 0; j < d; ++j) {
            for (double sign : {1.0, -1.0}) {
                LpProblem p(d);
                p.G = G;
                p.h = h;
                p.sense = Sense::Max;
                p.c[j] = sign;
                LpSolution sol = solve(p);
                if (sol.status == Status::Unbounded)
                    throw Unbounded("enumerate_vertices: recession direction");
                if (sol.status == Status::Infeasible) return {};
            }
        }
    }
    VertexSet verts;
    std::vector<std::size_t> pick(d);
    // iterate over all d-subsets of rows
    std::vector<std::size_t> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    if (r < d) return verts;
    while (true) {
        Mat sq(d, d, 0.0);
        Vec rhs(d);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) sq(i, j) = G(idx[i], j);
            rhs[i] = h[idx[i]];
        }
        if (auto v = solve_square(sq, rhs, 1e-10)) {
            Vec gz = matvec(G, *v);
            bool feas = true;
            for (std::size_t i = 0; i < r && feas; ++i)
                if (gz[i] > h[i] + opt.tol * (1.0 + std::abs(h[i]))) feas = false;
            if (feas) {
                bool dup = false;
                for (const Vec& u : verts)
                    if (norm_inf(sub(u, *v)) <= opt.tol) {
                        dup = true;
                        break;
                    }
                if (!dup) verts.push_back(*v);
            }
        }
        // next combination
        std::size_t k = d;
        while (k > 0 && idx[k - 1] == r - d + (k - 1)) --k;
        if (k == 0) break;
        ++idx[k - 1];
        for (std::size_t j = k; j < d; ++j) idx[j] = idx[j - 1] + 1;
    }
    return verts;
}

std::string dump(const LpProblem& p) {
    std::ostringstream os;
    os << (p.sense == Sense::Min ? "min" : "max") << " c.z with c = [";
    for (std::size_t j = 0; j < p.c.size(); ++j) os << (j ? " " : "") << io::fmt_double(p.c[j]);
    os << "]\n";
    for (std::size_t i = 0; i < p.G.rows(); ++i) {
        os << "  ineq " << i << ": [";
        for (std::size_t j = 0; j < p.G.cols(); ++j)
            os << (j ? " " : "") << io::fmt_double(p.G(i, j));
        os << "] <= " << io::fmt_double(p.h[i]) << "\n";
    }
    for (std::size_t i = 0; i < p.E.rows(); ++i) {
        os << "  eq   " << i << ": [";
        for (std::size_t j = 0; j < p.E.cols(); ++j)
            os << (j ? " " : "") << io::fmt_double(p.E(i, j));
        os << "] == " << io::fmt_double(p.f[i]) << "\n";
    }
    os << "  nonneg: [";
    for (std::size_t j = 0; j < p.nonneg.size(); ++j) os << (p.nonneg[j] ? '1' : '0');
    os << "]\n";
    return os.str();
}

}  // namespace sparsestab::lp
