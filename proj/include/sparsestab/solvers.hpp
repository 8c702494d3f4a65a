#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sparsestab/ball.hpp"
#include "sparsestab/lp.hpp"
#include "sparsestab/numerics.hpp"

namespace sparsestab::solve {

/// Auxiliary matrix choice: identity (q = m), the design matrix itself, or an
/// explicit m x q matrix.
struct MSpec {
    enum class Kind { Identity, SameAsA, Explicit };
    Kind kind = Kind::SameAsA;
    Mat m = Mat::empty(0, 0);

    static MSpec identity() { return {Kind::Identity, Mat::empty(0, 0)}; }
    static MSpec same_as_a() { return {Kind::SameAsA, Mat::empty(0, 0)}; }
    static MSpec explicit_m(Mat mm) { return {Kind::Explicit, std::move(mm)}; }
};

/// One recovery problem. The norm parameter alpha of the linear family lives
/// inside phi (MixedInfOne); tau selects the residual-bound problem, mu the
/// l1-budget problem.
struct Instance {
    Mat A;  // m x n, m < n, full row rank
    MSpec mspec;
    Vec y;  // m
    NormSpec phi = NormSpec::lp(2);
    std::optional<double> tau;
    std::optional<double> mu;

    std::size_t m() const { return A.rows(); }
    std::size_t n() const { return A.cols(); }
    Mat M() const;  // materialized auxiliary matrix
    std::size_t q() const { return M().cols(); }
    /// rank(A) = rank(M) = m, m < n, m <= q; throws BadDimensions otherwise.
    void validate() const;
};

Instance instance_from_json(const std::string& text);
std::string instance_to_json(const Instance& inst);

struct TraceEntry {
    int level = 0;
    double eps = 0.0;
    double value = 0.0;         // relaxed optimal value at this level
    std::size_t halfspaces = 0;
    double feas_violation = 0.0;   // original-constraint violation of the level solution
    double hausdorff_stat = -1.0;  // -1 until computed for this level
};

struct SolveResult {
    Vec xstar;
    double value = 0.0;
    std::vector<Vec> dual_w;  // dual certificate blocks, paper-system ordering
    std::vector<TraceEntry> trace;
    int stop_level = 0;        // first level where the hausdorff statistic <= delta
    std::size_t nhat = 0;      // half-space count at stop_level
    double delta = 0.0;
    double feas_residual = 0.0;  // violation of the original constraint at xstar
    double lower_bound = 0.0;    // value bracket around the true optimum
    double upper_bound = 0.0;
    std::shared_ptr<const ball::Polytope> relax_poly;  // finest level used (smooth phi)
    Vec x_relaxed;  // final-level relaxed optimum before the feasibility polish
};

struct NonlinearOptions {
    double feastol = 1e-6;     // relative feasibility for the returned point
    double value_gap = 1e-5;   // relative upper-lower bracket width at exit
    int max_level = 30;
    int stat_gap = 3;          // finer level used as the inner proxy set
};

/// Linear-constraint selector (phi = MixedInfOne or l1/linf), solved as one LP.
SolveResult solve_ds_linear(const Instance& inst);

/// Smooth-norm selector via the nested outer-polytope relaxation. Requires
/// tau > 0 for smooth phi; tau = 0 falls back to the equality-constrained LP.
SolveResult solve_ds_nonlinear(const Instance& inst, const ball::EpsSchedule& sched,
                               double delta, const NonlinearOptions& opt = {});

/// l1-budget regression; polyhedral phi solves one LP (exact polytope), smooth
/// phi runs the same relaxation loop on the epigraph form.
SolveResult solve_lasso(const Instance& inst, const ball::EpsSchedule& sched, double delta,
                        const NonlinearOptions& opt = {});

enum class KktVariant { LinearDS, NonlinearDS, Lasso };

struct Slice {
    std::string name;
    std::size_t offset = 0;
    std::size_t length = 0;
};

/// Inequality/equality description M1 z <= b1, M2 z = b2 of the full
/// primal-dual optimality set, with a named variable layout.
struct KktSystem {
    Mat M1;
    Vec b1;
    Mat M2;
    Vec b2;
    std::vector<Slice> layout;

    std::size_t width() const { return M1.cols(); }
    Vec assemble(const std::vector<Vec>& blocks) const;
    /// max over rows of violation (positive part for M1, absolute for M2)
    double residual(const Vec& z) const;
};

KktSystem build_kkt_linear(const Instance& inst);
KktSystem build_kkt_nonlinear(const Instance& inst, const ball::Polytope& Q);
KktSystem build_kkt_lasso(const Instance& inst, const ball::Polytope& Q);

struct CertificateBundle {
    std::vector<Vec> w;     // blocks named per layout (w1.. for the variant)
    double dual_residual;   // worst violation of the dual-program constraints
};

/// Builds the dual-feasible point used in the stability arguments from a
/// sign-pattern vector zeta = A^T ustar for the top-k support of x.
/// The Lasso variant scales by the route constant c (pass lasso_c, see
/// bounds::constant_c); NonlinearDS and Lasso need the polytope Q.
CertificateBundle construct_dual_certificate(const Instance& inst, const Vec& x, int k,
                                             const Vec& zeta, const Vec& ustar,
                                             KktVariant variant,
                                             const ball::Polytope* Q = nullptr,
                                             std::optional<double> lasso_c = std::nullopt);

/// Residuals of the dual program constraints for given blocks (0 = feasible).
double dual_feasibility_residual(const Instance& inst, KktVariant variant,
                                 const std::vector<Vec>& w, const ball::Polytope* Q = nullptr);

/// Scaled instance A W^{ -1 } for the weighted-l1 problem; solutions map back
/// via x = W^{-1} u.
Instance weighted_ds_transform(const Instance& inst, const Vec& w_diag);

/// H-representation of {x : ||x||_1 <= value, phi(M^T(Ax-y)) <= tau} for
/// polyhedral phi (n <= 16).
ball::HPoly ds_linear_solution_set(const Instance& inst, double value);
/// Constraint rows only: {x : phi(M^T(Ax-y)) <= tau} for polyhedral phi.
ball::HPoly ds_constraint_set(const Instance& inst);
/// Relaxed analogue through a polytope Q (smooth phi).
ball::HPoly relaxed_ds_solution_set(const Instance& inst, const ball::Polytope& Q,
                                    double value);
ball::HPoly relaxed_lasso_solution_set(const Instance& inst, const ball::Polytope& Q,
                                       double rho);

/// Distance from xhat to the solution set of the solved problem (projection).
double distance_to_solution_set(const Instance& inst, const SolveResult& res, const Vec& xhat);

/// Drops LP-redundant inequality rows (used before vertex enumeration).
ball::HPoly prune_redundant(const ball::HPoly& p);

}  // namespace sparsestab::solve
