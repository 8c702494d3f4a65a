#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsestab/numerics.hpp"
#include "sparsestab/solvers.hpp"

namespace sparsestab::bounds {

enum class RobinsonMode { ExactTiny, SampledLowerBound };

/// Uniform error-bound constant of a linear system, either exact on tiny
/// systems (dual-vertex enumeration + cone projection) or a sampled lower
/// bound. A SampledLowerBound value never exceeds the exact value.
struct RobinsonEstimate {
    double value = 0.0;
    RobinsonMode mode = RobinsonMode::ExactTiny;
    std::vector<int> worst_subset;  // S achieving the outer max (subset form)
    Vec worst_direction;            // rhs direction achieving the max
    std::size_t samples = 0;
};

struct HoffmanOptions {
    int sample_budget = 256;     // directions per inner problem (sampled mode)
    std::uint64_t seed = 1;
    long combo_cap = 200000;     // dual-basis enumeration budget (exact mode)
};

/// mu_{inf,2}(M', M''): max over feasible right-hand sides in the unit
/// euclidean ball of the minimal sup-norm solution of M'u <= d', M''u = d''.
RobinsonEstimate hoffman_mu(const Mat& mprime, const Mat& mdprime, RobinsonMode mode,
                            const HoffmanOptions& opt = {});

/// sigma_{inf,2}(M1, M2): max of hoffman_mu over all row subsets S of M1 with
/// the ([I_S 0; -I 0], [M1; M2]^T) substitution.
RobinsonEstimate robinson_sigma(const Mat& m1, const Mat& m2, RobinsonMode mode,
                                const HoffmanOptions& opt = {});

struct HoffmanVerification {
    int probes = 0;
    double sigma = 0.0;
    double worst_ratio = 0.0;  // empirical lower bound on sigma
    double worst_slack = kInf; // min over probes of rhs - lhs
    bool all_hold = false;
};

/// Distance-to-polyhedron inequality check: for random probes x the nearest
/// point of L = {M1 u <= d1, M2 u = d2} satisfies
///   ||x - x*||_2 <= sigma * ||[(M1 x - d1)^+; M2 x - d2]||_1 + 1e-7.
HoffmanVerification verify_hoffman_lemma(const Mat& m1, const Mat& m2, const Vec& d1,
                                         const Vec& d2, int probes, std::uint64_t seed = 7);

/// max over invertible m x m column submatrices M_G of
/// ||M_G^{-1} (A A^T)^{-1} A||_{inf->1}; equals the single-term value when
/// M is square.
double constant_c(const Mat& m, const Mat& a);

enum class BoundId {
    T32_InqAA,
    T32_InqNew,
    C34_E2,
    T45_ll2,
    T45_45,
    T53_l2,
    T53_1616,
    C54_FFNN
};

std::string bound_id_name(BoundId id);
BoundId bound_id_from_name(const std::string& name);

struct GammaInfo {
    double value = 0.0;
    std::string mode = "empirical";  // "exact-tiny" | "sampled" | "empirical"
};

struct BoundExtras {
    double c = 0.0;        // route constant (all ids)
    double delta = 0.0;    // relaxation pad (T45/T53/C54 ids)
    std::size_t nhat = 0;  // half-space count (T45-ll2)
};

struct BoundReport {
    BoundId id = BoundId::T32_InqAA;
    double rhs = 0.0;
    double measured = 0.0;  // || xhat - x* ||_2, x* = solution-set projection
    bool satisfied = false;
    double kernel = 0.0;   // gamma-stripped bracket
    double base = 0.0;     // additive part (delta)
    double mult = 1.0;     // gamma multiplier
    double ratio = 0.0;    // (measured - base)^+ / (mult * kernel)
    // constants echoed so the rhs is pure arithmetic of the stored fields
    double gamma_value = 0.0;
    std::string gamma_mode;
    double c = 0.0;
    double sigma_k = 0.0;
    double tau = 0.0;
    double mu = 0.0;
    double delta = 0.0;
    std::size_t nhat = 0;
    int k = 0;
    double phi_residual = 0.0;  // phi(M^T(A xhat - y))
    double inf_residual = 0.0;  // ||M^T(A xhat - y)||_inf

    std::string to_json() const;
    /// Recomputes rhs from the stored scalar fields (bit-for-bit).
    double recompute_rhs() const;
};

/// Gamma-stripped kernel of a bound at the probe xhat.
double bound_kernel(BoundId id, const solve::Instance& inst, const Vec& xhat, int k,
                    const BoundExtras& extras);
/// Additive offset and gamma multiplier of the bound shape.
void bound_shape(BoundId id, const BoundExtras& extras, double& base, double& mult);

BoundReport evaluate_bound(BoundId id, const solve::Instance& inst, const Vec& xhat,
                           const solve::SolveResult& res, int k, const GammaInfo& gamma,
                           const BoundExtras& extras);

/// Probe collection for the empirical route-constant estimate.
struct ProbeSet {
    solve::Instance inst;
    solve::SolveResult solved;
    std::vector<Vec> probes;
    int k = 0;
    BoundExtras extras;
};

/// max over all probes of (measured - base)^+ / (mult * kernel): a certified
/// lower bound on the uniform constant, usable as a consistency statistic.
double empirical_gamma(BoundId id, const std::vector<ProbeSet>& sets);

}  // namespace sparsestab::bounds
