#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sparsestab/numerics.hpp"

namespace sparsestab::certify {

/// Disjoint sign pattern (S1, S2) with |S1| + |S2| <= k.
struct SignPattern {
    IndexSet s1;
    IndexSet s2;
};

/// One per-pattern certificate: the row-space vector zeta = A^T u.
struct PatternCertificate {
    SignPattern pattern;
    Vec zeta;
    Vec u;
};

enum class NspVariant { Plain, Stable, Robust };

struct CertificateReport {
    std::string property;  // "weak-rsp", "rsp", "nsp", "stable-nsp", "robust-nsp",
                           // "rip", "coherence"
    int k = 0;
    bool holds = false;
    std::vector<PatternCertificate> certificates;  // populated when holds
    std::optional<SignPattern> counterexample_pattern;
    std::optional<Vec> counterexample_vector;      // null-space vector for nsp
    std::optional<IndexSet> counterexample_support;
    std::size_t patterns_examined = 0;
    // property-specific scalars
    double stable_rho = 0.0;        // max_S max ||zeta_S||_1 over normalized null vectors
    double robust_rho_prime = 0.0;  // grid value
    double robust_rho_second = 0.0; // fitted estimate
    double rip_delta = 0.0;
    double mu1_k = 0.0, mu1_km1 = 0.0;
    bool columns_rescaled = false;  // coherence: input columns were normalized

    std::string to_json() const;
};

/// Every disjoint pattern admits zeta in R(A^T) with zeta = +-1 on the
/// pattern and |zeta| <= 1 elsewhere (LP feasibility per pattern, n <= 16).
CertificateReport weak_rsp(const Mat& a, int k);

/// Strict variant |zeta_i| < 1 off the pattern, encoded with margin 1e-6.
CertificateReport rsp(const Mat& a, int k);

/// Null space property family (null-space dimension <= 12). Plain reports
/// holds iff every v_S < 1 - 1e-9; Stable reports rho; Robust fits (rho',
/// rho'') over a grid and probe set (estimate, not a certificate).
CertificateReport nsp(const Mat& a, int k, NspVariant variant);

/// Worst relative eigenvalue deviation of k-column Gram blocks (C(n,k) <= 1e5).
double rip_delta(const Mat& a, int k);
/// Gate delta_{2k} < 1/sqrt(2) wrapped as a report.
CertificateReport rip_gate(const Mat& a, int k);

/// Cumulative coherence mu_1(k) of the l2-normalized columns.
double mutual_coherence_mu1(const Mat& a, int k);
/// Gate mu_1(k) + mu_1(k-1) < 1.
CertificateReport coherence_gate(const Mat& a, int k);

struct NecessityReport {
    Vec xhat;
    std::vector<double> taus;
    std::vector<double> errors;  // distance from xhat to the selector's solution set
    bool nonvanishing = false;   // every error > 0.1 * min nonzero magnitude
    std::string to_json() const;
};

/// Builds a sparse vector realizing a failing weak-RSP pattern, runs the
/// standard selector (M = A, alpha = 1) over the tau grid and reports the
/// recovery errors. Requires a failed report with its pattern.
NecessityReport necessity_probe(const Mat& a, int k, const CertificateReport& failed_weak_rsp,
                                const std::vector<double>& taus);

/// Independent re-verification of a report (certificates or counterexample).
bool reverify(const Mat& a, const CertificateReport& report);

}  // namespace sparsestab::certify
