#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsestab/bounds.hpp"
#include "sparsestab/certify.hpp"
#include "sparsestab/solvers.hpp"

namespace sparsestab::bench {

/// xoshiro256++ seeded through splitmix64, gaussians via Box-Muller on the
/// 53-bit uniforms. The algorithm identity is pinned so alternate
/// implementations can reproduce the streams bit for bit.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next_u64();
    double uniform();   // [0, 1)
    double gaussian();  // standard normal
    int below(int n);   // uniform integer in [0, n)

  private:
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

enum class Generator { Gaussian, GaussianNormalized, FromFile };

struct ExperimentConfig {
    std::uint64_t seed = 42;
    std::size_t m = 4, n = 8, q = 8;
    int k = 1;
    int instances = 10;
    int probes = 100;
    Generator generator = Generator::Gaussian;
    std::string from_file;
    std::string phi_kind = "mixed";  // "mixed" | "lp"
    double phi_value = 1.0;          // alpha or p
    std::string mkind = "same-as-A";
    std::vector<double> taus;
    std::vector<double> mus;
    std::vector<double> alphas = {1.0};
    double noise_frac = 0.5;  // measurement noise as a fraction of min tau
    double delta = -1.0;      // nonlinear stopping pad; < 0 means tau/10

    static ExperimentConfig from_json(const std::string& text);
    std::string to_json() const;
    NormSpec phi() const;
    solve::MSpec mspec() const;
};

struct GeneratedInstance {
    solve::Instance inst;
    Vec xhat;  // ground-truth sparse vector behind y
};

/// Seeded instance batch; the seed fully determines the output.
std::vector<GeneratedInstance> generate(const ExperimentConfig& cfg);

struct InstanceRecord {
    int index = 0;
    bool ok = true;
    std::string error;
    std::vector<std::string> notes;
    std::vector<std::string> certificate_json;
    std::vector<bounds::BoundReport> bound_reports;
};

struct RunReport {
    std::string experiment;
    std::string config_json;
    std::vector<InstanceRecord> records;
    bool aggregate_pass = false;
    int checks_total = 0;
    int checks_passed = 0;
    double elapsed_seconds = 0.0;
    std::vector<std::string> csv_rows;  // without header

    std::string to_json() const;
    std::string to_csv() const;  // schema-versioned header + rows
};

/// Experiment ids: "t32", "c34", "t45", "t53", "hoffman", "geometry",
/// "necessity".
RunReport run_experiment(const std::string& id, const ExperimentConfig& cfg);

/// Feasible-probe generator for the residual-bound selector; mixes random
/// null-space/range perturbations with directed extreme probes when asked.
std::vector<Vec> feasible_probes(const solve::Instance& inst, const Vec& anchor, int count,
                                 Rng& rng, bool directed);

std::string csv_row(const std::string& experiment, int instance, int k, double param,
                    double phi_value, double error, double rhs, double ratio, bool satisfied);

}  // namespace sparsestab::bench
