#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "sparsestab/bench.hpp"
#include "sparsestab/bounds.hpp"
#include "sparsestab/certify.hpp"
#include "sparsestab/io.hpp"
#include "sparsestab/solvers.hpp"

using namespace sparsestab;

namespace {

Mat load_matrix(const std::string& path) {
    std::string text = io::read_file(path);
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json")
        return io::matrix_from_json(text);
    return io::matrix_from_csv(text);
}

Vec load_vector(const std::string& path) {
    std::string text = io::read_file(path);
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json")
        return io::vector_from_json(text);
    return io::vector_from_csv(text);
}

void emit(const std::string& out, const std::string& payload) {
    if (out.empty())
        std::cout << payload << "\n";
    else
        io::write_file(out, payload);
}

std::string solve_result_json(const solve::SolveResult& r) {
    std::string j = "{\"value\":" + io::fmt_double(r.value) +
                    ",\"lower_bound\":" + io::fmt_double(r.lower_bound) +
                    ",\"feas_residual\":" + io::fmt_double(r.feas_residual) +
                    ",\"stop_level\":" + std::to_string(r.stop_level) +
                    ",\"nhat\":" + std::to_string(r.nhat) + ",\"x\":" +
                    io::vector_to_json(r.xstar) + ",\"trace\":[";
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const auto& te = r.trace[i];
        if (i) j += ',';
        j += "{\"level\":" + std::to_string(te.level) + ",\"eps\":" + io::fmt_double(te.eps) +
             ",\"value\":" + io::fmt_double(te.value) +
             ",\"halfspaces\":" + std::to_string(te.halfspaces) +
             ",\"violation\":" + io::fmt_double(te.feas_violation) +
             ",\"hausdorff\":" + io::fmt_double(te.hausdorff_stat) + "}";
    }
    j += "]}";
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse recovery stability toolkit"};
    app.require_subcommand(1);

    auto* certify_cmd = app.add_subcommand("certify", "run a matrix-condition certifier");
    std::string matrix_path, property = "weak-rsp", out_path;
    int k = 1;
    certify_cmd->add_option("--matrix", matrix_path, "matrix file (csv or json)")->required();
    certify_cmd->add_option("--k", k, "sparsity order");
    certify_cmd->add_option("--property", property,
                            "weak-rsp | rsp | nsp | stable-nsp | robust-nsp | rip | coherence");
    certify_cmd->add_option("--out", out_path, "output json path");

    auto* ds_cmd = app.add_subcommand("solve-ds", "solve a residual-bounded selector instance");
    auto* lasso_cmd = app.add_subcommand("solve-lasso", "solve an l1-budget instance");
    std::string instance_path;
    double delta = -1.0, eps1 = 0.5;
    for (auto* cmd : {ds_cmd, lasso_cmd}) {
        cmd->add_option("--instance", instance_path, "instance json")->required();
        cmd->add_option("--delta", delta, "relaxation stopping pad (default tau/10 or 0.01)");
        cmd->add_option("--eps1", eps1, "first approximation level");
        cmd->add_option("--out", out_path, "output json path");
    }

    auto* ball_cmd = app.add_subcommand("approx-ball", "outer polytope of an lp unit ball");
    double ball_p = 2.0, ball_eps = 0.1;
    int ball_dim = 2, ball_level = -1;
    ball_cmd->add_option("--p", ball_p, "norm exponent")->required();
    ball_cmd->add_option("--dim", ball_dim, "ambient dimension")->required();
    ball_cmd->add_option("--eps", ball_eps, "target approximation level")->required();
    ball_cmd->add_option("--level", ball_level, "schedule depth (default: single level)");
    ball_cmd->add_option("--out", out_path, "output json path");

    auto* bounds_cmd = app.add_subcommand("bounds", "evaluate a recovery error bound");
    std::string theorem = "T3.2-INQ-AA", xhat_path;
    double gamma_opt = -1.0, c_opt = -1.0, delta_opt = 0.0;
    std::size_t nhat_opt = 0;
    bounds_cmd->add_option("--theorem", theorem, "bound id, e.g. T3.2-INQ-AA")->required();
    bounds_cmd->add_option("--instance", instance_path, "instance json")->required();
    bounds_cmd->add_option("--xhat", xhat_path, "probe vector file")->required();
    bounds_cmd->add_option("--k", k, "sparsity order");
    bounds_cmd->add_option("--gamma", gamma_opt,
                           "route constant (calibrated empirically if absent)");
    bounds_cmd->add_option("--c", c_opt, "submatrix route constant (computed if absent)");
    bounds_cmd->add_option("--delta", delta_opt, "relaxation pad for the smooth-norm bounds");
    bounds_cmd->add_option("--nhat", nhat_opt, "half-space count override");
    bounds_cmd->add_option("--out", out_path, "output json path");

    auto* run_cmd = app.add_subcommand("run", "run a full experiment");
    std::string experiment, config_path, out_json, out_csv;
    run_cmd->add_option("--experiment", experiment,
                        "t32 | c34 | t45 | t53 | hoffman | geometry | necessity")
        ->required();
    run_cmd->add_option("--config", config_path, "experiment config json");
    run_cmd->add_option("--out-json", out_json, "report json path");
    run_cmd->add_option("--out-csv", out_csv, "flat csv path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (certify_cmd->parsed()) {
            Mat a = load_matrix(matrix_path);
            certify::CertificateReport rep;
            if (property == "weak-rsp")
                rep = certify::weak_rsp(a, k);
            else if (property == "rsp")
                rep = certify::rsp(a, k);
            else if (property == "nsp")
                rep = certify::nsp(a, k, certify::NspVariant::Plain);
            else if (property == "stable-nsp")
                rep = certify::nsp(a, k, certify::NspVariant::Stable);
            else if (property == "robust-nsp")
                rep = certify::nsp(a, k, certify::NspVariant::Robust);
            else if (property == "rip")
                rep = certify::rip_gate(a, k);
            else if (property == "coherence")
                rep = certify::coherence_gate(a, k);
            else
                throw BadDimensions("unknown property " + property);
            emit(out_path, rep.to_json());
            return rep.holds ? 0 : 1;
        }
        if (ds_cmd->parsed() || lasso_cmd->parsed()) {
            solve::Instance inst = solve::instance_from_json(io::read_file(instance_path));
            ball::EpsSchedule sched(eps1);
            solve::SolveResult r;
            if (ds_cmd->parsed()) {
                double d = delta > 0 ? delta : std::min(0.01, inst.tau.value_or(0.1) / 10.0);
                if (d <= 0) d = 0.01;
                r = solve::solve_ds_nonlinear(inst, sched, d);
            } else {
                r = solve::solve_lasso(inst, sched, delta > 0 ? delta : 0.01);
            }
            emit(out_path, solve_result_json(r));
            return 0;
        }
        if (ball_cmd->parsed()) {
            ball::EpsSchedule sched = ball_level > 0
                                          ? ball::EpsSchedule()
                                          : ball::EpsSchedule::explicit_levels({ball_eps});
            int level = ball_level > 0 ? ball_level : 1;
            ball::Polytope q = ball::build_Q(NormSpec::lp(ball_p), level, sched, ball_dim);
            bool ok = ball::sandwich_check(q, NormSpec::lp(ball_p), ball_eps, 1000);
            emit(out_path, q.to_json());
            return ok ? 0 : 1;
        }
        if (bounds_cmd->parsed()) {
            solve::Instance inst = solve::instance_from_json(io::read_file(instance_path));
            Vec xhat = load_vector(xhat_path);
            bounds::BoundId id = bounds::bound_id_from_name(theorem);
            bounds::BoundExtras extras;
            extras.c = c_opt > 0 ? c_opt : bounds::constant_c(inst.M(), inst.A);
            extras.delta = delta_opt;
            extras.nhat = nhat_opt;
            solve::SolveResult solved;
            if (inst.tau) {
                solved = inst.phi.is_polyhedral()
                             ? solve::solve_ds_linear(inst)
                             : solve::solve_ds_nonlinear(inst, ball::EpsSchedule(),
                                                         std::max(*inst.tau / 10.0, 1e-4));
            } else {
                solved = solve::solve_lasso(inst, ball::EpsSchedule(), 0.01);
            }
            if (extras.nhat == 0) extras.nhat = std::max<std::size_t>(solved.nhat, 1);
            bounds::GammaInfo gamma{gamma_opt, "supplied"};
            if (gamma_opt <= 0) {
                bounds::ProbeSet ps;
                ps.inst = inst;
                ps.solved = solved;
                ps.k = k;
                ps.extras = extras;
                ps.probes = {xhat, solved.xstar};
                gamma = {bounds::empirical_gamma(id, {ps}), "empirical"};
            }
            bounds::BoundReport rep =
                bounds::evaluate_bound(id, inst, xhat, solved, k, gamma, extras);
            emit(out_path, rep.to_json());
            return rep.satisfied ? 0 : 1;
        }
        if (run_cmd->parsed()) {
            bench::ExperimentConfig cfg;
            if (!config_path.empty())
                cfg = bench::ExperimentConfig::from_json(io::read_file(config_path));
            bench::RunReport rep = bench::run_experiment(experiment, cfg);
            if (!out_json.empty()) io::write_file(out_json, rep.to_json());
            if (!out_csv.empty()) io::write_file(out_csv, rep.to_csv());
            std::printf("%s: %s (%d/%d checks, %.2fs)\n", rep.experiment.c_str(),
                        rep.aggregate_pass ? "pass" : "FAIL", rep.checks_passed,
                        rep.checks_total, rep.elapsed_seconds);
            return rep.aggregate_pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
