#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sparsestab/bench.hpp"
#include "sparsestab/io.hpp"

using namespace sparsestab;
using namespace sparsestab::bench;

namespace {
void Instance_roundtrip_check() {
    solve::Instance inst;
    inst.A = Mat{{1, 0, 1}, {0, 1, 1}};
    inst.mspec = solve::MSpec::identity();
    inst.y = Vec{0.25, -0.5};
    inst.phi = NormSpec::lp(2);
    inst.tau = 0.125;
    std::string path = "/tmp/sparsestab_bench_inst.json";
    sparsestab::io::write_file(path, solve::instance_to_json(inst));
    ExperimentConfig cfg;
    cfg.generator = Generator::FromFile;
    cfg.from_file = path;
    auto gens = generate(cfg);
    REQUIRE(gens.size() == 1);
    CHECK(gens[0].inst.A(1, 2) == 1.0);
    CHECK(gens[0].inst.y[0] == 0.25);
    CHECK(*gens[0].inst.tau == 0.125);
}
}  // namespace

TEST_CASE("rng determinism and stream identity") {
    Rng a(42), b(42);
    for (int t = 0; t < 100; ++t) CHECK(a.next_u64() == b.next_u64());
    Rng c(43);
    CHECK(a.next_u64() != c.next_u64());
    // gaussians are reproducible
    Rng g1(7), g2(7);
    for (int t = 0; t < 50; ++t) CHECK(g1.gaussian() == g2.gaussian());
}

TEST_CASE("generation is seed-deterministic with the right shape") {
    ExperimentConfig cfg;
    cfg.seed = 42;
    cfg.m = 4;
    cfg.n = 8;
    cfg.k = 1;
    cfg.instances = 3;
    cfg.taus = {0.1};
    auto a = generate(cfg);
    auto b = generate(cfg);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(norm_inf(sub(a[i].xhat, b[i].xhat)) == 0.0);
        for (std::size_t r = 0; r < 4; ++r)
            CHECK(norm_inf(sub(a[i].inst.A.row_vec(r), b[i].inst.A.row_vec(r))) == 0.0);
        CHECK(numerical_rank(a[i].inst.A) == 4);
        int nnz = 0;
        for (double v : a[i].xhat)
            if (v != 0) ++nnz;
        CHECK(nnz == 1);
    }
    cfg.seed = 99;
    auto c = generate(cfg);
    CHECK(norm_inf(sub(a[0].inst.A.row_vec(0), c[0].inst.A.row_vec(0))) > 0.0);
}

TEST_CASE("config json round trip") {
    ExperimentConfig cfg;
    cfg.seed = 7;
    cfg.taus = {0.01, 0.1};
    cfg.alphas = {0.0, 1.0};
    cfg.generator = Generator::GaussianNormalized;
    ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
    CHECK(back.seed == 7);
    CHECK(back.taus == cfg.taus);
    CHECK(back.alphas == cfg.alphas);
    CHECK(back.generator == Generator::GaussianNormalized);
}

TEST_CASE("necessity experiment") {
    ExperimentConfig cfg;
    RunReport rep = run_experiment("necessity", cfg);
    CHECK(rep.aggregate_pass);
    CHECK(rep.to_csv().find("schema=1") == 0);
    CHECK(rep.to_json().find("aggregate_pass") != std::string::npos);
}

TEST_CASE("hoffman experiment small") {
    ExperimentConfig cfg;
    cfg.instances = 2;
    cfg.probes = 60;
    RunReport rep = run_experiment("hoffman", cfg);
    CHECK(rep.aggregate_pass);
    CHECK(rep.checks_total == 6);
}

TEST_CASE("geometry experiment small") {
    ExperimentConfig cfg;
    cfg.probes = 40;
    RunReport rep = run_experiment("geometry", cfg);
    CHECK(rep.aggregate_pass);
}

TEST_CASE("t32 experiment small") {
    ExperimentConfig cfg;
    cfg.generator = Generator::GaussianNormalized;
    cfg.instances = 2;
    cfg.probes = 24;
    cfg.k = 1;
    cfg.taus = {0.1};
    cfg.alphas = {1.0};
    RunReport rep = run_experiment("t32", cfg);
    CHECK(rep.aggregate_pass);
    CHECK(!rep.csv_rows.empty());
    // byte-identical reruns
    RunReport rep2 = run_experiment("t32", cfg);
    CHECK(rep.to_csv() == rep2.to_csv());
}

TEST_CASE("t45 and t53 experiments small") {
    ExperimentConfig cfg;
    cfg.m = 2;
    cfg.n = 3;
    cfg.q = 2;
    cfg.mkind = "identity";
    cfg.instances = 1;
    cfg.probes = 12;
    cfg.k = 1;
    cfg.taus = {0.1};
    RunReport rep = run_experiment("t45", cfg);
    CHECK(rep.aggregate_pass);

    ExperimentConfig lcfg = cfg;
    lcfg.taus.clear();
    lcfg.mus = {0.8};
    RunReport lrep = run_experiment("t53", lcfg);
    CHECK(lrep.aggregate_pass);
}

TEST_CASE("from-file generation round trips the instance") {
    Instance_roundtrip_check();
}

TEST_CASE("c34 experiment small") {
    ExperimentConfig cfg;
    cfg.generator = Generator::GaussianNormalized;
    cfg.instances = 1;
    cfg.probes = 16;
    cfg.k = 1;
    cfg.taus = {0.1};
    RunReport rep = run_experiment("c34", cfg);
    CHECK(rep.aggregate_pass);
}

TEST_CASE("unknown experiment id") {
    ExperimentConfig cfg;
    CHECK_THROWS_AS(run_experiment("bogus", cfg), BadDimensions);
}
