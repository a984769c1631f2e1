#include <cstdio>
#include <filesystem>
#include <fstream>

#include "config.hpp"
#include "doctest.h"

using namespace gaugep;
using gaugep::cli::RunConfig;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << text;
    return p.string();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("serialize(parse(file)) is idempotent") {
    const auto path = write_temp("gaugep_cfg_a.ini",
                                 "[scenario]\nname = rydberg_echo\n[run]\nseed = 17\ntrajectories=300\n"
                                 "[model]\nkappa = 2.5\n");
    const RunConfig a = RunConfig::load(path);
    CHECK(a.get("scenario.name") == "rydberg_echo");
    CHECK(a.integer("run.seed") == 17);
    CHECK(a.number("model.kappa") == 2.5);
    const auto s1 = a.serialize();
    const RunConfig b = RunConfig::load(write_temp("gaugep_cfg_b.ini", s1));
    CHECK(b.serialize() == s1);
    CHECK(b.hash() == a.hash());
    CHECK(a.hash().size() == 64);
}

TEST_CASE("overrides and errors") {
    RunConfig c;
    c.set("run.seed=5");
    CHECK(c.integer("run.seed") == 5);
    const auto h = c.hash();
    c.set("run.seed", "6");
    CHECK(c.hash() != h);
    CHECK_THROWS_AS(c.set("run.nope=1"), ConfigError);
    CHECK_THROWS_AS(c.set("garbage"), ConfigError);
    c.set("run.seed=abc");
    CHECK_THROWS_AS(c.integer("run.seed"), ConfigError);
    c.set("model.J=inf");
    CHECK_THROWS_AS(c.number("model.J"), ConfigError);
    CHECK_THROWS_AS(RunConfig::load("/nonexistent/cfg.ini"), ConfigError);
    CHECK_THROWS_AS(RunConfig::load(write_temp("gaugep_cfg_c.ini", "[model]\nbogus = 1\n")), ConfigError);
    c.set("model.snapshots=0.08,0.12");
    CHECK(c.numbers("model.snapshots") == std::vector<double>{0.08, 0.12});
}

TEST_CASE("defaults resolve to the quench with its approximate gauge") {
    RunConfig c;
    const auto r = cli::resolve(c);
    CHECK(r.scenario == "bose_hubbard_quench");
    CHECK(r.sc.model.sites() == 6);
    CHECK(r.method == Method::gaugeP);
    CHECK(r.gauge.diffusion == DiffusionGauge::global);
    CHECK(r.gauge.a == doctest::Approx(0.70).epsilon(0.015));
    CHECK(r.gauge.weighted());
    CHECK_FALSE(r.grid.empty());
    CHECK(r.grid.back() == doctest::Approx(r.t_fin));
}

TEST_CASE("method and scenario choices") {
    RunConfig c;
    c.set("method.method=positive_p");
    auto r = cli::resolve(c);
    CHECK_FALSE(r.gauge.weighted());
    CHECK(r.gauge.diffusion == DiffusionGauge::none);
    c.set("method.method=diffusion_only");
    r = cli::resolve(c);
    CHECK_FALSE(r.gauge.weighted());
    CHECK(r.gauge.a == doctest::Approx(a_opt_diffusion_only(gauge_integrals(r.sc.model, r.sc.n_analysis), 0.05)));
    c.set("method.method=gauge_p");
    c.set("method.a=0.25");
    CHECK(cli::resolve(c).gauge.a == 0.25);
    CHECK_THROWS_AS(cli::parse_method("exact"), ConfigError);

    RunConfig e;
    e.set("scenario.name=rydberg_echo");
    r = cli::resolve(e);
    CHECK(r.gauge.diffusion == DiffusionGauge::adaptive);
    CHECK(r.sc.model.components == 2);
    // snapshot times land on the grid
    bool found = false;
    for (double t : r.grid) found |= std::abs(t - 0.12) < 1e-9;
    CHECK(found);

    RunConfig u;
    u.set("scenario.name=custom");
    u.set("model.extents=4,4");
    u.set("model.lengths=4,4");
    u.set("model.J=1");
    CHECK(cli::build_scenario(u).model.sites() == 16);
    u.set("scenario.name=nonsense");
    CHECK_THROWS_AS(cli::build_scenario(u), ConfigError);
}

}
