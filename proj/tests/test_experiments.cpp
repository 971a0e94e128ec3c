#include <doctest.h>

#include <sstream>

#include "smclab/config.hpp"
#include "smclab/errors.hpp"
#include "smclab/experiments.hpp"

using namespace smclab;
using nlohmann::json;

namespace {

ExperimentConfig small(const std::string& name) {
    auto c = default_config(name);
    c.particles = name == "compare-resamplers" ? 40 : 200;
    c.replicates = 300;
    c.replicates2 = 300;
    c.timing = false;
    return c;
}

}  // namespace

TEST_CASE("config parsing") {
    const json j = {{"schema", 1}, {"particles", 123}, {"seed", 7}, {"workers", 2}, {"timing", false}};
    const auto c = apply_config(default_config("variance-step0"), j);
    CHECK(c.particles == 123);
    CHECK(c.seed == 7);
    CHECK(c.workers == 2);
    CHECK_FALSE(c.timing);
    CHECK(c.replicates == 100000);

    CHECK_THROWS_AS(apply_config(default_config("clt"), json{{"particles", 5}}), InvalidConfig);
    CHECK_THROWS_AS(apply_config(default_config("clt"), json{{"schema", 2}}), InvalidConfig);
    CHECK_THROWS_AS(apply_config(default_config("clt"), json{{"schema", 1}, {"bogus", 1}}), InvalidConfig);
    CHECK_THROWS_AS(apply_config(default_config("clt"), json{{"schema", 1}, {"particles", -3}}), InvalidConfig);
    CHECK_THROWS_AS(apply_config(default_config("clt"), json{{"schema", 1}, {"experiment", "conjecture1"}}), InvalidConfig);
    CHECK_THROWS_AS(default_config("nope"), InvalidConfig);
    CHECK(default_config("variance-step1").level == 0.90);
}

TEST_CASE("custom model configs") {
    const json j = {{"schema", 1},
                    {"model", "custom"},
                    {"custom_model",
                     {{"initial", {{"lo", 0.0}, {"hi", 1.0}}},
                      {"kernel", {{"lo", 0.0}, {"hi", 1.0}}},
                      {"potential", json::array({{{"coef", 1.0}, {"rate", 1.0}}})},
                      {"test_function", json::array({{{"coef", 1.0}, {"rate", 1.0}}})}}}};
    const auto c = apply_config(default_config("variance-step0"), j);
    const auto m = build_model(c);
    CHECK(m.name() == "custom");
    const auto back = apply_config(default_config("variance-step0"), to_json(c));
    CHECK(back.custom_model->potential.terms().size() == 1);

    json bad = j;
    bad["custom_model"]["potential"][0]["shape"] = 2;
    CHECK_THROWS_AS(apply_config(default_config("variance-step0"), bad), InvalidConfig);
    auto missing = default_config("variance-step0");
    missing.model = "custom";
    CHECK_THROWS_AS(validate(missing), InvalidConfig);
}

TEST_CASE("CSV round trip and derivable verdicts") {
    for (const char* name : {"variance-step0", "conjecture1", "conjecture2", "variance-step1", "clt", "compare-resamplers"}) {
        CAPTURE(name);
        auto cfg = small(name);
        if (std::string(name) == "clt") cfg.replicates = 200;
        const auto rep = run_experiment(cfg);
        const auto csv = to_csv(rep);
        CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
        const auto parsed = parse_csv(csv);
        CHECK(parsed.rows == rep.rows);
        CHECK(parsed.experiment == rep.experiment);
        const auto va = rep.verdicts(), vb = parsed.verdicts();
        REQUIRE(va.size() == vb.size());
        REQUIRE_FALSE(va.empty());
        for (std::size_t i = 0; i < va.size(); ++i) CHECK(va[i].pass == vb[i].pass);
        for (const auto& r : rep.rows) {
            CHECK(r.ci_lo <= r.estimate);
            CHECK(r.estimate <= r.ci_hi);
            CHECK(r.wall_time_s == 0.0);
        }
        const auto js = json::parse(to_json_text(rep));
        CHECK(js["rows"].size() == rep.rows.size());
        CHECK(js["passed"].get<bool>() == rep.passed());
    }
}

TEST_CASE("results do not depend on the worker count") {
    for (const char* name : {"variance-step0", "conjecture2", "compare-resamplers"}) {
        auto cfg = small(name);
        cfg.workers = 1;
        const auto one = to_csv(run_experiment(cfg));
        cfg.workers = 3;
        CHECK(to_csv(run_experiment(cfg)) == one);
    }
}

TEST_CASE("compare-resamplers ordering") {
    auto cfg = small("compare-resamplers");
    cfg.replicates = 4000;
    const auto rep = run_experiment(cfg);
    CHECK(rep.row("exact_stratified").estimate <= rep.row("exact_multinomial").estimate);
    CHECK(rep.passed());
}

TEST_CASE("beta table layouts") {
    auto cfg = default_config("beta-table");
    cfg.beta_table.points = 3;
    for (auto [fn, header, rows] : {std::tuple{"beta0", "x,y1,value", 9}, std::tuple{"beta1", "x,y1,y2,y3,value", 9},
                                    std::tuple{"phi0", "y1,value", 3}, std::tuple{"phik", "y1,y2,y3,value", 9}}) {
        cfg.beta_table.function = fn;
        std::ostringstream out;
        write_beta_table(cfg, out);
        std::istringstream in(out.str());
        std::string line;
        std::getline(in, line);
        CHECK(line == header);
        int n = 0;
        while (std::getline(in, line)) ++n;
        CHECK(n == rows);
    }
    cfg.beta_table.function = "gamma";
    std::ostringstream out;
    CHECK_THROWS_AS(write_beta_table(cfg, out), InvalidConfig);
}

TEST_CASE("malformed CSV is rejected") {
    CHECK_THROWS_AS(parse_csv("a,b\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_csv(std::string(kCsvHeader) + "\nx,y,1,2\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_csv(std::string(kCsvHeader) + "\nx,y,one,0,0,1,1,1,0\n"), InvalidArgument);
}
