#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "smclab/config.hpp"
#include "smclab/errors.hpp"
#include "smclab/experiments.hpp"

namespace {

void emit(const std::string& text, const std::optional<std::string>& path) {
    if (!path) {
        std::cout << text;
        return;
    }
    std::ofstream out(*path, std::ios::binary);
    if (!out) throw smclab::IoError("cannot open output file: " + *path);
    out << text;
    if (!out) throw smclab::IoError("failed to write output file: " + *path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stratified resampling variance experiments"};
    app.require_subcommand(1, 1);

    std::string config_path, out_path, format;
    std::uint64_t seed = 0;
    std::size_t particles = 0, replicates = 0, replicates2 = 0, workers = 0, tuple = 0;
    int step = -1;
    bool no_timing = false;

    for (const auto& name : smclab::experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "JSON config (schema 1)");
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--particles", particles, "population size M");
        sub->add_option("--replicates", replicates, "number of independent replicates n1");
        sub->add_option("--replicates2", replicates2, "secondary sample count n2");
        sub->add_option("--workers", workers, "worker threads");
        sub->add_option("--step", step, "time step (conjecture2, trajectory)");
        sub->add_option("--tuple", tuple, "tuple length t (conjecture2)");
        sub->add_option("--out", out_path, "output path (default stdout)");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_flag("--no-timing", no_timing, "write 0 in wall_time_s");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        const std::string experiment = app.get_subcommands().front()->get_name();
        auto cfg = config_path.empty() ? smclab::default_config(experiment) : smclab::load_config(config_path, experiment);
        auto* sub = app.get_subcommands().front();
        if (sub->count("--seed")) cfg.seed = seed;
        if (sub->count("--particles")) cfg.particles = particles;
        if (sub->count("--replicates")) cfg.replicates = replicates;
        if (sub->count("--replicates2")) cfg.replicates2 = replicates2;
        if (sub->count("--workers")) cfg.workers = workers;
        if (sub->count("--step")) cfg.step = step;
        if (sub->count("--tuple")) cfg.tuple = tuple;
        if (sub->count("--out")) cfg.out = out_path;
        if (sub->count("--format")) cfg.format = format;
        if (no_timing) cfg.timing = false;
        smclab::validate(cfg);

        if (experiment == "beta-table" || experiment == "trajectory") {
            std::ostringstream text;
            if (experiment == "beta-table")
                smclab::write_beta_table(cfg, text);
            else
                smclab::write_trajectory(cfg, text);
            emit(text.str(), cfg.out);
            return 0;
        }

        const auto report = smclab::run_experiment(cfg);
        emit(cfg.format == "json" ? smclab::to_json_text(report) : smclab::to_csv(report), cfg.out);
        for (const auto& v : report.verdicts())
            std::cerr << (v.pass ? "PASS " : "FAIL ") << v.spec.label << " (delta " << v.delta << ", bound " << v.bound
                      << ")\n";
        return report.passed() ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "smclab: " << e.what() << '\n';
        return 1;
    }
}
