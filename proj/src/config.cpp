#include "smclab/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "smclab/errors.hpp"

namespace smclab {

using nlohmann::json;

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"variance-step0", "conjecture1", "conjecture2", "variance-step1",
                                                   "clt", "compare-resamplers", "beta-table", "trajectory"};
    return names;
}

ExperimentConfig default_config(const std::string& experiment) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), experiment) == names.end())
        throw InvalidConfig("unknown experiment: " + experiment);
    ExperimentConfig c;
    c.experiment = experiment;
    if (experiment == "conjecture2") {
        c.replicates = 10000;
    } else if (experiment == "variance-step1") {
        c.level = 0.90;
    } else if (experiment == "clt") {
        c.particles = 10000;
        c.replicates = 10000;
    } else if (experiment == "trajectory") {
        c.particles = 100;
        c.step = 2;
    } else if (experiment == "compare-resamplers") {
        c.particles = 100;
        c.replicates = 10000;
    }
    return c;
}

namespace {

template <class T>
T get_as(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("config field '") + key + "': " + e.what());
    }
}

std::size_t get_count(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw InvalidConfig(std::string("config field '") + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw InvalidConfig(where + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw InvalidConfig("unknown field '" + key + "' in " + where);
}

ExpPoly parse_terms(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw InvalidConfig(where + " must be a non-empty array of terms");
    std::vector<ExpPoly::Term> terms;
    for (const auto& t : j) {
        reject_unknown(t, {"coef", "power", "rate"}, where + " term");
        ExpPoly::Term term{1.0, 0, 0.0};
        if (t.contains("coef")) term.coef = get_as<double>(t, "coef");
        if (t.contains("power")) {
            const int p = get_as<int>(t, "power");
            if (p < 0 || p > 16) throw InvalidConfig(where + " power must lie in [0, 16]");
            term.power = p;
        }
        if (t.contains("rate")) term.rate = get_as<double>(t, "rate");
        terms.push_back(term);
    }
    try {
        return ExpPoly(std::move(terms));
    } catch (const InvalidArgument& e) {
        throw InvalidConfig(where + ": " + e.what());
    }
}

json terms_json(const ExpPoly& p) {
    json a = json::array();
    for (const auto& t : p.terms()) a.push_back({{"coef", t.coef}, {"power", t.power}, {"rate", t.rate}});
    return a;
}

Model::ExpPolySpec parse_custom(const json& j) {
    reject_unknown(j, {"initial", "kernel", "potential", "test_function", "potential_bounds"}, "custom_model");
    Model::ExpPolySpec s;
    auto range = [&](const char* key, double& lo, double& hi) {
        if (!j.contains(key)) return;
        const auto& r = j.at(key);
        reject_unknown(r, {"lo", "hi"}, std::string("custom_model.") + key);
        if (r.contains("lo")) lo = get_as<double>(r, "lo");
        if (r.contains("hi")) hi = get_as<double>(r, "hi");
    };
    range("initial", s.init_lo, s.init_hi);
    range("kernel", s.step_lo, s.step_hi);
    if (!j.contains("potential")) throw InvalidConfig("custom_model needs a potential");
    if (!j.contains("test_function")) throw InvalidConfig("custom_model needs a test_function");
    s.potential = parse_terms(j.at("potential"), "custom_model.potential");
    s.test_function = parse_terms(j.at("test_function"), "custom_model.test_function");
    if (j.contains("potential_bounds")) {
        const auto& b = j.at("potential_bounds");
        if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) throw InvalidConfig("potential_bounds must be [lower, upper]");
        s.potential_bounds = std::make_pair(b[0].get<double>(), b[1].get<double>());
    }
    return s;
}

}  // namespace

ExperimentConfig apply_config(ExperimentConfig c, const json& j) {
    reject_unknown(j, {"schema", "experiment", "model", "custom_model", "seed", "particles", "replicates",
                       "replicates2", "step", "tuple", "workers", "level", "timing", "format", "out", "beta_table"},
                   "config");
    if (!j.contains("schema")) throw InvalidConfig("config needs \"schema\": 1");
    if (get_as<int>(j, "schema") != 1) throw InvalidConfig("unsupported config schema version");
    if (j.contains("experiment")) {
        const auto e = get_as<std::string>(j, "experiment");
        if (!c.experiment.empty() && e != c.experiment)
            throw InvalidConfig("config is for experiment '" + e + "', not '" + c.experiment + "'");
        c.experiment = e;
    }
    if (j.contains("model")) c.model = get_as<std::string>(j, "model");
    if (j.contains("custom_model")) c.custom_model = parse_custom(j.at("custom_model"));
    if (j.contains("seed")) {
        const auto& v = j.at("seed");
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) throw InvalidConfig("seed must be a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("particles")) c.particles = get_count(j, "particles");
    if (j.contains("replicates")) c.replicates = get_count(j, "replicates");
    if (j.contains("replicates2")) c.replicates2 = get_count(j, "replicates2");
    if (j.contains("step")) c.step = get_as<int>(j, "step");
    if (j.contains("tuple")) c.tuple = get_count(j, "tuple");
    if (j.contains("workers")) c.workers = get_count(j, "workers");
    if (j.contains("level")) c.level = get_as<double>(j, "level");
    if (j.contains("timing")) c.timing = get_as<bool>(j, "timing");
    if (j.contains("format")) c.format = get_as<std::string>(j, "format");
    if (j.contains("out")) c.out = get_as<std::string>(j, "out");
    if (j.contains("beta_table")) {
        const auto& b = j.at("beta_table");
        reject_unknown(b, {"function", "points", "y2", "y3"}, "beta_table");
        if (b.contains("function")) c.beta_table.function = get_as<std::string>(b, "function");
        if (b.contains("points")) c.beta_table.points = get_count(b, "points");
        if (b.contains("y2")) c.beta_table.y2 = get_as<double>(b, "y2");
        if (b.contains("y3")) c.beta_table.y3 = get_as<double>(b, "y3");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path, const std::string& experiment) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
    }
    return apply_config(default_config(experiment), j);
}

void validate(const ExperimentConfig& c) {
    default_config(c.experiment);
    if (c.model != "exp-uniform" && c.model != "custom") throw InvalidConfig("model must be \"exp-uniform\" or \"custom\"");
    if (c.model == "custom" && !c.custom_model) throw InvalidConfig("model \"custom\" needs a custom_model block");
    if (c.particles < 2) throw InvalidConfig("particles must be at least 2");
    if (c.replicates < 2) throw InvalidConfig("replicates must be at least 2");
    if (c.replicates2 < 2) throw InvalidConfig("replicates2 must be at least 2");
    if (c.workers < 1) throw InvalidConfig("workers must be at least 1");
    if (!(c.level > 0.0 && c.level < 1.0)) throw InvalidConfig("level must lie in (0,1)");
    if (c.format != "csv" && c.format != "json") throw InvalidConfig("format must be csv or json");
    if (c.experiment == "conjecture2") {
        if (c.step < 0) throw InvalidConfig("step must be non-negative");
        if (c.tuple < 1 || c.tuple + 1 > c.particles) throw InvalidConfig("tuple must lie in [1, particles-1]");
    }
    if (c.experiment == "clt" && c.replicates < 100) throw InvalidConfig("clt needs at least 100 replicates");
    if (c.experiment == "beta-table") {
        const auto& f = c.beta_table.function;
        if (f != "beta0" && f != "beta1" && f != "phi0" && f != "phik")
            throw InvalidConfig("beta_table.function must be beta0, beta1, phi0 or phik");
        if (c.beta_table.points < 2) throw InvalidConfig("beta_table.points must be at least 2");
    }
}

json to_json(const ExperimentConfig& c) {
    json j = {{"schema", c.schema},       {"experiment", c.experiment}, {"model", c.model},
              {"seed", c.seed},           {"particles", c.particles},   {"replicates", c.replicates},
              {"replicates2", c.replicates2}, {"step", c.step},         {"tuple", c.tuple},
              {"workers", c.workers},     {"level", c.level},           {"timing", c.timing},
              {"format", c.format}};
    if (c.out) j["out"] = *c.out;
    if (c.custom_model) {
        const auto& s = *c.custom_model;
        j["custom_model"] = {{"initial", {{"lo", s.init_lo}, {"hi", s.init_hi}}},
                             {"kernel", {{"lo", s.step_lo}, {"hi", s.step_hi}}},
                             {"potential", terms_json(s.potential)},
                             {"test_function", terms_json(s.test_function)}};
        if (s.potential_bounds)
            j["custom_model"]["potential_bounds"] = {s.potential_bounds->first, s.potential_bounds->second};
    }
    j["beta_table"] = {{"function", c.beta_table.function},
                       {"points", c.beta_table.points},
                       {"y2", c.beta_table.y2},
                       {"y3", c.beta_table.y3}};
    return j;
}

Model build_model(const ExperimentConfig& c) {
    if (c.model == "exp-uniform") return Model::exp_uniform();
    if (c.model == "custom") {
        if (!c.custom_model) throw InvalidConfig("model \"custom\" needs a custom_model block");
        return Model::custom(*c.custom_model);
    }
    throw InvalidConfig("unknown model: " + c.model);
}

}  // namespace smclab
