#include "relkep/config.hpp"

#include <fstream>
#include <stdexcept>

namespace relkep {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw std::invalid_argument("config field '" + field + "': " + what);
}

const json& member(const json& j, const std::string& field) {
    const auto it = j.find(field);
    if (it == j.end()) fail(field, "missing");
    return *it;
}

double as_number(const json& j, const std::string& field) {
    const json& v = member(j, field);
    if (!v.is_number()) fail(field, "expected a number");
    return v.get<double>();
}

int as_int(const json& j, const std::string& field) {
    const json& v = member(j, field);
    if (!v.is_number_integer()) fail(field, "expected an integer");
    return v.get<int>();
}

std::string as_string(const json& j, const std::string& field) {
    const json& v = member(j, field);
    if (!v.is_string()) fail(field, "expected a string");
    return v.get<std::string>();
}

}  // namespace

nlohmann::json perturbation_to_json(const PerturbationSpec& U) {
    json arr = json::array();
    for (const auto& t : U.terms) arr.push_back({{"c", t.c}, {"a", t.a}, {"b", t.b}});
    return arr;
}

PerturbationSpec perturbation_from_json(const nlohmann::json& j) {
    if (!j.is_array()) fail("perturbation", "expected an array of {c, a, b} objects");
    PerturbationSpec U;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& term = j[i];
        const std::string where = "perturbation[" + std::to_string(i) + "]";
        if (!term.is_object()) fail(where, "expected an object");
        PerturbationTerm t;
        t.c = as_number(term, "c");
        t.a = as_int(term, "a");
        t.b = as_int(term, "b");
        if (t.a < 0 || t.b < 0) fail(where, "exponents must be non-negative");
        U.terms.push_back(t);
    }
    return U;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    if (as_int(j, "schema") != 1) fail("schema", "unsupported version (expected 1)");

    ExperimentConfig cfg;
    const std::string family = as_string(j, "family");
    const json& sysj = member(j, "system");
    if (family == "levi-civita") {
        LeviCivitaSystem lc;
        lc.m = as_number(sysj, "m");
        lc.kappa = as_number(sysj, "kappa");
        lc.lambda = as_number(sysj, "lambda");
        lc.validate();
        cfg.system = lc;
    } else if (family == "relativistic") {
        RelativisticSystem rel;
        rel.m = as_number(sysj, "m");
        rel.alpha = as_number(sysj, "alpha");
        rel.c = as_number(sysj, "c");
        rel.validate();
        cfg.system = rel;
    } else {
        fail("family", "expected 'levi-civita' or 'relativistic'");
    }

    if (j.contains("perturbation")) cfg.perturbation = perturbation_from_json(j["perturbation"]);
    if (j.contains("H_star")) cfg.H_star = as_number(j, "H_star");
    if (j.contains("N")) {
        cfg.N = as_int(j, "N");
        if (*cfg.N < 0) fail("N", "must be >= 0");
    }
    if (j.contains("k")) {
        cfg.k = as_int(j, "k");
        if (*cfg.k < 1) fail("k", "must be >= 1");
    }
    if (j.contains("eps")) cfg.eps = as_number(j, "eps");
    if (j.contains("eps_max")) {
        cfg.eps_max = as_number(j, "eps_max");
        if (*cfg.eps_max < 0.0) fail("eps_max", "must be >= 0");
    }
    if (j.contains("steps")) {
        cfg.steps = as_int(j, "steps");
        if (cfg.steps < 1) fail("steps", "must be >= 1");
    }
    if (j.contains("n_seeds")) {
        cfg.n_seeds = as_int(j, "n_seeds");
        if (cfg.n_seeds < 1) fail("n_seeds", "must be >= 1");
    }
    if (j.contains("tol")) {
        cfg.tol = as_number(j, "tol");
        if (!(cfg.tol > 0.0)) fail("tol", "must be > 0");
    }
    if (j.contains("out_dir")) cfg.out_dir = as_string(j, "out_dir");
    if (j.contains("golden")) cfg.golden = as_string(j, "golden");
    if (j.contains("emit_trajectories")) {
        const json& v = j["emit_trajectories"];
        if (!v.is_boolean()) fail("emit_trajectories", "expected a boolean");
        cfg.emit_trajectories = v.get<bool>();
    }

    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (!g.is_object()) fail("grid", "expected an object");
        if (g.contains("n_H")) cfg.grid.n_H = as_int(g, "n_H");
        if (g.contains("n_L")) cfg.grid.n_L = as_int(g, "n_L");
        if (g.contains("H_min")) cfg.grid.H_min = as_number(g, "H_min");
        if (g.contains("H_max")) cfg.grid.H_max = as_number(g, "H_max");
        if (g.contains("margin")) cfg.grid.margin = as_number(g, "margin");
        if (cfg.grid.n_H < 1 || cfg.grid.n_L < 1) fail("grid", "n_H and n_L must be >= 1");
        if (!(cfg.grid.H_min <= cfg.grid.H_max)) fail("grid", "H_min must not exceed H_max");
        if (!(cfg.grid.margin > 0.0 && cfg.grid.margin < 0.5))
            fail("grid.margin", "must lie in (0, 0.5)");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config " + path + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace relkep
