#include "shiftfdr/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace shiftfdr {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

struct KeyedValue {
    std::string value;
    int line = 0;
};

using KeyMap = std::map<std::string, KeyedValue>;

[[noreturn]] void fail(int line, const std::string& message) {
    throw ConfigError("line " + std::to_string(line) + ": " + message);
}

double parse_double(const KeyedValue& kv, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(kv.value, &pos);
        if (pos != kv.value.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        fail(kv.line, "field " + key + ": expected a number, got '" + kv.value + "'");
    }
}

long long parse_int(const KeyedValue& kv, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(kv.value, &pos);
        if (pos != kv.value.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        fail(kv.line, "field " + key + ": expected an integer, got '" + kv.value + "'");
    }
}

bool parse_bool(const KeyedValue& kv, const std::string& key) {
    std::string v = kv.value;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "1" || v == "on")
        return true;
    if (v == "false" || v == "no" || v == "0" || v == "off")
        return false;
    fail(kv.line, "field " + key + ": expected a boolean, got '" + kv.value + "'");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

std::vector<double> parse_double_list(const KeyedValue& kv, const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split_list(kv.value))
        out.push_back(parse_double({item, kv.line}, key));
    if (out.empty())
        fail(kv.line, "field " + key + ": empty list");
    return out;
}

const char* const kKnownKeys[] = {
    "scenario",   "d",        "n",         "structure",     "rho",
    "density",    "fraction", "structure_seed", "regime",   "mu",
    "null_frac",  "k",        "procedures", "alpha",        "reps",
    "seed",       "variance", "nu",        "random_sign",   "resample_structure",
    "sbh2_fraction", "storey_lambda", "p2_chisq", "mirror_revbbh", "threads",
};

KeyMap parse_key_lines(const std::string& text) {
    KeyMap map;
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const std::size_t hash = raw.find_first_of("#;");
        std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty())
            continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                fail(line, "unterminated section header");
            continue; // sections organize the file; keys are global
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            fail(line, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty())
            fail(line, "empty key");
        const bool known = std::find_if(std::begin(kKnownKeys), std::end(kKnownKeys),
                                        [&](const char* k) { return key == k; }) !=
                           std::end(kKnownKeys);
        if (!known)
            fail(line, "unknown field '" + key + "'");
        if (map.count(key))
            fail(line, "duplicate field '" + key + "'");
        map[key] = {value, line};
    }
    return map;
}

void apply_scenario_defaults(ExperimentConfig& config, bool mu_set, bool nf_set, bool alpha_set,
                             bool variance_set, bool proc_set) {
    const bool knockoff = config.scenario == Scenario::Knockoff;
    if (!alpha_set)
        config.alphas = knockoff ? std::vector<double>{0.05, 0.1, 0.2}
                                 : std::vector<double>{0.05};
    if (config.regime == Regime::FixedNull) {
        if (!mu_set)
            config.mu = knockoff ? std::vector<double>{3.5}
                                 : std::vector<double>{1, 2, 3, 4, 5};
        if (!nf_set)
            config.null_frac = {knockoff ? 0.8 : 0.75};
    } else {
        if (!mu_set)
            config.mu = {2};
        if (!nf_set)
            config.null_frac = {0.5, 0.6, 0.7, 0.8, 0.9};
    }
    if (!variance_set)
        config.known_variance = config.scenario != Scenario::VarSel;
    if (!proc_set)
        config.procedures = knockoff ? knockoff_catalog_names() : mean_catalog_names();
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& force_scenario) {
    const std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        ExperimentConfig config = config_from_json(text);
        if (!force_scenario.empty() && scenario_name(config.scenario) != force_scenario)
            throw ConfigError("config scenario '" + scenario_name(config.scenario) +
                              "' does not match the '" + force_scenario + "' command");
        return config;
    }

    const KeyMap map = parse_key_lines(text);
    ExperimentConfig config;
    if (!force_scenario.empty())
        config.scenario = scenario_from_name(force_scenario);

    const auto get = [&](const std::string& key) -> const KeyedValue* {
        const auto it = map.find(key);
        return it == map.end() ? nullptr : &it->second;
    };

    if (const auto* kv = get("scenario")) {
        try {
            const Scenario s = scenario_from_name(kv->value);
            if (!force_scenario.empty() && scenario_name(s) != force_scenario)
                fail(kv->line, "config scenario '" + kv->value + "' does not match the '" +
                                   force_scenario + "' command");
            config.scenario = s;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            fail(kv->line, e.what());
        }
    }
    if (const auto* kv = get("d"))
        config.d = static_cast<int>(parse_int(*kv, "d"));
    if (const auto* kv = get("n"))
        config.n = static_cast<int>(parse_int(*kv, "n"));

    const auto* structure_kv = get("structure");
    if (!structure_kv)
        throw ConfigError("missing required field 'structure'");
    try {
        config.structure.kind = StructureSpec::kind_from_name(structure_kv->value);
    } catch (const std::exception& e) {
        fail(structure_kv->line, e.what());
    }
    config.structure.d = config.d;
    if (config.structure.kind == StructureSpec::Kind::BlockDiagonal)
        config.structure.rho = 0.5;
    if (const auto* kv = get("rho"))
        config.structure.rho = parse_double(*kv, "rho");
    if (const auto* kv = get("density"))
        config.structure.density = parse_double(*kv, "density");
    if (const auto* kv = get("fraction"))
        config.structure.fraction = parse_double(*kv, "fraction");
    if (const auto* kv = get("structure_seed"))
        config.structure.seed = static_cast<std::uint64_t>(parse_int(*kv, "structure_seed"));

    if (const auto* kv = get("regime")) {
        try {
            config.regime = regime_from_name(kv->value);
        } catch (const std::exception& e) {
            fail(kv->line, e.what());
        }
    }

    const auto* mu_kv = get("mu");
    if (mu_kv)
        config.mu = parse_double_list(*mu_kv, "mu");
    const auto* nf_kv = get("null_frac");
    if (nf_kv)
        config.null_frac = parse_double_list(*nf_kv, "null_frac");
    const auto* alpha_kv = get("alpha");
    if (alpha_kv)
        config.alphas = parse_double_list(*alpha_kv, "alpha");
    const auto* proc_kv = get("procedures");
    if (proc_kv)
        config.procedures = split_list(proc_kv->value);
    const auto* variance_kv = get("variance");
    if (variance_kv) {
        if (variance_kv->value == "known")
            config.known_variance = true;
        else if (variance_kv->value == "estimated")
            config.known_variance = false;
        else
            fail(variance_kv->line, "field variance: expected 'known' or 'estimated'");
    }

    if (const auto* kv = get("k"))
        config.k = static_cast<int>(parse_int(*kv, "k"));
    if (const auto* kv = get("reps"))
        config.replications = static_cast<int>(parse_int(*kv, "reps"));
    if (const auto* kv = get("seed"))
        config.master_seed = static_cast<std::uint64_t>(parse_int(*kv, "seed"));
    if (const auto* kv = get("nu"))
        config.nu = static_cast<int>(parse_int(*kv, "nu"));
    if (const auto* kv = get("random_sign"))
        config.random_sign = parse_bool(*kv, "random_sign");
    if (const auto* kv = get("resample_structure"))
        config.resample_structure = parse_bool(*kv, "resample_structure");
    if (const auto* kv = get("sbh2_fraction"))
        config.sbh2_fraction = parse_double(*kv, "sbh2_fraction");
    if (const auto* kv = get("storey_lambda"))
        config.storey_lambda = parse_double(*kv, "storey_lambda");
    if (const auto* kv = get("p2_chisq"))
        config.p2_chisq_as_written = parse_bool(*kv, "p2_chisq");
    if (const auto* kv = get("mirror_revbbh"))
        config.mirror_rev_bbh = parse_bool(*kv, "mirror_revbbh");
    if (const auto* kv = get("threads"))
        config.threads = static_cast<int>(parse_int(*kv, "threads"));

    apply_scenario_defaults(config, mu_kv != nullptr, nf_kv != nullptr, alpha_kv != nullptr,
                            variance_kv != nullptr, proc_kv != nullptr);
    return config;
}

ExperimentConfig load_config_file(const std::string& path, const std::string& force_scenario) {
    return parse_config_text(read_text_file(path), force_scenario);
}

std::string resolved_config_json(const ExperimentConfig& config) {
    nlohmann::json j;
    j["scenario"] = scenario_name(config.scenario);
    j["d"] = config.d;
    j["n"] = config.n;
    j["structure"] = {{"kind", config.structure.name()},
                      {"rho", config.structure.rho},
                      {"density", config.structure.density},
                      {"fraction", config.structure.fraction},
                      {"seed", config.structure.seed}};
    j["regime"] = regime_name(config.regime);
    j["mu"] = config.mu;
    j["null_frac"] = config.null_frac;
    j["k"] = config.k;
    j["procedures"] = config.procedures;
    j["alpha"] = config.alphas;
    j["reps"] = config.replications;
    j["seed"] = config.master_seed;
    j["variance"] = config.known_variance ? "known" : "estimated";
    j["nu"] = config.nu;
    j["random_sign"] = config.random_sign;
    j["resample_structure"] = config.resample_structure;
    j["sbh2_fraction"] = config.sbh2_fraction;
    j["storey_lambda"] = config.storey_lambda;
    j["p2_chisq"] = config.p2_chisq_as_written;
    j["mirror_revbbh"] = config.mirror_rev_bbh;
    j["threads"] = config.threads;
    return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid JSON config: ") + e.what());
    }
    try {
        ExperimentConfig config;
        config.scenario = scenario_from_name(j.at("scenario").get<std::string>());
        config.d = j.at("d").get<int>();
        config.n = j.at("n").get<int>();
        const auto& s = j.at("structure");
        config.structure.kind = StructureSpec::kind_from_name(s.at("kind").get<std::string>());
        config.structure.d = config.d;
        config.structure.rho = s.at("rho").get<double>();
        config.structure.density = s.at("density").get<double>();
        config.structure.fraction = s.at("fraction").get<double>();
        config.structure.seed = s.at("seed").get<std::uint64_t>();
        config.regime = regime_from_name(j.at("regime").get<std::string>());
        config.mu = j.at("mu").get<std::vector<double>>();
        config.null_frac = j.at("null_frac").get<std::vector<double>>();
        config.k = j.at("k").get<int>();
        config.procedures = j.at("procedures").get<std::vector<std::string>>();
        config.alphas = j.at("alpha").get<std::vector<double>>();
        config.replications = j.at("reps").get<int>();
        config.master_seed = j.at("seed").get<std::uint64_t>();
        config.known_variance = j.at("variance").get<std::string>() == "known";
        config.nu = j.at("nu").get<int>();
        config.random_sign = j.at("random_sign").get<bool>();
        config.resample_structure = j.at("resample_structure").get<bool>();
        config.sbh2_fraction = j.at("sbh2_fraction").get<double>();
        config.storey_lambda = j.at("storey_lambda").get<double>();
        config.p2_chisq_as_written = j.at("p2_chisq").get<bool>();
        config.mirror_rev_bbh = j.at("mirror_revbbh").get<bool>();
        config.threads = j.at("threads").get<int>();
        return config;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid JSON config: ") + e.what());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write file: " + path);
    out << content;
}

} // namespace shiftfdr
