#include "nakasim/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace nakasim {

using nlohmann::json;

namespace {

template <class T>
void read(const json& j, const std::string& path, const char* key, T& out)
{
    if (!j.contains(key))
        return;
    const json& v = j.at(key);
    std::string field = path.empty() ? key : path + "." + key;
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean())
                throw ConfigError(field, "expected a boolean");
        } else if constexpr (std::is_arithmetic_v<T>) {
            if (!v.is_number())
                throw ConfigError(field, "expected a number");
            if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer())
                    throw ConfigError(field, "expected an integer");
                if constexpr (std::is_unsigned_v<T>)
                    if (v.get<std::int64_t>() < 0)
                        throw ConfigError(field, "must be non-negative");
            }
        } else {
            if (!v.is_string())
                throw ConfigError(field, "expected a string");
        }
        out = v.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(field, e.what());
    }
}

const json& object(const json& j, const std::string& field)
{
    if (!j.is_object())
        throw ConfigError(field.empty() ? "<root>" : field, "expected an object");
    return j;
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed)
{
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            ok = ok || it.key() == a;
        if (!ok)
            throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
    }
}

}  // namespace

ScenarioFile parse_scenario(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    object(root, "");
    check_keys(root, "", {"params", "rates", "attack", "policy", "protocol", "sapos", "k_cp", "txgen", "warmup",
                          "record_trace", "record_deliveries", "queue_cap", "cache_cap", "repeat", "seed_stride",
                          "output"});
    ScenarioFile f;
    ScenarioConfig& c = f.cfg;
    SimParams& p = c.params;
    bool have_nu = false;
    if (root.contains("params")) {
        const json& j = object(root.at("params"), "params");
        check_keys(j, "params", {"n_nodes", "beta", "rho", "tau", "delta_h", "capacity", "nu", "c_tilde",
                                 "horizon_slots", "seed"});
        read(j, "params", "n_nodes", p.n_nodes);
        read(j, "params", "beta", p.beta);
        read(j, "params", "rho", p.rho);
        read(j, "params", "tau", p.tau);
        read(j, "params", "delta_h", p.delta_h);
        read(j, "params", "capacity", p.capacity);
        read(j, "params", "nu", p.nu);
        read(j, "params", "c_tilde", p.c_tilde);
        read(j, "params", "horizon_slots", p.horizon_slots);
        read(j, "params", "seed", p.seed);
        have_nu = j.contains("nu");
    }
    if (root.contains("rates")) {
        const json& j = object(root.at("rates"), "rates");
        check_keys(j, "rates", {"lambda_hon", "lambda_adv"});
        double lh = 1.0, la = 0.0;
        read(j, "rates", "lambda_hon", lh);
        read(j, "rates", "lambda_adv", la);
        if (!(lh > 0.0))
            throw ConfigError("rates.lambda_hon", "must be positive");
        if (la < 0.0)
            throw ConfigError("rates.lambda_adv", "must be non-negative");
        p.rho = (lh + la) * p.tau;
        p.beta = la / (lh + la);
    }
    // both nu and c_tilde given: validate() checks the link
    if (!(have_nu && p.c_tilde > 0.0)) {
        if (have_nu)
            p.c_tilde = 0.0;
        p.link_analysis_params();
    }
    if (root.contains("attack")) {
        const json& j = object(root.at("attack"), "attack");
        check_keys(j, "attack", {"strategy", "spv_rate", "partition_duration", "run_after"});
        std::string s = "None";
        read(j, "attack", "strategy", s);
        c.attack.strategy = parse_attack(s);
        read(j, "attack", "spv_rate", c.attack.spv_rate);
        read(j, "attack", "partition_duration", c.attack.partition_duration);
        read(j, "attack", "run_after", c.attack.run_after);
    }
    if (root.contains("policy")) {
        std::string s;
        read(root, "", "policy", s);
        try {
            c.policy = SchedulingPolicy::parse(s);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("policy", e.what());
        }
    }
    if (root.contains("protocol")) {
        std::string s;
        read(root, "", "protocol", s);
        c.protocol = parse_protocol(s);
    }
    read(root, "", "k_cp", c.k_cp);
    c.sapos = SaPoSParams::from_kcp(c.k_cp);
    if (root.contains("sapos")) {
        const json& j = object(root.at("sapos"), "sapos");
        check_keys(j, "sapos", {"K_cp", "k_conf", "k_epf"});
        read(j, "sapos", "K_cp", c.sapos.K_cp);
        SaPoSParams d = SaPoSParams::from_kcp(c.sapos.K_cp);
        c.sapos.k_conf = d.k_conf;
        c.sapos.k_epf = d.k_epf;
        read(j, "sapos", "k_conf", c.sapos.k_conf);
        read(j, "sapos", "k_epf", c.sapos.k_epf);
    }
    if (root.contains("txgen")) {
        const json& j = object(root.at("txgen"), "txgen");
        check_keys(j, "txgen", {"rate", "tx_size", "t_tput"});
        read(j, "txgen", "rate", c.txgen.rate);
        read(j, "txgen", "tx_size", c.txgen.tx_size);
        read(j, "txgen", "t_tput", c.txgen.t_tput);
    }
    read(root, "", "warmup", c.warmup);
    read(root, "", "record_trace", c.record_trace);
    read(root, "", "record_deliveries", c.record_deliveries);
    read(root, "", "queue_cap", c.queue_cap);
    read(root, "", "cache_cap", c.cache_cap);
    read(root, "", "repeat", c.repeat);
    read(root, "", "seed_stride", c.seed_stride);
    if (c.repeat <= 0)
        throw ConfigError("repeat", "must be positive");
    if (root.contains("output")) {
        const json& j = object(root.at("output"), "output");
        check_keys(j, "output", {"dir"});
        read(j, "output", "dir", f.out_dir);
    }
    c.validate();
    return f;
}

ScenarioFile load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("--config", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string scenario_to_json(const ScenarioConfig& c)
{
    const SimParams& p = c.params;
    json j;
    j["params"] = {{"n_nodes", p.n_nodes},   {"beta", p.beta},         {"rho", p.rho},
                   {"tau", p.tau},           {"delta_h", p.delta_h},   {"capacity", p.capacity},
                   {"nu", p.nu},             {"c_tilde", p.c_tilde},   {"horizon_slots", p.horizon_slots},
                   {"seed", p.seed}};
    j["attack"] = {{"strategy", attack_name(c.attack.strategy)},
                   {"spv_rate", c.attack.spv_rate},
                   {"partition_duration", c.attack.partition_duration},
                   {"run_after", c.attack.run_after}};
    j["policy"] = c.policy.name();
    j["protocol"] = protocol_name(c.protocol);
    j["k_cp"] = c.k_cp;
    j["sapos"] = {{"K_cp", c.sapos.K_cp}, {"k_conf", c.sapos.k_conf}, {"k_epf", c.sapos.k_epf}};
    j["txgen"] = {{"rate", c.txgen.rate}, {"tx_size", c.txgen.tx_size}, {"t_tput", c.txgen.t_tput}};
    j["warmup"] = c.warmup;
    j["record_trace"] = c.record_trace;
    j["record_deliveries"] = c.record_deliveries;
    j["queue_cap"] = c.queue_cap;
    j["cache_cap"] = c.cache_cap;
    j["repeat"] = c.repeat;
    j["seed_stride"] = c.seed_stride;
    return j.dump(2);
}

}  // namespace nakasim
