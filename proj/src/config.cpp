#include "irsmec/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace irsmec {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

AccessScheme parse_scheme(const std::string& s) {
    if (s == "proposed") return AccessScheme::Proposed;
    if (s == "sic_rsma") return AccessScheme::SicRsma;
    if (s == "noma") return AccessScheme::Noma;
    throw std::invalid_argument("unknown access_scheme '" + s + "'");
}

std::string scheme_name(AccessScheme s) {
    switch (s) {
        case AccessScheme::Proposed: return "proposed";
        case AccessScheme::SicRsma: return "sic_rsma";
        case AccessScheme::Noma: return "noma";
    }
    return "proposed";
}

RhoPolicy parse_rho(const std::string& s) {
    if (s == "proportional") return RhoPolicy::Proportional;
    if (s == "equal") return RhoPolicy::Equal;
    throw std::invalid_argument("unknown rho_policy '" + s + "'");
}

// One entry per config key: setter from string and getter to canonical text.
struct KeySpec {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

double to_double(const std::string& v) {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("not a number: '" + v + "'");
    return d;
}

int to_int(const std::string& v) {
    std::size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("not an integer: '" + v + "'");
    return static_cast<int>(d);
}

std::uint64_t to_u64(const std::string& v) {
    std::size_t pos = 0;
    unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("not an integer: '" + v + "'");
    return d;
}

bool to_bool(const std::string& v) {
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw std::invalid_argument("not a boolean (0/1): '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string join_list(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += v[i];
    }
    return out;
}

#define NUM_KEY(name, field) \
    {name, KeySpec{[](RunConfig& c, const std::string& v) { c.field = to_double(v); }, \
                   [](const RunConfig& c) { return fmt_double(c.field); }}}
#define INT_KEY(name, field) \
    {name, KeySpec{[](RunConfig& c, const std::string& v) { c.field = to_int(v); }, \
                   [](const RunConfig& c) { return std::to_string(c.field); }}}
#define BOOL_KEY(name, field) \
    {name, KeySpec{[](RunConfig& c, const std::string& v) { c.field = to_bool(v); }, \
                   [](const RunConfig& c) { return c.field ? "1" : "0"; }}}

const std::map<std::string, KeySpec>& key_table() {
    static const std::map<std::string, KeySpec> table = {
        INT_KEY("m_antennas", sys.m_antennas),
        INT_KEY("n_users", sys.n_users),
        INT_KEY("k_irs", sys.k_irs),
        INT_KEY("slots", sys.slots),
        NUM_KEY("slot_duration", sys.slot_duration),
        NUM_KEY("bandwidth", sys.bandwidth),
        NUM_KEY("noise_power", sys.noise_power),
        NUM_KEY("p_max", sys.p_max),
        NUM_KEY("carrier_freq", sys.carrier_freq),
        NUM_KEY("rician_kappa", sys.rician_kappa),
        NUM_KEY("loss_los_db", sys.loss_los_db),
        NUM_KEY("loss_nlos_db", sys.loss_nlos_db),
        NUM_KEY("antenna_sep", sys.antenna_sep),
        NUM_KEY("bs_x", sys.bs_pos[0]),
        NUM_KEY("bs_y", sys.bs_pos[1]),
        NUM_KEY("irs_x", sys.irs_pos[0]),
        NUM_KEY("irs_y", sys.irs_pos[1]),
        NUM_KEY("ring_cx", sys.gu_ring_center[0]),
        NUM_KEY("ring_cy", sys.gu_ring_center[1]),
        NUM_KEY("ring_r_min", sys.gu_ring_radii[0]),
        NUM_KEY("ring_r_max", sys.gu_ring_radii[1]),
        NUM_KEY("task_bits_min", sys.task_bits_range[0]),
        NUM_KEY("task_bits_max", sys.task_bits_range[1]),
        NUM_KEY("f_gu", sys.f_gu),
        NUM_KEY("f_mec", sys.f_mec),
        NUM_KEY("c_gu", sys.c_gu),
        NUM_KEY("c_mec", sys.c_mec),
        {"seed", KeySpec{[](RunConfig& c, const std::string& v) { c.sys.rng_seed = to_u64(v); },
                         [](const RunConfig& c) { return std::to_string(c.sys.rng_seed); }}},
        {"access_scheme",
         KeySpec{[](RunConfig& c, const std::string& v) { c.env.scheme = parse_scheme(v); },
                 [](const RunConfig& c) { return scheme_name(c.env.scheme); }}},
        {"rho_policy",
         KeySpec{[](RunConfig& c, const std::string& v) { c.env.rho_policy = parse_rho(v); },
                 [](const RunConfig& c) {
                     return c.env.rho_policy == RhoPolicy::Proportional ? "proportional" : "equal";
                 }}},
        NUM_KEY("lambda_penalty", env.lambda_penalty),
        BOOL_KEY("include_power_action", env.include_power_action),
        BOOL_KEY("mask_direct", env.mask_direct),
        BOOL_KEY("mask_irs", env.mask_irs),
        INT_KEY("state_scale_samples", env.state_scale_samples),
        INT_KEY("feature_dim", net.feature_dim),
        INT_KEY("h1", net.h1),
        INT_KEY("h2", net.h2),
        INT_KEY("episodes", agent.episodes),
        {"buffer_capacity",
         KeySpec{[](RunConfig& c, const std::string& v) { c.agent.buffer_capacity = to_u64(v); },
                 [](const RunConfig& c) { return std::to_string(c.agent.buffer_capacity); }}},
        INT_KEY("batch_size", agent.batch_size),
        NUM_KEY("lr", agent.lr),
        NUM_KEY("gamma_disc", agent.gamma_disc),
        NUM_KEY("tau_soft", agent.tau_soft),
        INT_KEY("policy_delay", agent.policy_delay),
        NUM_KEY("sigma_explore_start", agent.sigma_explore_start),
        NUM_KEY("sigma_explore_end", agent.sigma_explore_end),
        NUM_KEY("sigma_target", agent.sigma_target),
        NUM_KEY("noise_clip", agent.noise_clip),
        NUM_KEY("eps_start", agent.eps_start),
        NUM_KEY("eps_end", agent.eps_end),
        NUM_KEY("eps_decay_frac", agent.eps_decay_frac),
        BOOL_KEY("dqn_enabled", agent.dqn_enabled),
        {"order_source",
         KeySpec{[](RunConfig& c, const std::string& v) { c.agent.order_source = v; },
                 [](const RunConfig& c) { return c.agent.order_source; }}},
        INT_KEY("checkpoint_every", agent.checkpoint_every),
        INT_KEY("eval_episodes", eval.episodes),
        {"policies",
         KeySpec{[](RunConfig& c, const std::string& v) { c.eval.policies = split_list(v); },
                 [](const RunConfig& c) { return join_list(c.eval.policies); }}},
        {"sic_order_rule",
         KeySpec{[](RunConfig& c, const std::string& v) { c.eval.sic_order_rule = v; },
                 [](const RunConfig& c) { return c.eval.sic_order_rule; }}},
        BOOL_KEY("emit_trace", eval.emit_trace),
    };
    return table;
}

#undef NUM_KEY
#undef INT_KEY
#undef BOOL_KEY

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

double SystemConfig::antenna_sep_m() const {
    if (antenna_sep > 0.0) return antenna_sep;
    return 0.5 * kSpeedOfLight / carrier_freq;
}

void SystemConfig::validate() const {
    auto req = [](bool cond, const char* msg) {
        if (!cond) throw std::invalid_argument(std::string("config: ") + msg);
    };
    req(m_antennas >= 1 && n_users >= 1 && k_irs >= 1 && slots >= 1,
        "M, N, K, T must all be >= 1");
    req(slot_duration > 0 && bandwidth > 0 && noise_power > 0 && p_max > 0 &&
            carrier_freq > 0 && f_gu > 0 && f_mec > 0 && c_gu > 0 && c_mec > 0,
        "rates, powers and frequencies must be strictly positive");
    req(rician_kappa >= 0, "rician_kappa must be >= 0");
    req(gu_ring_radii[0] <= gu_ring_radii[1], "ring_r_min must be <= ring_r_max");
    req(gu_ring_radii[0] >= 0, "ring radii must be non-negative");
    req(task_bits_range[0] <= task_bits_range[1], "task_bits_min must be <= task_bits_max");
    req(task_bits_range[0] > 0, "task sizes must be positive");
    req(n_users <= 7, "decoding-order enumeration requires N <= 7");
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto it = key_table().find(key);
    if (it == key_table().end())
        throw std::runtime_error("unknown config key '" + key + "'");
    it->second.set(cfg, value);
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key=value, got '" + s + "'");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        try {
            apply_override(cfg, key, value);
        } catch (const std::exception& e) {
            throw std::runtime_error("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

std::string resolved_config_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& [key, spec] : key_table()) {
        out += key;
        out += "=";
        out += spec.get(cfg);
        out += "\n";
    }
    return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
    // FNV-1a over the canonical text.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : resolved_config_text(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace irsmec
