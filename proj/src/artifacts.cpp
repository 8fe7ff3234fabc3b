#include "irsmec/artifacts.hpp"

#include <cstdio>
#include <fstream>

#ifndef IRSMEC_BUILD_VERSION
#define IRSMEC_BUILD_VERSION "unknown"
#endif

namespace irsmec {

std::string build_version() { return IRSMEC_BUILD_VERSION; }

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string artifact_header(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds) {
    std::string s = "# version=" + build_version() + " config_hash=" + hex64(config_hash(cfg)) +
                    " seeds=";
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (i) s += "|";
        s += std::to_string(seeds[i]);
    }
    s += "\n";
    return s;
}

std::string metrics_csv_text(const std::vector<MetricsRow>& rows, const std::string& header) {
    std::string out = header;
    out += "policy,axis,value,mean_delay,std_delay,mean_reward,violations,episodes,seed\n";
    for (const auto& r : rows) {
        out += r.policy + "," + r.axis + "," + fmt(r.value) + "," + fmt(r.metrics.mean_delay) +
               "," + fmt(r.metrics.std_delay) + "," + fmt(r.metrics.mean_reward) + "," +
               std::to_string(r.metrics.violations) + "," + std::to_string(r.metrics.episodes) +
               "," + std::to_string(r.metrics.seed) + "\n";
    }
    return out;
}

std::string trace_csv_text(const std::vector<TraceRow>& rows, int n_users,
                           const std::string& header) {
    std::string out = header;
    out += "episode,t";
    for (int n = 0; n < n_users; ++n) out += ",delay_u" + std::to_string(n);
    out += ",reward,violations,order_index\n";
    for (const auto& r : rows) {
        out += std::to_string(r.episode) + "," + std::to_string(r.t);
        for (double d : r.delays) out += "," + fmt(d);
        out += "," + fmt(r.reward) + "," + std::to_string(r.violations) + "," +
               std::to_string(r.order_index) + "\n";
    }
    return out;
}

nlohmann::json run_manifest(const RunConfig& cfg, const std::string& mode,
                            const std::vector<std::uint64_t>& seeds,
                            const StateScales& scales) {
    nlohmann::json j;
    j["version"] = build_version();
    j["mode"] = mode;
    j["config_hash"] = hex64(config_hash(cfg));
    j["seeds"] = seeds;
    j["resolved_config"] = resolved_config_text(cfg);
    j["state_scales"] = {{"dir", scales.dir}, {"irs", scales.irs}, {"g", scales.g}};
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc | std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << text;
}

}  // namespace irsmec
