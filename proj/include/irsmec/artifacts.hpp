#ifndef IRSMEC_ARTIFACTS_HPP
#define IRSMEC_ARTIFACTS_HPP

#include <json.hpp>
#include <string>
#include <vector>

#include "irsmec/baselines.hpp"
#include "irsmec/config.hpp"

namespace irsmec {

std::string build_version();

/// "# version=... config_hash=... seeds=..." comment lines embedded at the
/// top of every CSV artifact.
std::string artifact_header(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds);

/// Metrics table: one row per (policy, sweep value, seed).
struct MetricsRow {
    std::string policy;
    std::string axis;  // "-" when not sweeping
    double value = 0.0;
    PolicyMetrics metrics;
};

std::string metrics_csv_text(const std::vector<MetricsRow>& rows, const std::string& header);
std::string trace_csv_text(const std::vector<TraceRow>& rows, int n_users,
                           const std::string& header);

nlohmann::json run_manifest(const RunConfig& cfg, const std::string& mode,
                            const std::vector<std::uint64_t>& seeds,
                            const StateScales& scales);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace irsmec

#endif
