#ifndef IRSMEC_BASELINES_HPP
#define IRSMEC_BASELINES_HPP

#include "irsmec/agents.hpp"

namespace irsmec {

enum class OrderPolicy { Learned, Reverse, Sequential, Fixed, Random, Exhaustive };
enum class PhasePolicy { Learned, Random, Fixed, OnlyIrs, Direct };
enum class OffloadPolicy { Learned, FullLocal, FullOffload };
enum class ContPolicy { Learned, MatchedFilter, Random, Fixed };

/// A fixed strategy over the shared environment: every component of the
/// action is either taken from the trained learner or substituted by a
/// reference rule.
struct PolicySpec {
    std::string name = "cdeh";
    OrderPolicy order = OrderPolicy::Learned;
    PhasePolicy phase = PhasePolicy::Learned;
    OffloadPolicy offload = OffloadPolicy::Learned;
    ContPolicy cont = ContPolicy::Learned;
    AccessScheme scheme = AccessScheme::Proposed;

    /// The offload field never consults the learner by itself: "learned"
    /// there means no override of whatever the continuous source produced.
    bool needs_learner() const {
        return order == OrderPolicy::Learned || phase == PhasePolicy::Learned ||
               cont == ContPolicy::Learned;
    }
};

/// Maps a benchmark name (cdeh, reverse, sequential, fixed_order,
/// random_order, exhaustive, random_phase, fixed_phase, only_irs, direct,
/// full_local, full_offload, sic_rsma, noma) onto its spec. Components not
/// pinned by the name stay learned when a learner is available, else fall
/// back to the matched-filter heuristic with a sequential order.
PolicySpec policy_from_name(const std::string& name, bool has_learner);

struct PolicyMetrics {
    std::string policy;
    double mean_delay = 0.0;  // objective: per-episode slot-average delay
    double std_delay = 0.0;   // sample std over episodes
    double mean_reward = 0.0;
    long violations = 0;
    int episodes = 0;
    std::uint64_t seed = 0;
    std::vector<double> per_episode_delay;
    std::vector<double> per_episode_reward;
};

struct TraceRow {
    int episode = 0;
    int t = 0;
    std::vector<double> delays;
    double reward = 0.0;
    int violations = 0;
    long order_index = -1;
};

/// Runs `episodes` evaluation episodes of the policy. Deterministic given
/// (cfg, spec, seed); the learner is only consulted for components marked
/// learned and must match the config's dimensions.
PolicyMetrics evaluate_policy(const RunConfig& cfg, const PolicySpec& spec,
                              CdehLearner* learner, const StateScales& scales,
                              int episodes, std::uint64_t seed,
                              std::vector<TraceRow>* trace = nullptr);

}  // namespace irsmec

#endif
