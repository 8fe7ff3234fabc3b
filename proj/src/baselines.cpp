#include "irsmec/baselines.hpp"

#include <cmath>
#include <numbers>

namespace irsmec {

PolicySpec policy_from_name(const std::string& name, bool has_learner) {
    PolicySpec s;
    s.name = name;
    if (name == "cdeh") {
        // all components learned; requires a checkpoint
    } else if (name == "reverse") {
        s.order = OrderPolicy::Reverse;
    } else if (name == "sequential") {
        s.order = OrderPolicy::Sequential;
    } else if (name == "fixed_order") {
        s.order = OrderPolicy::Fixed;
    } else if (name == "random_order") {
        s.order = OrderPolicy::Random;
    } else if (name == "exhaustive") {
        s.order = OrderPolicy::Exhaustive;
    } else if (name == "random_phase") {
        s.phase = PhasePolicy::Random;
    } else if (name == "fixed_phase") {
        s.phase = PhasePolicy::Fixed;
    } else if (name == "only_irs") {
        s.phase = PhasePolicy::OnlyIrs;
    } else if (name == "direct") {
        s.phase = PhasePolicy::Direct;
    } else if (name == "full_local") {
        s.offload = OffloadPolicy::FullLocal;
    } else if (name == "full_offload") {
        s.offload = OffloadPolicy::FullOffload;
    } else if (name == "sic_rsma") {
        // The full-SIC chain orders its 2N streams by rule; the DQN head is
        // not consulted.
        s.scheme = AccessScheme::SicRsma;
        s.order = OrderPolicy::Sequential;
    } else if (name == "noma") {
        s.scheme = AccessScheme::Noma;
    } else {
        throw std::invalid_argument("unknown policy '" + name + "'");
    }
    // Without a checkpoint every substitutable component degrades to the
    // deterministic heuristic; requesting plain cdeh stays an error.
    if (!has_learner && name != "cdeh") {
        if (s.order == OrderPolicy::Learned) s.order = OrderPolicy::Sequential;
        if (s.phase == PhasePolicy::Learned && s.phase != PhasePolicy::OnlyIrs &&
            s.phase != PhasePolicy::Direct)
            s.phase = PhasePolicy::Fixed;
        if (s.cont == ContPolicy::Learned) s.cont = ContPolicy::MatchedFilter;
    }
    return s;
}

namespace {

Eigen::VectorXd uniform_phases(int k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
    Eigen::VectorXd theta(k);
    for (int i = 0; i < k; ++i) theta[i] = uni(rng);
    return theta;
}

/// Deterministic fallback action: half offload, even splits, matched-filter
/// combiner on the composite channel under the already-chosen phases.
ContinuousAction heuristic_action(const SystemConfig& sys, const ChannelState& cs,
                                  const IrsPhase& phase) {
    ContinuousAction act;
    const int n = sys.n_users;
    act.beta = Eigen::VectorXd::Constant(n, 0.5);
    act.eta = Eigen::VectorXd::Constant(n, 0.5);
    act.gamma = Eigen::VectorXd::Constant(n, 0.5);
    act.p = Eigen::VectorXd::Constant(n, sys.p_max);
    act.phase = phase;
    const CMat h = composite_channel(cs, phase);
    act.combiner.w.resize(sys.m_antennas, n);
    for (int u = 0; u < n; ++u) {
        const double nrm = h.col(u).norm();
        if (nrm < 1e-30)
            act.combiner.w.col(u) = CVec::Constant(sys.m_antennas,
                                                   1.0 / std::sqrt(double(sys.m_antennas)));
        else
            act.combiner.w.col(u) = h.col(u) / nrm;
    }
    return act;
}

}  // namespace

PolicyMetrics evaluate_policy(const RunConfig& cfg, const PolicySpec& spec,
                              CdehLearner* learner, const StateScales& scales,
                              int episodes, std::uint64_t seed,
                              std::vector<TraceRow>* trace) {
    if (spec.needs_learner() && !learner)
        throw std::invalid_argument("policy '" + spec.name +
                                    "' has learned components but no checkpoint was supplied");

    RunConfig rc = cfg;
    rc.env.scheme = spec.scheme;
    if (spec.phase == PhasePolicy::OnlyIrs) rc.env.mask_direct = true;
    if (spec.phase == PhasePolicy::Direct) rc.env.mask_irs = true;

    Environment env(rc.sys, rc.env, scales, rc.eval.sic_order_rule);
    const int n = rc.sys.n_users;
    const int k = rc.sys.k_irs;
    const long n_orders = factorial(n);

    // Per-run fixed draws are taken once from the policy stream.
    auto rng_policy = make_rng(seed, Stream::Policy);
    const Eigen::VectorXd fixed_theta = uniform_phases(k, rng_policy);
    long fixed_order_index = 0;
    {
        std::uniform_int_distribution<long> pick(0, n_orders - 1);
        fixed_order_index = pick(rng_policy);
    }
    Eigen::VectorXd fixed_raw;
    {
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        fixed_raw.resize(env.cont_dim());
        for (Eigen::Index i = 0; i < fixed_raw.size(); ++i) fixed_raw[i] = uni(rng_policy);
    }

    PolicyMetrics pm;
    pm.policy = spec.name;
    pm.episodes = episodes;
    pm.seed = seed;
    pm.per_episode_delay.reserve(episodes);
    pm.per_episode_reward.reserve(episodes);

    for (int ep = 0; ep < episodes; ++ep) {
        env.reset(episode_seed(seed, ep));
        auto rng_slot = make_rng(seed, Stream::Policy, 1000 + ep);
        double ep_delay = 0.0, ep_reward = 0.0;
        for (int t = 1; t <= rc.sys.slots; ++t) {
            const EncodedState& s = env.state();

            // Phase substitution is decided first so heuristic combiners
            // match the channel actually applied.
            std::optional<Eigen::VectorXd> theta_override;
            if (spec.phase == PhasePolicy::Random)
                theta_override = uniform_phases(k, rng_slot);
            else if (spec.phase == PhasePolicy::Fixed)
                theta_override = fixed_theta;

            // Continuous bundle.
            ContinuousAction act;
            switch (spec.cont) {
                case ContPolicy::Learned:
                    act = decode_action(learner->act(s), rc.sys, rc.env);
                    break;
                case ContPolicy::MatchedFilter: {
                    IrsPhase ph{theta_override ? *theta_override
                                               : Eigen::VectorXd::Zero(k)};
                    act = heuristic_action(rc.sys, env.channels(), ph);
                    break;
                }
                case ContPolicy::Random: {
                    std::uniform_real_distribution<double> uni(-1.0, 1.0);
                    Eigen::VectorXd raw(env.cont_dim());
                    for (Eigen::Index i = 0; i < raw.size(); ++i) raw[i] = uni(rng_slot);
                    act = decode_action(raw, rc.sys, rc.env);
                    break;
                }
                case ContPolicy::Fixed:
                    act = decode_action(fixed_raw, rc.sys, rc.env);
                    break;
            }
            if (theta_override) act.phase.theta = *theta_override;

            // Offload substitution.
            if (spec.offload == OffloadPolicy::FullLocal)
                act.beta.setZero();
            else if (spec.offload == OffloadPolicy::FullOffload)
                act.beta.setOnes();

            // Decode order.
            long order_idx = 0;
            switch (spec.order) {
                case OrderPolicy::Learned:
                    order_idx = learner->pick_order(s);
                    break;
                case OrderPolicy::Reverse:
                    order_idx = n_orders - 1;
                    break;
                case OrderPolicy::Sequential:
                    order_idx = 0;
                    break;
                case OrderPolicy::Fixed:
                    order_idx = fixed_order_index;
                    break;
                case OrderPolicy::Random: {
                    std::uniform_int_distribution<long> pick(0, n_orders - 1);
                    order_idx = pick(rng_slot);
                    break;
                }
                case OrderPolicy::Exhaustive:
                    order_idx = exhaustive_best_order(rc.sys, rc.env, env.channels(),
                                                      env.tasks(), act);
                    break;
            }

            const auto res = env.step_action(act, order_idx);
            ep_delay += res.report.avg;
            ep_reward += res.reward;
            pm.violations += res.report.deadline_violations;
            if (trace) {
                TraceRow row;
                row.episode = ep;
                row.t = t;
                row.delays.assign(res.report.t_total.data(),
                                  res.report.t_total.data() + res.report.t_total.size());
                row.reward = res.reward;
                row.violations = res.report.deadline_violations;
                row.order_index = res.order_index;
                trace->push_back(std::move(row));
            }
        }
        pm.per_episode_delay.push_back(ep_delay / rc.sys.slots);
        pm.per_episode_reward.push_back(ep_reward);
    }

    double sum = 0.0, rsum = 0.0;
    for (int i = 0; i < episodes; ++i) {
        sum += pm.per_episode_delay[i];
        rsum += pm.per_episode_reward[i];
    }
    pm.mean_delay = sum / episodes;
    pm.mean_reward = rsum / episodes;
    double ss = 0.0;
    for (int i = 0; i < episodes; ++i) {
        const double d = pm.per_episode_delay[i] - pm.mean_delay;
        ss += d * d;
    }
    pm.std_delay = episodes > 1 ? std::sqrt(ss / (episodes - 1)) : 0.0;
    return pm;
}

}  // namespace irsmec
