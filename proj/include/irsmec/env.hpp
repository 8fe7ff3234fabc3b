#ifndef IRSMEC_ENV_HPP
#define IRSMEC_ENV_HPP

#include <optional>

#include "irsmec/channel.hpp"
#include "irsmec/mec.hpp"
#include "irsmec/nn/tensor.hpp"
#include "irsmec/rng.hpp"
#include "irsmec/rsma.hpp"

namespace irsmec {

/// Real/imaginary split of one slot's CSI; plane 0 holds real parts.
struct StateTensors {
    Eigen::MatrixXd dir_re, dir_im;  // M x N
    Eigen::MatrixXd irs_re, irs_im;  // K x N
    Eigen::MatrixXd g_re, g_im;      // M x K
};

/// Per-tensor standardization factors (RMS of pre-sampled draws).
struct StateScales {
    double dir = 1.0, irs = 1.0, g = 1.0;
};

StateTensors build_state(const ChannelState& cs);
ChannelState reconstruct_channels(const StateTensors& st);

/// Standardized float planes in network layout: for each tensor the real
/// plane then the imaginary plane, each in column-major element order.
struct EncodedState {
    std::vector<float> dir, irs, g;
};
EncodedState encode_state(const StateTensors& st, const StateScales& sc);

/// Decoded continuous action bundle.
struct ContinuousAction {
    Eigen::VectorXd beta, eta, gamma;  // [0,1] each, length N
    Eigen::VectorXd p;                 // watts, length N
    IrsPhase phase;                    // K angles
    Beamformer combiner;               // M x N, unit-norm columns
};

/// Maps a raw vector in [-1,1]^dim onto the feasible action domains:
/// beta/eta/gamma via (x+1)/2, theta via pi*(x+1) wrapped to [0,2*pi), the
/// combiner from 2MN reals with per-column normalization (all-zero columns
/// fall back to a uniform combiner), and p = p_max (or a scaled action
/// entry when the power action is enabled).
ContinuousAction decode_action(const Eigen::VectorXd& raw, const SystemConfig& sys,
                               const EnvConfig& env);

struct SlotOutcome {
    DelayReport report;
    double reward = 0.0;
    long order_index = -1;  // proposed/noma decode order actually applied
};

/// Pure slot evaluation: composite channel -> scheme rate chain -> delay
/// model -> reward. For the SIC-RSMA scheme the decode order comes from the
/// configured rule and `order` is ignored.
SlotOutcome evaluate_slot(const SystemConfig& sys, const EnvConfig& env,
                          const ChannelState& cs, const TaskBatch& tasks,
                          const ContinuousAction& act, const DecodingOrder& order,
                          const std::string& sic_order_rule = "gain_desc");

/// Order minimizing the slot's mean delay for the given continuous action
/// (ties break toward the lower index).
long exhaustive_best_order(const SystemConfig& sys, const EnvConfig& env,
                           const ChannelState& cs, const TaskBatch& tasks,
                           const ContinuousAction& act);

/// Episode-stepped MDP wrapper. Users are placed once per episode; fading
/// and tasks are redrawn every slot from per-link generator streams.
class Environment {
public:
    Environment(const SystemConfig& sys, const EnvConfig& env, const StateScales& scales,
                std::string sic_order_rule = "gain_desc");

    /// Draws the standardization factors from `samples` pre-sampled slots.
    static StateScales compute_scales(const SystemConfig& sys, const EnvConfig& env,
                                      int samples);

    void reset(std::uint64_t episode_seed);

    struct StepResult {
        DelayReport report;
        double reward = 0.0;
        bool done = false;
        long order_index = -1;
    };
    StepResult step(const Eigen::VectorXd& raw_action, long order_index);
    StepResult step_action(const ContinuousAction& act, long order_index);

    const ChannelState& channels() const { return cs_; }
    const TaskBatch& tasks() const { return tasks_; }
    const EncodedState& state() const { return encoded_; }
    const StateScales& scales() const { return scales_; }
    int slot() const { return t_; }

    const SystemConfig& sys() const { return sys_; }
    const EnvConfig& env_cfg() const { return env_; }
    int cont_dim() const { return sys_.cont_action_dim(env_.include_power_action); }
    long n_orders() const { return factorial(sys_.n_users); }

private:
    void sample_slot();

    SystemConfig sys_;
    EnvConfig env_;
    StateScales scales_;
    std::string sic_order_rule_;
    std::vector<Vec2> positions_;
    ChannelState cs_;
    TaskBatch tasks_;
    EncodedState encoded_;
    std::mt19937_64 rng_dir_, rng_irs_, rng_g_, rng_tasks_, rng_place_;
    int t_ = 0;
};

/// Assembles encoded states into the planed batch layout the networks use.
template <class S>
nn::StateBatch<S> to_state_batch(const std::vector<const EncodedState*>& states, int m,
                                 int n, int k) {
    nn::StateBatch<S> sb;
    const int batch = static_cast<int>(states.size());
    sb.dir.resize(batch, 2, m, n);
    sb.irs.resize(batch, 2, k, n);
    sb.g.resize(batch, 2, m, k);
    auto fill = [batch](nn::PlaneBatch<S>& pb, auto get) {
        const int plane = pb.rows * pb.cols;
        for (int b = 0; b < batch; ++b)
            for (int c = 0; c < 2; ++c) {
                const float* src = get(b) + c * plane;
                auto& dst = pb.at(b, c);
                for (int i = 0; i < plane; ++i) dst.data()[i] = static_cast<S>(src[i]);
            }
    };
    fill(sb.dir, [&](int b) { return states[b]->dir.data(); });
    fill(sb.irs, [&](int b) { return states[b]->irs.data(); });
    fill(sb.g, [&](int b) { return states[b]->g.data(); });
    return sb;
}

}  // namespace irsmec

#endif
