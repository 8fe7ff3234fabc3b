#ifndef IRSMEC_CONFIG_HPP
#define IRSMEC_CONFIG_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace irsmec {

/// Which uplink rate chain the environment applies.
enum class AccessScheme { Proposed, SicRsma, Noma };

/// How the edge compute share per user is assigned.
enum class RhoPolicy { Proportional, Equal };

/// Physical-layer and compute-model parameters of one scenario.
struct SystemConfig {
    int m_antennas = 20;          // BS antennas M
    int n_users = 5;              // ground users N
    int k_irs = 50;               // IRS elements K
    int slots = 10;               // slots per episode T
    double slot_duration = 0.1;   // tau, seconds
    double bandwidth = 400e3;     // Hz
    double noise_power = 1e-10;   // watts (-70 dBm)
    double p_max = 5.0;           // watts per user
    double carrier_freq = 2.4e9;  // Hz
    double rician_kappa = 10.0;   // linear
    double loss_los_db = 0.0;
    double loss_nlos_db = 20.0;
    double antenna_sep = 0.0;     // meters; 0 -> half wavelength
    std::array<double, 2> bs_pos{0.0, 0.0};
    std::array<double, 2> irs_pos{100.0, 0.0};
    std::array<double, 2> gu_ring_center{150.0, 0.0};
    std::array<double, 2> gu_ring_radii{2.0, 10.0};
    std::array<double, 2> task_bits_range{400.0, 1600.0};
    double f_gu = 1e8;    // cycles/s per user
    double f_mec = 5e9;   // cycles/s at the edge
    double c_gu = 1000;   // cycles/bit
    double c_mec = 1000;  // cycles/bit
    std::uint64_t rng_seed = 1;

    double antenna_sep_m() const;  // resolves the half-wavelength default
    double delay_cap() const { return 10.0 * slot_duration; }
    /// Raw continuous action length: beta, eta, gamma (N each), theta (K),
    /// and 2MN reals for the combiner matrix (+N if power is an action).
    int cont_action_dim(bool with_power) const {
        return 3 * n_users + k_irs + 2 * m_antennas * n_users +
               (with_power ? n_users : 0);
    }
    void validate() const;  // throws std::invalid_argument on violation
};

/// Environment-level knobs on top of the physics.
struct EnvConfig {
    AccessScheme scheme = AccessScheme::Proposed;
    RhoPolicy rho_policy = RhoPolicy::Proportional;
    double lambda_penalty = 1.0;
    bool include_power_action = false;
    bool mask_direct = false;  // zero the GU-BS channel ("only IRS")
    bool mask_irs = false;     // zero the IRS-BS channel ("direct")
    int state_scale_samples = 1000;
};

/// Network width plan shared by every net in the learner.
struct NetConfig {
    int feature_dim = 64;  // pooled length D per conv path
    int h1 = 128;          // dense block width
    int h2 = 128;          // head width
};

/// TD3 + DQN hyperparameters.
struct AgentConfig {
    int episodes = 2000;
    std::size_t buffer_capacity = 100000;
    int batch_size = 64;
    double lr = 3e-4;
    double gamma_disc = 0.99;
    double tau_soft = 0.005;
    int policy_delay = 2;
    double sigma_explore_start = 0.1;
    double sigma_explore_end = 0.02;
    double sigma_target = 0.2;
    double noise_clip = 0.5;
    double eps_start = 1.0;
    double eps_end = 0.05;
    double eps_decay_frac = 0.3;  // fraction of total steps to anneal over
    bool dqn_enabled = true;
    std::string order_source = "dqn";  // dqn | exhaustive | sequential | reverse
    int checkpoint_every = 0;          // episodes; 0 -> final only
};

/// Evaluation-side policy selection.
struct EvalConfig {
    int episodes = 100;
    std::vector<std::string> policies{"cdeh"};
    std::string sic_order_rule = "gain_desc";  // gain_desc | gain_asc | sequential
    bool emit_trace = false;
};

struct RunConfig {
    SystemConfig sys;
    EnvConfig env;
    NetConfig net;
    AgentConfig agent;
    EvalConfig eval;
};

/// Parses the flat key=value config format. Unknown keys, malformed lines
/// and out-of-domain values raise std::runtime_error carrying the line
/// number. Keys omitted keep their defaults.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// Canonical text form (every key, fixed order); input to the config hash.
std::string resolved_config_text(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace irsmec

#endif
