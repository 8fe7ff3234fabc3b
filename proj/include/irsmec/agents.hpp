#ifndef IRSMEC_AGENTS_HPP
#define IRSMEC_AGENTS_HPP

#include <json.hpp>
#include <memory>

#include "irsmec/env.hpp"
#include "irsmec/nn/adam.hpp"
#include "irsmec/nn/network.hpp"

namespace irsmec {

/// One replay record. States are stored in network layout (standardized
/// float planes); both learners read the same records.
struct Transition {
    EncodedState s, s2;
    std::vector<float> a_cont;
    long a_disc = 0;
    float reward = 0.0f;
    bool done = false;
};

/// Fixed-capacity FIFO ring with uniform batch sampling (distinct indices
/// within a batch).
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return full_ ? capacity_ : cursor_; }
    std::size_t capacity() const { return capacity_; }
    const std::vector<Transition>& storage() const { return storage_; }

    std::vector<const Transition*> sample(int batch, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::vector<Transition> storage_;
    std::size_t cursor_ = 0;
    bool full_ = false;
};

/// Samples assembled into network inputs.
struct Batch {
    nn::StateBatch<float> s, s2;
    nn::Mat<float> a;  // batch x cont_dim
    std::vector<long> a_disc;
    Eigen::VectorXf r, done;
    int size = 0;
};

Batch make_batch(const std::vector<const Transition*>& sample, int m, int n, int k);

/// y_i = r_i + gamma * (1 - done_i) * q_i; the TD3 caller passes the
/// elementwise minimum of the two target critics as q.
Eigen::VectorXf td_targets(const Eigen::VectorXf& r, const Eigen::VectorXf& done,
                           const Eigen::VectorXf& q, float gamma);

/// Epsilon-greedy pick over one row of Q-values; greedy ties break toward
/// the lowest index.
long epsilon_greedy(const Eigen::RowVectorXf& q, double epsilon, long n_actions,
                    std::mt19937_64& rng);

struct Td3Settings {
    double lr = 3e-4;
    double gamma_disc = 0.99;
    double tau_soft = 0.005;
    double sigma_target = 0.2;
    double noise_clip = 0.5;
};

/// Twin-critic deterministic-policy learner for the continuous action bundle.
class Td3Agent {
public:
    Td3Agent(const nn::NetShape& actor_shape, const nn::NetShape& critic_shape,
             const Td3Settings& settings, std::uint64_t init_seed);

    /// clamp(actor(s) + N(0, sigma), -1, 1); the actor runs with frozen
    /// normalization statistics.
    Eigen::VectorXd select(const EncodedState& state, double sigma, std::mt19937_64& rng);

    struct CriticLosses {
        float q1 = 0, q2 = 0;
    };
    CriticLosses update_critics(const Batch& batch, std::mt19937_64& noise_rng);
    float update_actor(const Batch& batch);
    void soft_update_targets();

    nn::Network<float>& actor() { return *actor_; }
    nn::Network<float>& critic1() { return *critic1_; }
    nn::Network<float>& critic2() { return *critic2_; }
    nn::Network<float>& actor_target() { return *actor_t_; }
    nn::Network<float>& critic1_target() { return *critic1_t_; }
    nn::Network<float>& critic2_target() { return *critic2_t_; }
    const Td3Settings& settings() const { return settings_; }

    void register_all(nn::ParamRegistry<float>& reg);

private:
    nn::NetShape actor_shape_, critic_shape_;
    Td3Settings settings_;
    std::unique_ptr<nn::Network<float>> actor_, actor_t_, critic1_, critic1_t_, critic2_,
        critic2_t_;
    nn::Adam<float> opt_actor_, opt_c1_, opt_c2_;
};

struct DqnSettings {
    double lr = 3e-4;
    double gamma_disc = 0.99;
    double tau_soft = 0.005;
};

/// Q-learner over the N! decoding orders.
class DqnAgent {
public:
    DqnAgent(const nn::NetShape& q_shape, const DqnSettings& settings,
             std::uint64_t init_seed);

    long select(const EncodedState& state, double epsilon, std::mt19937_64& rng);
    long greedy(const EncodedState& state);
    float update(const Batch& batch);  // also soft-updates the target net

    nn::Network<float>& qnet() { return *qnet_; }
    nn::Network<float>& qnet_target() { return *qnet_t_; }
    const DqnSettings& settings() const { return settings_; }

    void register_all(nn::ParamRegistry<float>& reg);

private:
    nn::NetShape q_shape_;
    DqnSettings settings_;
    std::unique_ptr<nn::Network<float>> qnet_, qnet_t_;
    nn::Adam<float> opt_;
};

struct TrainLogRow {
    int episode = 0;
    double ret = 0;  // undiscounted episode return
    double critic1_loss = 0, critic2_loss = 0, actor_loss = 0, q_loss = 0;
    double epsilon = 0, sigma_explore = 0;
    int violations = 0;
    double wall_s = 0;
};

/// The hierarchical learner: TD3 for the continuous bundle and DQN for the
/// decoding order, trained alternately per step from a shared buffer.
class CdehLearner {
public:
    explicit CdehLearner(const RunConfig& cfg);

    std::vector<TrainLogRow> train(Environment& env, const std::string& out_dir,
                                   const nlohmann::json& run_meta);

    /// Deterministic policy outputs (no exploration noise).
    Eigen::VectorXd act(const EncodedState& state);
    long pick_order(const EncodedState& state);

    void save(const std::string& stem, const nlohmann::json& extra_meta);
    nlohmann::json load(const std::string& stem);

    Td3Agent& td3() { return *td3_; }
    DqnAgent* dqn() { return dqn_ ? dqn_.get() : nullptr; }
    ReplayBuffer& buffer() { return buffer_; }
    int start_episode() const { return start_episode_; }
    long actor_updates() const { return actor_updates_; }
    long global_step() const { return global_step_; }

    static nn::NetShape actor_shape(const RunConfig& cfg);
    static nn::NetShape critic_shape(const RunConfig& cfg);
    static nn::NetShape q_shape(const RunConfig& cfg);

private:
    double sigma_at(long step, long total) const;
    double epsilon_at(long step, long total) const;

    RunConfig cfg_;
    std::unique_ptr<Td3Agent> td3_;
    std::unique_ptr<DqnAgent> dqn_;
    ReplayBuffer buffer_;
    long global_step_ = 0;
    long actor_updates_ = 0;
    int start_episode_ = 0;
};

std::uint64_t episode_seed(std::uint64_t run_seed, long episode);

void write_train_log(const std::string& path, const std::vector<TrainLogRow>& rows,
                     const std::string& header_comment);

}  // namespace irsmec

#endif
