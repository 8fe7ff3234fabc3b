#include "irsmec/agents.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "irsmec/nn/checkpoint.hpp"

namespace irsmec {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("replay capacity must be positive");
    storage_.reserve(std::min<std::size_t>(capacity_, 1 << 20));
}

void ReplayBuffer::push(Transition t) {
    if (storage_.size() < capacity_) {
        storage_.push_back(std::move(t));
        cursor_ = storage_.size() % capacity_;
        full_ = storage_.size() == capacity_;
    } else {
        storage_[cursor_] = std::move(t);
        cursor_ = (cursor_ + 1) % capacity_;
    }
}

std::vector<const Transition*> ReplayBuffer::sample(int batch, std::mt19937_64& rng) const {
    if (static_cast<std::size_t>(batch) > size())
        throw std::invalid_argument("replay sample: batch exceeds stored transitions");
    const auto idx = sample_without_replacement(size(), batch, rng);
    std::vector<const Transition*> out(batch);
    for (int i = 0; i < batch; ++i) out[i] = &storage_[idx[i]];
    return out;
}

Batch make_batch(const std::vector<const Transition*>& sample, int m, int n, int k) {
    Batch b;
    b.size = static_cast<int>(sample.size());
    std::vector<const EncodedState*> s(b.size), s2(b.size);
    for (int i = 0; i < b.size; ++i) {
        s[i] = &sample[i]->s;
        s2[i] = &sample[i]->s2;
    }
    b.s = to_state_batch<float>(s, m, n, k);
    b.s2 = to_state_batch<float>(s2, m, n, k);
    const int adim = static_cast<int>(sample[0]->a_cont.size());
    b.a.resize(b.size, adim);
    b.a_disc.resize(b.size);
    b.r.resize(b.size);
    b.done.resize(b.size);
    for (int i = 0; i < b.size; ++i) {
        for (int j = 0; j < adim; ++j) b.a(i, j) = sample[i]->a_cont[j];
        b.a_disc[i] = sample[i]->a_disc;
        b.r[i] = sample[i]->reward;
        b.done[i] = sample[i]->done ? 1.0f : 0.0f;
    }
    return b;
}

Eigen::VectorXf td_targets(const Eigen::VectorXf& r, const Eigen::VectorXf& done,
                           const Eigen::VectorXf& q, float gamma) {
    return r.array() + gamma * (1.0f - done.array()) * q.array();
}

long epsilon_greedy(const Eigen::RowVectorXf& q, double epsilon, long n_actions,
                    std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    if (uni(rng) < epsilon) {
        std::uniform_int_distribution<long> pick(0, n_actions - 1);
        return pick(rng);
    }
    long best = 0;
    for (long i = 1; i < n_actions; ++i)
        if (q[i] > q[best]) best = i;
    return best;
}

namespace {

nn::StateBatch<float> single_state(const EncodedState& s, const nn::NetShape& shape) {
    std::vector<const EncodedState*> v{&s};
    return to_state_batch<float>(v, shape.m, shape.n, shape.k);
}

}  // namespace

Td3Agent::Td3Agent(const nn::NetShape& actor_shape, const nn::NetShape& critic_shape,
                   const Td3Settings& settings, std::uint64_t init_seed)
    : actor_shape_(actor_shape), critic_shape_(critic_shape), settings_(settings) {
    auto r0 = make_rng(init_seed, Stream::Init, 0);
    auto r1 = make_rng(init_seed, Stream::Init, 1);
    auto r2 = make_rng(init_seed, Stream::Init, 2);
    actor_ = std::make_unique<nn::Network<float>>(actor_shape, r0);
    critic1_ = std::make_unique<nn::Network<float>>(critic_shape, r1);
    critic2_ = std::make_unique<nn::Network<float>>(critic_shape, r2);
    auto rt = make_rng(init_seed, Stream::Init, 3);
    actor_t_ = std::make_unique<nn::Network<float>>(actor_shape, rt);
    critic1_t_ = std::make_unique<nn::Network<float>>(critic_shape, rt);
    critic2_t_ = std::make_unique<nn::Network<float>>(critic_shape, rt);
    actor_t_->copy_from(*actor_);
    critic1_t_->copy_from(*critic1_);
    critic2_t_->copy_from(*critic2_);
    opt_actor_ = nn::Adam<float>(actor_->params(), settings.lr);
    opt_c1_ = nn::Adam<float>(critic1_->params(), settings.lr);
    opt_c2_ = nn::Adam<float>(critic2_->params(), settings.lr);
}

Eigen::VectorXd Td3Agent::select(const EncodedState& state, double sigma,
                                 std::mt19937_64& rng) {
    const nn::StateBatch<float> sb = single_state(state, actor_shape_);
    const nn::Mat<float> out = actor_->forward(sb, nullptr, nn::kEval);
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::VectorXd a(out.cols());
    for (Eigen::Index i = 0; i < out.cols(); ++i) {
        double v = static_cast<double>(out(0, i));
        if (sigma > 0.0) v += sigma * noise(rng);
        a[i] = std::clamp(v, -1.0, 1.0);
    }
    return a;
}

Td3Agent::CriticLosses Td3Agent::update_critics(const Batch& batch,
                                                std::mt19937_64& noise_rng) {
    const int bsz = batch.size;

    // Smoothed target action: clamp(pi'(s') + clip(N(0, sigma_t), -c, c), -1, 1).
    nn::Mat<float> a2 = actor_t_->forward(batch.s2, nullptr, nn::kTrainNoUpdate);
    std::normal_distribution<double> noise(0.0, settings_.sigma_target);
    const float c = static_cast<float>(settings_.noise_clip);
    for (Eigen::Index i = 0; i < a2.rows(); ++i)
        for (Eigen::Index j = 0; j < a2.cols(); ++j) {
            float eps = settings_.sigma_target > 0
                            ? std::clamp(static_cast<float>(noise(noise_rng)), -c, c)
                            : 0.0f;
            a2(i, j) = std::clamp(a2(i, j) + eps, -1.0f, 1.0f);
        }

    const Eigen::VectorXf q1t = critic1_t_->forward(batch.s2, &a2, nn::kTrainNoUpdate).col(0);
    const Eigen::VectorXf q2t = critic2_t_->forward(batch.s2, &a2, nn::kTrainNoUpdate).col(0);
    const Eigen::VectorXf y =
        td_targets(batch.r, batch.done, q1t.cwiseMin(q2t), static_cast<float>(settings_.gamma_disc));

    CriticLosses losses;
    auto train_one = [&](nn::Network<float>& critic, nn::Adam<float>& opt) {
        nn::Mat<float> q = critic.forward(batch.s, &batch.a, nn::kTrain);
        const Eigen::VectorXf err = q.col(0) - y;
        const float loss = err.squaredNorm() / static_cast<float>(bsz);
        nn::Mat<float> g(bsz, 1);
        g.col(0) = 2.0f / static_cast<float>(bsz) * err;
        critic.zero_grad();
        critic.backward(g);
        opt.step(critic.params());
        return loss;
    };
    losses.q1 = train_one(*critic1_, opt_c1_);
    losses.q2 = train_one(*critic2_, opt_c2_);
    return losses;
}

float Td3Agent::update_actor(const Batch& batch) {
    const int bsz = batch.size;
    nn::Mat<float> a_pi = actor_->forward(batch.s, nullptr, nn::kTrain);
    nn::Mat<float> q = critic1_->forward(batch.s, &a_pi, nn::kTrainNoUpdate);
    const float loss = -q.col(0).mean();

    // dL/dq = -1/B; route the chain through the critic into its action input.
    nn::Mat<float> gq = nn::Mat<float>::Constant(bsz, 1, -1.0f / static_cast<float>(bsz));
    nn::Mat<float> g_action;
    critic1_->zero_grad();
    critic1_->backward(gq, &g_action);
    actor_->zero_grad();
    actor_->backward(g_action);
    opt_actor_.step(actor_->params());
    return loss;
}

void Td3Agent::soft_update_targets() {
    const float tau = static_cast<float>(settings_.tau_soft);
    actor_t_->soft_update_from(*actor_, tau);
    critic1_t_->soft_update_from(*critic1_, tau);
    critic2_t_->soft_update_from(*critic2_, tau);
}

void Td3Agent::register_all(nn::ParamRegistry<float>& reg) {
    auto add = [&reg](nn::Network<float>& net, const std::string& prefix) {
        for (auto& r : net.params()) {
            r.name = prefix + "/" + r.name;
            reg.push_back(r);
        }
    };
    add(*actor_, "actor");
    add(*actor_t_, "actor_target");
    add(*critic1_, "critic1");
    add(*critic1_t_, "critic1_target");
    add(*critic2_, "critic2");
    add(*critic2_t_, "critic2_target");
    opt_actor_.register_state(reg, "adam/actor");
    opt_c1_.register_state(reg, "adam/critic1");
    opt_c2_.register_state(reg, "adam/critic2");
}

DqnAgent::DqnAgent(const nn::NetShape& q_shape, const DqnSettings& settings,
                   std::uint64_t init_seed)
    : q_shape_(q_shape), settings_(settings) {
    auto r0 = make_rng(init_seed, Stream::Init, 4);
    qnet_ = std::make_unique<nn::Network<float>>(q_shape, r0);
    auto r1 = make_rng(init_seed, Stream::Init, 5);
    qnet_t_ = std::make_unique<nn::Network<float>>(q_shape, r1);
    qnet_t_->copy_from(*qnet_);
    opt_ = nn::Adam<float>(qnet_->params(), settings.lr);
}

long DqnAgent::select(const EncodedState& state, double epsilon, std::mt19937_64& rng) {
    const nn::StateBatch<float> sb = single_state(state, q_shape_);
    const nn::Mat<float> q = qnet_->forward(sb, nullptr, nn::kEval);
    return epsilon_greedy(q.row(0), epsilon, q_shape_.out_dim, rng);
}

long DqnAgent::greedy(const EncodedState& state) {
    static std::mt19937_64 unused(0);
    const nn::StateBatch<float> sb = single_state(state, q_shape_);
    const nn::Mat<float> q = qnet_->forward(sb, nullptr, nn::kEval);
    return epsilon_greedy(q.row(0), 0.0, q_shape_.out_dim, unused);
}

float DqnAgent::update(const Batch& batch) {
    const int bsz = batch.size;
    const nn::Mat<float> qn = qnet_t_->forward(batch.s2, nullptr, nn::kTrainNoUpdate);
    Eigen::VectorXf qmax(bsz);
    for (int i = 0; i < bsz; ++i) qmax[i] = qn.row(i).maxCoeff();
    const Eigen::VectorXf y =
        td_targets(batch.r, batch.done, qmax, static_cast<float>(settings_.gamma_disc));

    nn::Mat<float> q = qnet_->forward(batch.s, nullptr, nn::kTrain);
    float loss = 0.0f;
    nn::Mat<float> g = nn::Mat<float>::Zero(bsz, q_shape_.out_dim);
    for (int i = 0; i < bsz; ++i) {
        const float err = q(i, batch.a_disc[i]) - y[i];
        loss += err * err;
        g(i, batch.a_disc[i]) = 2.0f * err / static_cast<float>(bsz);
    }
    loss /= static_cast<float>(bsz);
    qnet_->zero_grad();
    qnet_->backward(g);
    opt_.step(qnet_->params());
    qnet_t_->soft_update_from(*qnet_, static_cast<float>(settings_.tau_soft));
    return loss;
}

void DqnAgent::register_all(nn::ParamRegistry<float>& reg) {
    auto add = [&reg](nn::Network<float>& net, const std::string& prefix) {
        for (auto& r : net.params()) {
            r.name = prefix + "/" + r.name;
            reg.push_back(r);
        }
    };
    add(*qnet_, "qnet");
    add(*qnet_t_, "qnet_target");
    opt_.register_state(reg, "adam/qnet");
}

nn::NetShape CdehLearner::actor_shape(const RunConfig& cfg) {
    nn::NetShape s;
    s.m = cfg.sys.m_antennas;
    s.n = cfg.sys.n_users;
    s.k = cfg.sys.k_irs;
    s.d = cfg.net.feature_dim;
    s.h1 = cfg.net.h1;
    s.h2 = cfg.net.h2;
    s.action_dim = 0;
    s.out_dim = cfg.sys.cont_action_dim(cfg.env.include_power_action);
    s.squash = true;
    return s;
}

nn::NetShape CdehLearner::critic_shape(const RunConfig& cfg) {
    nn::NetShape s = actor_shape(cfg);
    s.action_dim = s.out_dim;
    s.out_dim = 1;
    s.squash = false;
    return s;
}

nn::NetShape CdehLearner::q_shape(const RunConfig& cfg) {
    nn::NetShape s = actor_shape(cfg);
    s.action_dim = 0;
    s.out_dim = static_cast<int>(factorial(cfg.sys.n_users));
    s.squash = false;
    return s;
}

CdehLearner::CdehLearner(const RunConfig& cfg)
    : cfg_(cfg), buffer_(cfg.agent.buffer_capacity) {
    Td3Settings ts;
    ts.lr = cfg.agent.lr;
    ts.gamma_disc = cfg.agent.gamma_disc;
    ts.tau_soft = cfg.agent.tau_soft;
    ts.sigma_target = cfg.agent.sigma_target;
    ts.noise_clip = cfg.agent.noise_clip;
    td3_ = std::make_unique<Td3Agent>(actor_shape(cfg), critic_shape(cfg), ts,
                                      cfg.sys.rng_seed);
    if (cfg.agent.dqn_enabled) {
        DqnSettings ds;
        ds.lr = cfg.agent.lr;
        ds.gamma_disc = cfg.agent.gamma_disc;
        ds.tau_soft = cfg.agent.tau_soft;
        dqn_ = std::make_unique<DqnAgent>(q_shape(cfg), ds, cfg.sys.rng_seed);
    }
}

double CdehLearner::sigma_at(long step, long total) const {
    const auto& a = cfg_.agent;
    if (total <= 1) return a.sigma_explore_end;
    const double f = std::min(1.0, static_cast<double>(step) / static_cast<double>(total - 1));
    return a.sigma_explore_start + f * (a.sigma_explore_end - a.sigma_explore_start);
}

double CdehLearner::epsilon_at(long step, long total) const {
    const auto& a = cfg_.agent;
    const long span = std::max<long>(1, static_cast<long>(a.eps_decay_frac * total));
    const double f = std::min(1.0, static_cast<double>(step) / static_cast<double>(span));
    return a.eps_start + f * (a.eps_end - a.eps_start);
}

Eigen::VectorXd CdehLearner::act(const EncodedState& state) {
    static std::mt19937_64 unused(0);
    return td3_->select(state, 0.0, unused);
}

long CdehLearner::pick_order(const EncodedState& state) {
    if (!dqn_) throw std::logic_error("pick_order: DQN disabled for this learner");
    return dqn_->greedy(state);
}

std::uint64_t episode_seed(std::uint64_t run_seed, long episode) {
    return derive_seed(mix64(run_seed ^ 0x9d2c5681a7f4b3d1ULL),
                       static_cast<std::uint64_t>(episode));
}

std::vector<TrainLogRow> CdehLearner::train(Environment& env, const std::string& out_dir,
                                            const nlohmann::json& run_meta) {
    namespace fs = std::filesystem;
    const AgentConfig& a = cfg_.agent;
    const int T = cfg_.sys.slots;
    const long total_steps = static_cast<long>(a.episodes) * T;

    auto rng_explore = make_rng(cfg_.sys.rng_seed, Stream::Explore);
    auto rng_replay = make_rng(cfg_.sys.rng_seed, Stream::Replay);
    auto rng_noise = make_rng(cfg_.sys.rng_seed, Stream::Policy);

    const bool use_dqn = a.dqn_enabled && a.order_source == "dqn";
    const long n_orders = env.n_orders();

    std::vector<TrainLogRow> rows;
    rows.reserve(a.episodes);
    const auto wall_start = std::chrono::steady_clock::now();

    for (int ep = start_episode_; ep < a.episodes; ++ep) {
        env.reset(episode_seed(cfg_.sys.rng_seed, ep));
        TrainLogRow row;
        row.episode = ep;
        int n_updates = 0, n_actor_updates = 0, n_q_updates = 0;

        for (int t = 1; t <= T; ++t) {
            const EncodedState s = env.state();
            const double sigma = sigma_at(global_step_, total_steps);
            const double eps = epsilon_at(global_step_, total_steps);
            const Eigen::VectorXd a_cont = td3_->select(s, sigma, rng_explore);

            long order_idx = 0;
            if (use_dqn) {
                order_idx = dqn_->select(s, eps, rng_explore);
            } else if (a.order_source == "exhaustive") {
                order_idx = exhaustive_best_order(
                    env.sys(), env.env_cfg(), env.channels(), env.tasks(),
                    decode_action(a_cont, env.sys(), env.env_cfg()));
            } else if (a.order_source == "reverse") {
                order_idx = n_orders - 1;
            } else if (a.order_source == "sequential") {
                order_idx = 0;
            } else if (a.order_source != "dqn") {
                throw std::invalid_argument("unknown order_source '" + a.order_source + "'");
            }

            const auto res = env.step(a_cont, order_idx);
            Transition tr;
            tr.s = s;
            tr.s2 = env.state();
            tr.a_cont.assign(a_cont.data(), a_cont.data() + a_cont.size());
            tr.a_disc = order_idx;
            tr.reward = static_cast<float>(res.reward);
            tr.done = res.done;
            buffer_.push(std::move(tr));

            row.ret += res.reward;
            row.violations += res.report.deadline_violations;
            row.epsilon = eps;
            row.sigma_explore = sigma;
            ++global_step_;

            if (buffer_.size() >= static_cast<std::size_t>(a.batch_size)) {
                const Batch batch = make_batch(
                    buffer_.sample(a.batch_size, rng_replay), cfg_.sys.m_antennas,
                    cfg_.sys.n_users, cfg_.sys.k_irs);
                const auto cl = td3_->update_critics(batch, rng_noise);
                row.critic1_loss += cl.q1;
                row.critic2_loss += cl.q2;
                ++n_updates;
                if (global_step_ % a.policy_delay == 0) {
                    row.actor_loss += td3_->update_actor(batch);
                    td3_->soft_update_targets();
                    ++n_actor_updates;
                    ++actor_updates_;
                }
                float ql = 0.0f;
                if (use_dqn) {
                    ql = dqn_->update(batch);
                    row.q_loss += ql;
                    ++n_q_updates;
                }
                if (!std::isfinite(cl.q1) || !std::isfinite(cl.q2) || !std::isfinite(ql)) {
                    save(out_dir + "/ckpt_diagnostic", run_meta);
                    throw std::runtime_error(
                        "training aborted: non-finite loss at step " +
                        std::to_string(global_step_) + "; diagnostic checkpoint written");
                }
            }
        }

        if (n_updates > 0) {
            row.critic1_loss /= n_updates;
            row.critic2_loss /= n_updates;
        }
        if (n_actor_updates > 0) row.actor_loss /= n_actor_updates;
        if (n_q_updates > 0) row.q_loss /= n_q_updates;
        row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                   wall_start)
                         .count();
        rows.push_back(row);

        if (a.checkpoint_every > 0 && (ep + 1) % a.checkpoint_every == 0) {
            nlohmann::json meta = run_meta;
            meta["episode"] = ep + 1;
            meta["global_step"] = global_step_;
            save(out_dir + "/ckpt_e" + std::to_string(ep + 1), meta);
        }
    }

    nlohmann::json meta = run_meta;
    meta["episode"] = a.episodes;
    meta["global_step"] = global_step_;
    save(out_dir + "/ckpt_final", meta);
    return rows;
}

void CdehLearner::save(const std::string& stem, const nlohmann::json& extra_meta) {
    nn::ParamRegistry<float> reg;
    td3_->register_all(reg);
    if (dqn_) dqn_->register_all(reg);
    nlohmann::json meta = extra_meta;
    meta["global_step"] = global_step_;
    if (!meta.contains("episode")) meta["episode"] = start_episode_;
    nn::save_checkpoint(stem, reg, meta);
}

nlohmann::json CdehLearner::load(const std::string& stem) {
    nn::ParamRegistry<float> reg;
    td3_->register_all(reg);
    if (dqn_) dqn_->register_all(reg);
    nlohmann::json meta = nn::load_checkpoint(stem, reg);
    if (meta.contains("global_step")) global_step_ = meta["global_step"].get<long>();
    if (meta.contains("episode")) start_episode_ = meta["episode"].get<int>();
    return meta;
}

void write_train_log(const std::string& path, const std::vector<TrainLogRow>& rows,
                     const std::string& header_comment) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write training log '" + path + "'");
    f << header_comment;
    f << "episode,return,critic1_loss,critic2_loss,actor_loss,q_loss,epsilon,"
         "sigma_explore,violations,wall_s\n";
    char buf[320];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf),
                      "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.3f\n", r.episode,
                      r.ret, r.critic1_loss, r.critic2_loss, r.actor_loss, r.q_loss,
                      r.epsilon, r.sigma_explore, r.violations, r.wall_s);
        f << buf;
    }
}

}  // namespace irsmec
