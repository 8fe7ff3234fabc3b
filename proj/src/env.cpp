#include "irsmec/env.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace irsmec {

StateTensors build_state(const ChannelState& cs) {
    StateTensors st;
    st.dir_re = cs.h_dir.real();
    st.dir_im = cs.h_dir.imag();
    st.irs_re = cs.h_irs.real();
    st.irs_im = cs.h_irs.imag();
    st.g_re = cs.g.real();
    st.g_im = cs.g.imag();
    return st;
}

ChannelState reconstruct_channels(const StateTensors& st) {
    ChannelState cs;
    const std::complex<double> j(0.0, 1.0);
    cs.h_dir = st.dir_re.cast<std::complex<double>>() + j * st.dir_im.cast<std::complex<double>>();
    cs.h_irs = st.irs_re.cast<std::complex<double>>() + j * st.irs_im.cast<std::complex<double>>();
    cs.g = st.g_re.cast<std::complex<double>>() + j * st.g_im.cast<std::complex<double>>();
    return cs;
}

namespace {

void pack_planes(const Eigen::MatrixXd& re, const Eigen::MatrixXd& im, double scale,
                 std::vector<float>& out) {
    const auto plane = static_cast<std::size_t>(re.size());
    out.resize(2 * plane);
    const double inv = 1.0 / scale;
    for (std::size_t i = 0; i < plane; ++i) out[i] = static_cast<float>(re.data()[i] * inv);
    for (std::size_t i = 0; i < plane; ++i)
        out[plane + i] = static_cast<float>(im.data()[i] * inv);
}

double tensor_rms_acc(const Eigen::MatrixXd& re, const Eigen::MatrixXd& im) {
    return re.squaredNorm() + im.squaredNorm();
}

}  // namespace

EncodedState encode_state(const StateTensors& st, const StateScales& sc) {
    EncodedState es;
    pack_planes(st.dir_re, st.dir_im, sc.dir, es.dir);
    pack_planes(st.irs_re, st.irs_im, sc.irs, es.irs);
    pack_planes(st.g_re, st.g_im, sc.g, es.g);
    return es;
}

ContinuousAction decode_action(const Eigen::VectorXd& raw, const SystemConfig& sys,
                               const EnvConfig& env) {
    const int n = sys.n_users, m = sys.m_antennas, k = sys.k_irs;
    if (raw.size() != sys.cont_action_dim(env.include_power_action))
        throw std::invalid_argument("decode_action: raw vector has wrong length");

    auto unit = [](double x) { return (x + 1.0) / 2.0; };

    ContinuousAction act;
    act.beta = raw.segment(0, n).unaryExpr(unit);
    act.eta = raw.segment(n, n).unaryExpr(unit);
    act.gamma = raw.segment(2 * n, n).unaryExpr(unit);

    act.phase.theta.resize(k);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < k; ++i) {
        double th = std::numbers::pi * (raw[3 * n + i] + 1.0);
        if (th >= two_pi) th -= two_pi;
        act.phase.theta[i] = th;
    }

    act.combiner.w.resize(m, n);
    const int w0 = 3 * n + k;
    for (int u = 0; u < n; ++u) {
        CVec col(m);
        for (int i = 0; i < m; ++i)
            col[i] = std::complex<double>(raw[w0 + u * 2 * m + i], raw[w0 + u * 2 * m + m + i]);
        const double nrm = col.norm();
        if (nrm < 1e-9)
            act.combiner.w.col(u) = CVec::Constant(m, 1.0 / std::sqrt(double(m)));
        else
            act.combiner.w.col(u) = col / nrm;
    }

    if (env.include_power_action) {
        const int p0 = w0 + 2 * m * n;
        act.p = raw.segment(p0, n).unaryExpr(unit) * sys.p_max;
    } else {
        act.p = Eigen::VectorXd::Constant(n, sys.p_max);
    }
    return act;
}

namespace {

SubMessageOrder sic_order_by_rule(const CMat& channels, const Beamformer& bf,
                                  const std::string& rule) {
    const int n = static_cast<int>(channels.cols());
    if (rule == "gain_desc") return default_sic_order(channels, bf);
    SubMessageOrder order;
    order.position.resize(2 * n);
    if (rule == "sequential") {
        for (int u = 0; u < n; ++u) {
            order.position[u] = u;
            order.position[n + u] = n + u;
        }
        return order;
    }
    if (rule == "gain_asc") {
        SubMessageOrder desc = default_sic_order(channels, bf);
        for (int s = 0; s < n; ++s) {
            order.position[s] = n - 1 - desc.position[s];
            order.position[n + s] = 2 * n - 1 - desc.position[n + s] + n;
        }
        return order;
    }
    throw std::invalid_argument("unknown sic_order_rule '" + rule + "'");
}

}  // namespace

SlotOutcome evaluate_slot(const SystemConfig& sys, const EnvConfig& env,
                          const ChannelState& cs, const TaskBatch& tasks,
                          const ContinuousAction& act, const DecodingOrder& order,
                          const std::string& sic_order_rule) {
    const int n = sys.n_users;
    const CMat channels = composite_channel(cs, act.phase);

    TxAllocation alloc{act.p, act.gamma};
    Eigen::VectorXd eta = act.eta;

    RatePair rates;
    long order_index = -1;
    switch (env.scheme) {
        case AccessScheme::Proposed:
            rates = proposed_rsma_rates(channels, act.combiner, alloc, order,
                                        sys.bandwidth, sys.noise_power);
            order_index = order_to_index(order);
            break;
        case AccessScheme::SicRsma: {
            const SubMessageOrder full =
                sic_order_by_rule(channels, act.combiner, sic_order_rule);
            rates = sic_rsma_rates(channels, act.combiner, alloc, full, sys.bandwidth,
                                   sys.noise_power);
            break;
        }
        case AccessScheme::Noma: {
            // Single-message chain: all power and all offloaded bits public.
            alloc.gamma = Eigen::VectorXd::Ones(n);
            eta = Eigen::VectorXd::Ones(n);
            rates.r_pub = noma_rates(channels, act.combiner, alloc.p, order,
                                     sys.bandwidth, sys.noise_power);
            rates.r_pri = Eigen::VectorXd::Zero(n);
            rates.sinr_pub = rates.sinr_pri = Eigen::VectorXd::Zero(n);
            order_index = order_to_index(order);
            break;
        }
    }

    const double cap = sys.delay_cap();
    const Eigen::VectorXd t_loc = local_delay(tasks.bits, act.beta, sys.f_gu, sys.c_gu);
    const auto [pub_bits, pri_bits] = offload_volumes(tasks.bits, act.beta, eta);
    const Eigen::VectorXd t_tr = trans_delay(pub_bits, pri_bits, rates, cap);
    const Eigen::VectorXd rho = assign_rho(tasks.bits, act.beta, env.rho_policy);
    const Eigen::VectorXd t_mec = mec_delay(tasks.bits, act.beta, rho, sys.f_mec,
                                            sys.c_mec, cap);

    SlotOutcome out;
    out.report = total_delay(t_loc, t_tr, t_mec, sys.slot_duration);
    out.reward = -out.report.avg -
                 env.lambda_penalty * out.report.deadline_violations / static_cast<double>(n);
    out.order_index = order_index;
    return out;
}

long exhaustive_best_order(const SystemConfig& sys, const EnvConfig& env,
                           const ChannelState& cs, const TaskBatch& tasks,
                           const ContinuousAction& act) {
    const long count = factorial(sys.n_users);
    long best = 0;
    double best_avg = std::numeric_limits<double>::infinity();
    for (long i = 0; i < count; ++i) {
        const DecodingOrder order = index_to_order(i, sys.n_users);
        const SlotOutcome o = evaluate_slot(sys, env, cs, tasks, act, order);
        if (o.report.avg < best_avg) {
            best_avg = o.report.avg;
            best = i;
        }
    }
    return best;
}

Environment::Environment(const SystemConfig& sys, const EnvConfig& env,
                         const StateScales& scales, std::string sic_order_rule)
    : sys_(sys), env_(env), scales_(scales), sic_order_rule_(std::move(sic_order_rule)) {
    sys_.validate();
}

StateScales Environment::compute_scales(const SystemConfig& sys, const EnvConfig& env,
                                        int samples) {
    auto rng_place = make_rng(sys.rng_seed, Stream::StateScale, 0);
    auto rng_dir = make_rng(sys.rng_seed, Stream::StateScale, 1);
    auto rng_irs = make_rng(sys.rng_seed, Stream::StateScale, 2);
    auto rng_g = make_rng(sys.rng_seed, Stream::StateScale, 3);
    double acc_dir = 0, acc_irs = 0, acc_g = 0;
    std::size_t n_dir = 0, n_irs = 0, n_g = 0;
    for (int s = 0; s < samples; ++s) {
        const auto pos = place_users(sys, rng_place);
        ChannelState cs = sample_channels(sys, pos, rng_dir, rng_irs, rng_g);
        if (env.mask_direct) cs.h_dir.setZero();
        if (env.mask_irs) cs.g.setZero();
        const StateTensors st = build_state(cs);
        acc_dir += tensor_rms_acc(st.dir_re, st.dir_im);
        acc_irs += tensor_rms_acc(st.irs_re, st.irs_im);
        acc_g += tensor_rms_acc(st.g_re, st.g_im);
        n_dir += 2 * st.dir_re.size();
        n_irs += 2 * st.irs_re.size();
        n_g += 2 * st.g_re.size();
    }
    auto rms = [](double acc, std::size_t n) {
        const double r = std::sqrt(acc / static_cast<double>(n));
        return r > 1e-300 ? r : 1.0;  // masked tensors are all-zero
    };
    return StateScales{rms(acc_dir, n_dir), rms(acc_irs, n_irs), rms(acc_g, n_g)};
}

void Environment::reset(std::uint64_t episode_seed) {
    rng_place_ = make_rng(episode_seed, Stream::Placement);
    rng_dir_ = make_rng(episode_seed, Stream::DirectFading);
    rng_irs_ = make_rng(episode_seed, Stream::IrsFading);
    rng_g_ = make_rng(episode_seed, Stream::BsIrsFading);
    rng_tasks_ = make_rng(episode_seed, Stream::Tasks);
    positions_ = place_users(sys_, rng_place_);
    t_ = 1;
    sample_slot();
}

void Environment::sample_slot() {
    cs_ = sample_channels(sys_, positions_, rng_dir_, rng_irs_, rng_g_);
    if (env_.mask_direct) cs_.h_dir.setZero();
    if (env_.mask_irs) cs_.g.setZero();
    tasks_ = sample_tasks(sys_, rng_tasks_);
    encoded_ = encode_state(build_state(cs_), scales_);
}

Environment::StepResult Environment::step(const Eigen::VectorXd& raw_action,
                                          long order_index) {
    return step_action(decode_action(raw_action, sys_, env_), order_index);
}

Environment::StepResult Environment::step_action(const ContinuousAction& act,
                                                 long order_index) {
    if (t_ < 1) throw std::logic_error("Environment::step before reset");
    const DecodingOrder order = index_to_order(order_index, sys_.n_users);
    const SlotOutcome outcome =
        evaluate_slot(sys_, env_, cs_, tasks_, act, order, sic_order_rule_);

    StepResult res;
    res.report = outcome.report;
    res.reward = outcome.reward;
    res.order_index = outcome.order_index;
    res.done = (t_ >= sys_.slots);
    ++t_;
    sample_slot();
    return res;
}

}  // namespace irsmec
