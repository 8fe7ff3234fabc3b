#include "irsmec/mec.hpp"

#include <stdexcept>

namespace irsmec {

TaskBatch sample_tasks(const SystemConfig& cfg, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(cfg.task_bits_range[0],
                                               cfg.task_bits_range[1]);
    TaskBatch batch;
    batch.bits.resize(cfg.n_users);
    for (int n = 0; n < cfg.n_users; ++n) batch.bits[n] = uni(rng);
    return batch;
}

Eigen::VectorXd assign_rho(const Eigen::VectorXd& bits, const Eigen::VectorXd& beta,
                           RhoPolicy policy) {
    const Eigen::Index n = bits.size();
    if (policy == RhoPolicy::Equal)
        return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    const Eigen::VectorXd work = beta.cwiseProduct(bits);
    const double total = work.sum();
    if (total <= 0.0) return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    return work / total;
}

Eigen::VectorXd local_delay(const Eigen::VectorXd& bits, const Eigen::VectorXd& beta,
                            double f_gu, double c_gu) {
    if (!(f_gu > 0.0)) throw std::invalid_argument("local_delay: f_gu must be positive");
    return (Eigen::VectorXd::Ones(bits.size()) - beta)
        .cwiseProduct(bits)
        .cwiseProduct(Eigen::VectorXd::Constant(bits.size(), c_gu / f_gu));
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> offload_volumes(const Eigen::VectorXd& bits,
                                                            const Eigen::VectorXd& beta,
                                                            const Eigen::VectorXd& eta) {
    const Eigen::VectorXd offloaded = beta.cwiseProduct(bits);
    return {offloaded.cwiseProduct(eta),
            offloaded.cwiseProduct(Eigen::VectorXd::Ones(eta.size()) - eta)};
}

Eigen::VectorXd trans_delay(const Eigen::VectorXd& pub_bits, const Eigen::VectorXd& pri_bits,
                            const RatePair& rates, double delay_cap) {
    const Eigen::Index n = pub_bits.size();
    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double d = 0.0;
        bool infeasible = false;
        if (pub_bits[i] > 0.0) {
            if (rates.r_pub[i] > 0.0)
                d += pub_bits[i] / rates.r_pub[i];
            else
                infeasible = true;
        }
        if (pri_bits[i] > 0.0) {
            if (rates.r_pri[i] > 0.0)
                d += pri_bits[i] / rates.r_pri[i];
            else
                infeasible = true;
        }
        t[i] = infeasible ? delay_cap : std::min(d, delay_cap);
    }
    return t;
}

Eigen::VectorXd mec_delay(const Eigen::VectorXd& bits, const Eigen::VectorXd& beta,
                          const Eigen::VectorXd& rho_mec, double f_mec, double c_mec,
                          double delay_cap) {
    const Eigen::Index n = bits.size();
    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double offloaded = beta[i] * bits[i];
        if (offloaded <= 0.0) {
            t[i] = 0.0;
        } else if (rho_mec[i] <= 0.0) {
            t[i] = delay_cap;
        } else {
            t[i] = std::min(offloaded * c_mec / (rho_mec[i] * f_mec), delay_cap);
        }
    }
    return t;
}

DelayReport total_delay(const Eigen::VectorXd& t_local, const Eigen::VectorXd& t_trans,
                        const Eigen::VectorXd& t_mec, double tau) {
    const Eigen::Index n = t_local.size();
    if (t_trans.size() != n || t_mec.size() != n)
        throw std::invalid_argument("total_delay: component length mismatch");
    DelayReport rep;
    rep.t_local = t_local;
    rep.t_trans = t_trans;
    rep.t_mec = t_mec;
    rep.t_total = t_local.cwiseMax(t_trans + t_mec);
    rep.avg = rep.t_total.mean();
    rep.deadline_violations = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (rep.t_total[i] > tau) ++rep.deadline_violations;
    return rep;
}

}  // namespace irsmec
