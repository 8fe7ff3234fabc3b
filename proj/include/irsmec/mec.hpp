#ifndef IRSMEC_MEC_HPP
#define IRSMEC_MEC_HPP

#include <Eigen/Dense>
#include <random>

#include "irsmec/config.hpp"
#include "irsmec/rsma.hpp"

namespace irsmec {

/// Per-user task sizes for one slot, in bits.
struct TaskBatch {
    Eigen::VectorXd bits;
};

/// Offloading split for one slot: beta offloads, eta splits offloaded bits
/// into public/private, rho_mec shares the edge CPU.
struct OffloadDecision {
    Eigen::VectorXd beta;     // [0,1]
    Eigen::VectorXd eta;      // [0,1]
    Eigen::VectorXd rho_mec;  // (0,1], sums to <= 1
};

/// The three delay components and their max-composition per user.
struct DelayReport {
    Eigen::VectorXd t_local, t_trans, t_mec, t_total;  // seconds
    double avg = 0.0;
    int deadline_violations = 0;
};

TaskBatch sample_tasks(const SystemConfig& cfg, std::mt19937_64& rng);

/// Edge-CPU share per the configured policy. Proportional assigns shares
/// by offloaded work (summing to exactly 1); equal gives 1/N each.
Eigen::VectorXd assign_rho(const Eigen::VectorXd& bits, const Eigen::VectorXd& beta,
                           RhoPolicy policy);

/// (1-beta)*bits*c_gu / f_gu per user.
Eigen::VectorXd local_delay(const Eigen::VectorXd& bits, const Eigen::VectorXd& beta,
                            double f_gu, double c_gu);

/// Splits offloaded bits: pub = beta*bits*eta, pri = beta*bits*(1-eta).
std::pair<Eigen::VectorXd, Eigen::VectorXd> offload_volumes(const Eigen::VectorXd& bits,
                                                            const Eigen::VectorXd& beta,
                                                            const Eigen::VectorXd& eta);

/// pub/r_pub + pri/r_pri with 0/0 := 0; a positive volume over a zero rate
/// yields delay_cap, and finite results are clamped at delay_cap as well.
Eigen::VectorXd trans_delay(const Eigen::VectorXd& pub_bits, const Eigen::VectorXd& pri_bits,
                            const RatePair& rates, double delay_cap);

/// beta*bits*c_mec / (rho*f_mec); zero share with positive offload yields
/// delay_cap.
Eigen::VectorXd mec_delay(const Eigen::VectorXd& bits, const Eigen::VectorXd& beta,
                          const Eigen::VectorXd& rho_mec, double f_mec, double c_mec,
                          double delay_cap);

/// Per-user max of the local and offloading paths, the slot average, and
/// the count of users missing the slot deadline.
DelayReport total_delay(const Eigen::VectorXd& t_local, const Eigen::VectorXd& t_trans,
                        const Eigen::VectorXd& t_mec, double tau);

}  // namespace irsmec

#endif
