#ifndef IRSMEC_RSMA_HPP
#define IRSMEC_RSMA_HPP

#include <Eigen/Dense>
#include <vector>

#include "irsmec/channel.hpp"

namespace irsmec {

/// Per-user transmit power and the public/private power split.
struct TxAllocation {
    Eigen::VectorXd p;      // watts, 0 <= p_n <= p_max
    Eigen::VectorXd gamma;  // split in [0,1]; gamma*p public, (1-gamma)*p private

    Eigen::VectorXd public_power() const { return gamma.cwiseProduct(p); }
    Eigen::VectorXd private_power() const {
        return (Eigen::VectorXd::Ones(gamma.size()) - gamma).cwiseProduct(p);
    }
};

/// BS receive combiners; column n recovers user n.
struct Beamformer {
    CMat w;  // M x N
};

/// position[n] is the decode slot of user n's public sub-message
/// (0-based; smaller decodes earlier).
struct DecodingOrder {
    std::vector<int> position;

    int users() const { return static_cast<int>(position.size()); }
};

/// Public/private SINRs and the corresponding achievable rates.
struct RatePair {
    Eigen::VectorXd sinr_pub, sinr_pri;  // linear
    Eigen::VectorXd r_pub, r_pri;        // bits/s
};

/// SINR values are clamped here to keep log2 finite under extreme inputs.
inline constexpr double kSinrClamp = 1e12;

/// |w_n^H H_l|^2 for all (n,l) plus the combined noise ||w_n||^2 sigma^2.
/// Throws if any combiner column has zero norm.
struct EffectiveGains {
    Eigen::MatrixXd cross;  // cross(n,l) = |w_n^H H_l|^2
    Eigen::VectorXd noise;  // ||w_n||^2 * sigma2
};
EffectiveGains effective_gains(const CMat& channels, const Beamformer& bf, double sigma2);

/// Public-message SINRs of the partial-decoding uplink chain: publics are
/// SIC-decoded in the given order; later publics and every private stream
/// (own included) are interference.
Eigen::VectorXd sinr_public(const CMat& channels, const Beamformer& bf,
                            const TxAllocation& alloc, const DecodingOrder& order,
                            double sigma2);

/// Private-message SINRs: all publics are already cancelled; other users'
/// private streams are noise.
Eigen::VectorXd sinr_private(const CMat& channels, const Beamformer& bf,
                             const TxAllocation& alloc, double sigma2);

/// Shannon rates B*log2(1+sinr) componentwise (sinr clamped at kSinrClamp).
Eigen::VectorXd rates_from_sinr(const Eigen::VectorXd& sinr, double bandwidth);

RatePair proposed_rsma_rates(const CMat& channels, const Beamformer& bf,
                             const TxAllocation& alloc, const DecodingOrder& order,
                             double bandwidth, double sigma2);

/// Single-message SIC chain (no splitting): full power per user, decoded in
/// the given order.
Eigen::VectorXd noma_rates(const CMat& channels, const Beamformer& bf,
                           const Eigen::VectorXd& p, const DecodingOrder& order,
                           double bandwidth, double sigma2);

/// Identifies one of the 2N sub-messages of the conventional full-SIC chain.
/// Streams 0..N-1 are the public messages, N..2N-1 the private ones.
struct SubMessageOrder {
    std::vector<int> position;  // position[s] = decode slot of stream s, bijection on 2N
};

/// Conventional SIC-RSMA: every sub-message is SIC-decoded in full_order;
/// a stream's interference is every stream decoded after it.
RatePair sic_rsma_rates(const CMat& channels, const Beamformer& bf,
                        const TxAllocation& alloc, const SubMessageOrder& full_order,
                        double bandwidth, double sigma2);

/// Default SIC-RSMA stream order: publics first sorted by descending
/// effective gain |w_n^H H_n|^2, then privates in the same user order.
SubMessageOrder default_sic_order(const CMat& channels, const Beamformer& bf);

// ---- decoding-order enumeration (stable index <-> permutation map) ----

inline constexpr int kMaxEnumeratedUsers = 7;

long factorial(int n);

/// All N! orders, lexicographically sorted by position vector; the list
/// index of each order equals order_to_index(order).
std::vector<DecodingOrder> enumerate_orders(int n_users);

DecodingOrder index_to_order(long index, int n_users);
long order_to_index(const DecodingOrder& order);

}  // namespace irsmec

#endif
