#include "irsmec/rsma.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace irsmec {

namespace {

void check_bijection(const std::vector<int>& position, const char* what) {
    const int n = static_cast<int>(position.size());
    std::vector<bool> seen(n, false);
    for (int p : position) {
        if (p < 0 || p >= n || seen[p])
            throw std::invalid_argument(std::string(what) + ": not a permutation");
        seen[p] = true;
    }
}

}  // namespace

EffectiveGains effective_gains(const CMat& channels, const Beamformer& bf, double sigma2) {
    const int n = static_cast<int>(channels.cols());
    if (bf.w.rows() != channels.rows() || bf.w.cols() != n)
        throw std::invalid_argument("effective_gains: combiner/channel shape mismatch");
    EffectiveGains eg;
    eg.cross.resize(n, n);
    eg.noise.resize(n);
    for (int i = 0; i < n; ++i) {
        const double nrm2 = bf.w.col(i).squaredNorm();
        if (nrm2 <= 0.0)
            throw std::invalid_argument("effective_gains: combiner column has zero norm");
        eg.noise[i] = nrm2 * sigma2;
        for (int l = 0; l < n; ++l)
            eg.cross(i, l) = std::norm(bf.w.col(i).dot(channels.col(l)));
    }
    return eg;
}

Eigen::VectorXd sinr_public(const CMat& channels, const Beamformer& bf,
                            const TxAllocation& alloc, const DecodingOrder& order,
                            double sigma2) {
    const int n = static_cast<int>(channels.cols());
    check_bijection(order.position, "sinr_public order");
    const EffectiveGains eg = effective_gains(channels, bf, sigma2);
    const Eigen::VectorXd p_pub = alloc.public_power();
    const Eigen::VectorXd p_pri = alloc.private_power();

    Eigen::VectorXd sinr(n);
    for (int i = 0; i < n; ++i) {
        double den = eg.noise[i];
        for (int l = 0; l < n; ++l) {
            if (order.position[l] > order.position[i]) den += eg.cross(i, l) * p_pub[l];
            den += eg.cross(i, l) * p_pri[l];
        }
        sinr[i] = eg.cross(i, i) * p_pub[i] / den;
    }
    return sinr;
}

Eigen::VectorXd sinr_private(const CMat& channels, const Beamformer& bf,
                             const TxAllocation& alloc, double sigma2) {
    const int n = static_cast<int>(channels.cols());
    const EffectiveGains eg = effective_gains(channels, bf, sigma2);
    const Eigen::VectorXd p_pri = alloc.private_power();

    Eigen::VectorXd sinr(n);
    for (int i = 0; i < n; ++i) {
        double den = eg.noise[i];
        for (int l = 0; l < n; ++l)
            if (l != i) den += eg.cross(i, l) * p_pri[l];
        sinr[i] = eg.cross(i, i) * p_pri[i] / den;
    }
    return sinr;
}

Eigen::VectorXd rates_from_sinr(const Eigen::VectorXd& sinr, double bandwidth) {
    Eigen::VectorXd r(sinr.size());
    for (Eigen::Index i = 0; i < sinr.size(); ++i)
        r[i] = bandwidth * std::log2(1.0 + std::min(sinr[i], kSinrClamp));
    return r;
}

RatePair proposed_rsma_rates(const CMat& channels, const Beamformer& bf,
                             const TxAllocation& alloc, const DecodingOrder& order,
                             double bandwidth, double sigma2) {
    RatePair rp;
    rp.sinr_pub = sinr_public(channels, bf, alloc, order, sigma2);
    rp.sinr_pri = sinr_private(channels, bf, alloc, sigma2);
    rp.r_pub = rates_from_sinr(rp.sinr_pub, bandwidth);
    rp.r_pri = rates_from_sinr(rp.sinr_pri, bandwidth);
    return rp;
}

Eigen::VectorXd noma_rates(const CMat& channels, const Beamformer& bf,
                           const Eigen::VectorXd& p, const DecodingOrder& order,
                           double bandwidth, double sigma2) {
    const int n = static_cast<int>(channels.cols());
    check_bijection(order.position, "noma order");
    const EffectiveGains eg = effective_gains(channels, bf, sigma2);

    Eigen::VectorXd sinr(n);
    for (int i = 0; i < n; ++i) {
        double den = eg.noise[i];
        for (int l = 0; l < n; ++l)
            if (order.position[l] > order.position[i]) den += eg.cross(i, l) * p[l];
        sinr[i] = eg.cross(i, i) * p[i] / den;
    }
    return rates_from_sinr(sinr, bandwidth);
}

RatePair sic_rsma_rates(const CMat& channels, const Beamformer& bf,
                        const TxAllocation& alloc, const SubMessageOrder& full_order,
                        double bandwidth, double sigma2) {
    const int n = static_cast<int>(channels.cols());
    if (static_cast<int>(full_order.position.size()) != 2 * n)
        throw std::invalid_argument("sic_rsma_rates: order must cover 2N sub-messages");
    check_bijection(full_order.position, "sic_rsma order");
    const EffectiveGains eg = effective_gains(channels, bf, sigma2);
    const Eigen::VectorXd p_pub = alloc.public_power();
    const Eigen::VectorXd p_pri = alloc.private_power();

    auto user_of = [n](int s) { return s % n; };
    auto power_of = [&](int s) { return s < n ? p_pub[s] : p_pri[s - n]; };

    Eigen::VectorXd sinr(2 * n);
    for (int s = 0; s < 2 * n; ++s) {
        const int u = user_of(s);
        double den = eg.noise[u];
        for (int s2 = 0; s2 < 2 * n; ++s2)
            if (full_order.position[s2] > full_order.position[s])
                den += eg.cross(u, user_of(s2)) * power_of(s2);
        sinr[s] = eg.cross(u, u) * power_of(s) / den;
    }

    RatePair rp;
    rp.sinr_pub = sinr.head(n);
    rp.sinr_pri = sinr.tail(n);
    rp.r_pub = rates_from_sinr(rp.sinr_pub, bandwidth);
    rp.r_pri = rates_from_sinr(rp.sinr_pri, bandwidth);
    return rp;
}

SubMessageOrder default_sic_order(const CMat& channels, const Beamformer& bf) {
    const int n = static_cast<int>(channels.cols());
    Eigen::VectorXd own(n);
    for (int i = 0; i < n; ++i) own[i] = std::norm(bf.w.col(i).dot(channels.col(i)));

    std::vector<int> users(n);
    std::iota(users.begin(), users.end(), 0);
    std::stable_sort(users.begin(), users.end(),
                     [&](int a, int b) { return own[a] > own[b]; });

    SubMessageOrder order;
    order.position.assign(2 * n, 0);
    for (int slot = 0; slot < n; ++slot) {
        order.position[users[slot]] = slot;          // public stream
        order.position[n + users[slot]] = n + slot;  // private stream, same user order
    }
    return order;
}

long factorial(int n) {
    long f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

std::vector<DecodingOrder> enumerate_orders(int n_users) {
    if (n_users < 1 || n_users > kMaxEnumeratedUsers)
        throw std::invalid_argument("enumerate_orders: N must be in [1, 7]");
    std::vector<int> position(n_users);
    std::iota(position.begin(), position.end(), 0);
    std::vector<DecodingOrder> out;
    out.reserve(factorial(n_users));
    do {
        out.push_back(DecodingOrder{position});
    } while (std::next_permutation(position.begin(), position.end()));
    return out;
}

DecodingOrder index_to_order(long index, int n_users) {
    if (n_users < 1 || n_users > kMaxEnumeratedUsers)
        throw std::invalid_argument("index_to_order: N must be in [1, 7]");
    if (index < 0 || index >= factorial(n_users))
        throw std::invalid_argument("index_to_order: index out of range");
    // Factorial-number-system decode of the lexicographic rank.
    std::vector<int> pool(n_users);
    std::iota(pool.begin(), pool.end(), 0);
    DecodingOrder order;
    order.position.resize(n_users);
    for (int i = 0; i < n_users; ++i) {
        const long f = factorial(n_users - 1 - i);
        const long digit = index / f;
        index %= f;
        order.position[i] = pool[digit];
        pool.erase(pool.begin() + digit);
    }
    return order;
}

long order_to_index(const DecodingOrder& order) {
    const int n = order.users();
    if (n < 1 || n > kMaxEnumeratedUsers)
        throw std::invalid_argument("order_to_index: N must be in [1, 7]");
    check_bijection(order.position, "order_to_index");
    long index = 0;
    for (int i = 0; i < n; ++i) {
        long smaller_later = 0;
        for (int j = i + 1; j < n; ++j)
            if (order.position[j] < order.position[i]) ++smaller_later;
        index += smaller_later * factorial(n - 1 - i);
    }
    return index;
}

}  // namespace irsmec
