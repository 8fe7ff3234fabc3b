#include "irsmec/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace irsmec {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

/// Standard CN(0,1): independent real/imag parts with variance 1/2 each.
std::complex<double> cn01(std::mt19937_64& rng) {
    static constexpr double kInvSqrt2 = 0.70710678118654752440;
    std::normal_distribution<double> n01(0.0, 1.0);
    double re = n01(rng);
    double im = n01(rng);
    return {re * kInvSqrt2, im * kInvSqrt2};
}

}  // namespace

double distance(const Vec2& a, const Vec2& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double path_loss_db(double distance_m, double carrier_freq_hz, double extra_loss_db) {
    if (!(distance_m > 0.0))
        throw std::invalid_argument("path_loss_db: distance must be positive");
    return 20.0 * std::log10(distance_m) + 20.0 * std::log10(carrier_freq_hz) +
           20.0 * std::log10(4.0 * std::numbers::pi / kSpeedOfLight) + extra_loss_db;
}

CVec steering(int n, double sep_over_lambda, double cosine) {
    CVec v(n);
    const double step = -2.0 * std::numbers::pi * sep_over_lambda * cosine;
    for (int i = 0; i < n; ++i) v[i] = std::polar(1.0, step * i);
    return v;
}

std::vector<Vec2> place_users(const SystemConfig& cfg, std::mt19937_64& rng) {
    const double r0 = cfg.gu_ring_radii[0];
    const double r1 = cfg.gu_ring_radii[1];
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<Vec2> pos(cfg.n_users);
    for (int n = 0; n < cfg.n_users; ++n) {
        // Inverse-CDF radius draw: uniform density in area over the annulus.
        const double u = uni(rng);
        const double r = std::sqrt(r0 * r0 + u * (r1 * r1 - r0 * r0));
        const double ang = 2.0 * std::numbers::pi * uni(rng);
        pos[n] = {cfg.gu_ring_center[0] + r * std::cos(ang),
                  cfg.gu_ring_center[1] + r * std::sin(ang)};
    }
    return pos;
}

ChannelState sample_channels(const SystemConfig& cfg, const std::vector<Vec2>& positions,
                             std::mt19937_64& rng_dir, std::mt19937_64& rng_irs,
                             std::mt19937_64& rng_g) {
    const int m = cfg.m_antennas;
    const int n_users = cfg.n_users;
    const int k = cfg.k_irs;
    if (static_cast<int>(positions.size()) != n_users)
        throw std::invalid_argument("sample_channels: positions/user-count mismatch");

    const double kappa = cfg.rician_kappa;
    const double w_los = std::sqrt(kappa / (1.0 + kappa));
    const double w_nlos = std::sqrt(1.0 / (1.0 + kappa));
    const double sep = cfg.antenna_sep_m() * cfg.carrier_freq / kSpeedOfLight;

    ChannelState cs;
    cs.gu_positions = positions;
    cs.h_dir.resize(m, n_users);
    cs.h_irs.resize(k, n_users);
    cs.g.resize(m, k);

    // GU-BS direct: Rayleigh with the NLoS excess loss.
    for (int n = 0; n < n_users; ++n) {
        const double d = distance(positions[n], cfg.bs_pos);
        const double amp =
            std::sqrt(db_to_gain(path_loss_db(d, cfg.carrier_freq, cfg.loss_nlos_db)));
        for (int i = 0; i < m; ++i) cs.h_dir(i, n) = amp * cn01(rng_dir);
    }

    // GU-IRS: Rician, LoS steering along the departure cosine.
    for (int n = 0; n < n_users; ++n) {
        const double d = distance(positions[n], cfg.irs_pos);
        const double amp =
            std::sqrt(db_to_gain(path_loss_db(d, cfg.carrier_freq, cfg.loss_los_db)));
        const double cosine = (cfg.irs_pos[0] - positions[n][0]) / d;
        const CVec los = steering(k, sep, cosine);
        for (int i = 0; i < k; ++i)
            cs.h_irs(i, n) = amp * (w_los * los[i] + w_nlos * cn01(rng_irs));
    }

    // IRS-BS: Rician; rank-one LoS from the BS arrival and IRS departure cosines.
    {
        const double d = distance(cfg.irs_pos, cfg.bs_pos);
        const double amp =
            std::sqrt(db_to_gain(path_loss_db(d, cfg.carrier_freq, cfg.loss_los_db)));
        const double cos_arr = (cfg.irs_pos[0] - cfg.bs_pos[0]) / d;
        const double cos_dep = (cfg.bs_pos[0] - cfg.irs_pos[0]) / d;
        const CVec a_bs = steering(m, sep, cos_arr);
        const CVec a_irs = steering(k, sep, cos_dep);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < k; ++j)
                cs.g(i, j) = amp * (w_los * a_bs[i] * a_irs[j] + w_nlos * cn01(rng_g));
    }
    return cs;
}

CMat composite_channel(const ChannelState& cs, const IrsPhase& phase) {
    if (phase.theta.size() != cs.h_irs.rows() || cs.g.cols() != cs.h_irs.rows() ||
        cs.g.rows() != cs.h_dir.rows() || cs.h_irs.cols() != cs.h_dir.cols())
        throw std::invalid_argument("composite_channel: dimension mismatch");
    return cs.g * phase.phasor().asDiagonal() * cs.h_irs + cs.h_dir;
}

}  // namespace irsmec
