#ifndef IRSMEC_CHANNEL_HPP
#define IRSMEC_CHANNEL_HPP

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <random>
#include <vector>

#include "irsmec/config.hpp"

namespace irsmec {

using Vec2 = std::array<double, 2>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// One slot's channel realization: GU-BS direct (M x N), GU-IRS (K x N)
/// and IRS-BS (M x K).
struct ChannelState {
    CMat h_dir;
    CMat h_irs;
    CMat g;
    std::vector<Vec2> gu_positions;
};

/// IRS phase configuration; reflection amplitude is fixed at 1.
struct IrsPhase {
    Eigen::VectorXd theta;  // K angles in [0, 2*pi)

    CVec phasor() const {
        CVec v(theta.size());
        for (Eigen::Index k = 0; k < theta.size(); ++k)
            v[k] = std::polar(1.0, theta[k]);
        return v;
    }
};

double distance(const Vec2& a, const Vec2& b);

/// Free-space loss in dB: 20log10(d) + 20log10(f_c) + 20log10(4*pi/c)
/// plus the link-type excess loss. d must be positive.
double path_loss_db(double distance_m, double carrier_freq_hz, double extra_loss_db);

inline double db_to_gain(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

/// ULA steering vector [1, e^{-j*2*pi*(d0/lambda)*cos}, ...] of length n.
CVec steering(int n, double sep_over_lambda, double cosine);

/// Places N users uniformly (in area) in the annulus around the ring center.
std::vector<Vec2> place_users(const SystemConfig& cfg, std::mt19937_64& rng);

/// Draws one slot's small-scale fading on top of the large-scale gains.
/// The direct link is Rayleigh; both IRS hops are Rician with factor kappa.
/// Each link consumes only its own generator, so realizations stay aligned
/// across configs that differ in the other links' dimensions.
ChannelState sample_channels(const SystemConfig& cfg, const std::vector<Vec2>& positions,
                             std::mt19937_64& rng_dir, std::mt19937_64& rng_irs,
                             std::mt19937_64& rng_g);

/// Composite M x N uplink channel: column n = G diag(e^{j*theta}) h_irs_n + h_dir_n.
CMat composite_channel(const ChannelState& cs, const IrsPhase& phase);

}  // namespace irsmec

#endif
