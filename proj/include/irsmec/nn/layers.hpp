#ifndef IRSMEC_NN_LAYERS_HPP
#define IRSMEC_NN_LAYERS_HPP

#include <cmath>
#include <random>

#include "irsmec/nn/tensor.hpp"

namespace irsmec::nn {

/// Forward-pass behaviour of the stateful layers.
struct ForwardMode {
    bool batch_stats = false;     // normalization from the batch vs frozen stats
    bool update_running = false;  // fold batch stats into the running estimate
};

inline constexpr ForwardMode kEval{false, false};
inline constexpr ForwardMode kTrain{true, true};
inline constexpr ForwardMode kTrainNoUpdate{true, false};

template <class S, class Rng>
Mat<S> fan_in_uniform(int rows, int cols, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> uni(-bound, bound);
    Mat<S> m(rows, cols);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<S>(uni(rng));
    return m;
}

/// Valid-padding, stride-1 cross-correlation. The kernel is stored with one
/// column per output channel; within a column, channel c's kh x kw filter
/// occupies the contiguous segment [c*kh*kw, (c+1)*kh*kw) in column-major
/// (row index fastest) element order.
template <class S>
class Conv2d {
public:
    Conv2d() = default;

    template <class Rng>
    Conv2d(int in_channels, int out_channels, int kh, int kw, Rng& rng)
        : ci_(in_channels), co_(out_channels), kh_(kh), kw_(kw) {
        kernel_ = fan_in_uniform<S>(ci_ * kh_ * kw_, co_, ci_ * kh_ * kw_, rng);
        bias_ = Mat<S>::Zero(1, co_);
        g_kernel_ = Mat<S>::Zero(kernel_.rows(), kernel_.cols());
        g_bias_ = Mat<S>::Zero(1, co_);
    }

    PlaneBatch<S> forward(const PlaneBatch<S>& in) {
        if (in.channels != ci_) throw std::invalid_argument("conv: channel mismatch");
        if (in.rows < kh_ || in.cols < kw_)
            throw std::invalid_argument("conv: kernel larger than input");
        cache_ = in;
        const int oh = in.rows - kh_ + 1, ow = in.cols - kw_ + 1;
        PlaneBatch<S> out(in.batch, co_, oh, ow);
        for (int b = 0; b < in.batch; ++b)
            for (int o = 0; o < co_; ++o) {
                Mat<S>& dst = out.at(b, o);
                dst.setConstant(bias_(0, o));
                for (int c = 0; c < ci_; ++c) {
                    const auto w = filter(kernel_, o, c);
                    const Mat<S>& src = in.at(b, c);
                    for (int y = 0; y < oh; ++y)
                        for (int x = 0; x < ow; ++x)
                            dst(y, x) += (src.block(y, x, kh_, kw_).cwiseProduct(w)).sum();
                }
            }
        return out;
    }

    PlaneBatch<S> backward(const PlaneBatch<S>& gout) {
        const PlaneBatch<S>& in = cache_;
        const int oh = gout.rows, ow = gout.cols;
        PlaneBatch<S> gin(in.batch, ci_, in.rows, in.cols);
        for (int b = 0; b < in.batch; ++b)
            for (int o = 0; o < co_; ++o) {
                const Mat<S>& go = gout.at(b, o);
                g_bias_(0, o) += go.sum();
                for (int c = 0; c < ci_; ++c) {
                    auto gw = filter(g_kernel_, o, c);
                    const auto w = filter(kernel_, o, c);
                    const Mat<S>& src = in.at(b, c);
                    Mat<S>& gi = gin.at(b, c);
                    for (int y = 0; y < oh; ++y)
                        for (int x = 0; x < ow; ++x) {
                            const S g = go(y, x);
                            gw += g * src.block(y, x, kh_, kw_);
                            gi.block(y, x, kh_, kw_) += g * w;
                        }
                }
            }
        return gin;
    }

    void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
        reg.push_back({prefix + ".w", {co_, ci_, kh_, kw_}, &kernel_, &g_kernel_, true});
        reg.push_back({prefix + ".b", {co_}, &bias_, &g_bias_, true});
    }

private:
    // kh x kw view of one (out, in) filter inside the packed kernel matrix.
    Eigen::Map<Mat<S>> filter(Mat<S>& k, int o, int c) {
        return Eigen::Map<Mat<S>>(k.col(o).data() + c * kh_ * kw_, kh_, kw_);
    }
    Eigen::Map<const Mat<S>> filter(const Mat<S>& k, int o, int c) const {
        return Eigen::Map<const Mat<S>>(k.col(o).data() + c * kh_ * kw_, kh_, kw_);
    }

    int ci_ = 0, co_ = 0, kh_ = 0, kw_ = 0;
    Mat<S> kernel_, bias_, g_kernel_, g_bias_;
    PlaneBatch<S> cache_;
};

/// Per-channel batch normalization over (batch, rows, cols) with running
/// statistics for frozen-stats evaluation.
template <class S>
class BatchNorm2d {
public:
    BatchNorm2d() = default;

    explicit BatchNorm2d(int channels, S momentum = static_cast<S>(0.1))
        : c_(channels), momentum_(momentum) {
        gamma_ = Mat<S>::Ones(1, c_);
        beta_ = Mat<S>::Zero(1, c_);
        run_mean_ = Mat<S>::Zero(1, c_);
        run_var_ = Mat<S>::Ones(1, c_);
        g_gamma_ = Mat<S>::Zero(1, c_);
        g_beta_ = Mat<S>::Zero(1, c_);
    }

    PlaneBatch<S> forward(const PlaneBatch<S>& in, ForwardMode mode) {
        if (in.channels != c_) throw std::invalid_argument("batchnorm: channel mismatch");
        batch_stats_ = mode.batch_stats;
        const S count = static_cast<S>(in.batch) * in.rows * in.cols;
        mean_.resize(c_);
        inv_std_.resize(c_);
        for (int c = 0; c < c_; ++c) {
            S mean, var;
            if (mode.batch_stats) {
                S sum = 0;
                for (int b = 0; b < in.batch; ++b) sum += in.at(b, c).sum();
                mean = sum / count;
                S sq = 0;
                for (int b = 0; b < in.batch; ++b)
                    sq += (in.at(b, c).array() - mean).square().sum();
                var = sq / count;
                if (mode.update_running) {
                    run_mean_(0, c) = (1 - momentum_) * run_mean_(0, c) + momentum_ * mean;
                    run_var_(0, c) = (1 - momentum_) * run_var_(0, c) + momentum_ * var;
                }
            } else {
                mean = run_mean_(0, c);
                var = run_var_(0, c);
            }
            mean_[c] = mean;
            inv_std_[c] = static_cast<S>(1) / std::sqrt(var + eps_);
        }
        xhat_.resize(in.batch, c_, in.rows, in.cols);
        PlaneBatch<S> out(in.batch, c_, in.rows, in.cols);
        for (int b = 0; b < in.batch; ++b)
            for (int c = 0; c < c_; ++c) {
                xhat_.at(b, c) = (in.at(b, c).array() - mean_[c]).matrix() * inv_std_[c];
                out.at(b, c) = gamma_(0, c) * xhat_.at(b, c).array() + beta_(0, c);
            }
        return out;
    }

    PlaneBatch<S> backward(const PlaneBatch<S>& gout) {
        const int nb = gout.batch;
        const S count = static_cast<S>(nb) * gout.rows * gout.cols;
        PlaneBatch<S> gin(nb, c_, gout.rows, gout.cols);
        for (int c = 0; c < c_; ++c) {
            S sum_g = 0, sum_gx = 0;
            for (int b = 0; b < nb; ++b) {
                sum_g += gout.at(b, c).sum();
                sum_gx += gout.at(b, c).cwiseProduct(xhat_.at(b, c)).sum();
            }
            g_beta_(0, c) += sum_g;
            g_gamma_(0, c) += sum_gx;
            const S scale = gamma_(0, c) * inv_std_[c];
            for (int b = 0; b < nb; ++b) {
                if (batch_stats_) {
                    // d/dx of (x - mean)/std with mean and var from the batch.
                    gin.at(b, c) = scale / count *
                                   (count * gout.at(b, c).array() - sum_g -
                                    xhat_.at(b, c).array() * sum_gx)
                                       .matrix();
                } else {
                    gin.at(b, c) = scale * gout.at(b, c);
                }
            }
        }
        return gin;
    }

    void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
        reg.push_back({prefix + ".gamma", {c_}, &gamma_, &g_gamma_, true});
        reg.push_back({prefix + ".beta", {c_}, &beta_, &g_beta_, true});
        reg.push_back({prefix + ".running_mean", {c_}, &run_mean_, nullptr, false});
        reg.push_back({prefix + ".running_var", {c_}, &run_var_, nullptr, false});
    }

private:
    int c_ = 0;
    S momentum_ = static_cast<S>(0.1);
    S eps_ = static_cast<S>(1e-5);
    Mat<S> gamma_, beta_, run_mean_, run_var_, g_gamma_, g_beta_;
    PlaneBatch<S> xhat_;
    std::vector<S> mean_, inv_std_;
    bool batch_stats_ = false;
};

template <class S>
class ReluPlanes {
public:
    PlaneBatch<S> forward(const PlaneBatch<S>& in) {
        cache_ = in;
        PlaneBatch<S> out = in;
        for (auto& m : out.p) m = m.cwiseMax(static_cast<S>(0));
        return out;
    }
    PlaneBatch<S> backward(const PlaneBatch<S>& gout) {
        PlaneBatch<S> gin = gout;
        for (std::size_t i = 0; i < gin.p.size(); ++i)
            gin.p[i] = gin.p[i]
                           .cwiseProduct((cache_.p[i].array() > 0).template cast<S>().matrix());
        return gin;
    }

private:
    PlaneBatch<S> cache_;
};

/// Flattens channels x rows x cols and adaptively mean-pools to a fixed
/// length, so every CSI branch yields features of one size regardless of
/// the matrix dimensions.
template <class S>
class FlattenPool {
public:
    FlattenPool() = default;
    explicit FlattenPool(int out_len) : d_(out_len) {}

    Mat<S> forward(const PlaneBatch<S>& in) {
        in_shape_ = {in.channels, in.rows, in.cols};
        len_ = in.channels * in.rows * in.cols;
        Mat<S> out(in.batch, d_);
        for (int b = 0; b < in.batch; ++b) {
            for (int i = 0; i < d_; ++i) {
                const auto [s, e] = bucket(i);
                S acc = 0;
                for (int j = s; j < e; ++j) acc += element(in, b, j);
                out(b, i) = acc / static_cast<S>(e - s);
            }
        }
        batch_ = in.batch;
        return out;
    }

    PlaneBatch<S> backward(const Mat<S>& gout) {
        PlaneBatch<S> gin(batch_, in_shape_[0], in_shape_[1], in_shape_[2]);
        for (int b = 0; b < batch_; ++b)
            for (int i = 0; i < d_; ++i) {
                const auto [s, e] = bucket(i);
                const S g = gout(b, i) / static_cast<S>(e - s);
                for (int j = s; j < e; ++j) element(gin, b, j) += g;
            }
        return gin;
    }

    int out_len() const { return d_; }

private:
    std::pair<int, int> bucket(int i) const {
        const int s = (i * len_) / d_;
        const int e = ((i + 1) * len_ + d_ - 1) / d_;  // ceil
        return {s, std::max(e, s + 1)};
    }
    // Flatten order: channel-major, then row, then column.
    static S& element(PlaneBatch<S>& pb, int b, int flat) {
        const int hw = pb.rows * pb.cols;
        const int c = flat / hw;
        const int r = (flat % hw) / pb.cols;
        const int x = flat % pb.cols;
        return pb.at(b, c)(r, x);
    }
    static S element(const PlaneBatch<S>& pb, int b, int flat) {
        const int hw = pb.rows * pb.cols;
        return pb.at(b, flat / hw)((flat % hw) / pb.cols, flat % pb.cols);
    }

    int d_ = 0, len_ = 0, batch_ = 0;
    std::array<int, 3> in_shape_{};
};

template <class S>
class Affine {
public:
    Affine() = default;

    template <class Rng>
    Affine(int in_dim, int out_dim, Rng& rng) {
        w_ = fan_in_uniform<S>(in_dim, out_dim, in_dim, rng);
        bias_ = Mat<S>::Zero(1, out_dim);
        g_w_ = Mat<S>::Zero(in_dim, out_dim);
        g_bias_ = Mat<S>::Zero(1, out_dim);
    }

    Mat<S> forward(const Mat<S>& x) {
        cache_ = x;
        return (x * w_).rowwise() + bias_.row(0);
    }

    Mat<S> backward(const Mat<S>& gout) {
        g_w_ += cache_.transpose() * gout;
        g_bias_.row(0) += gout.colwise().sum();
        return gout * w_.transpose();
    }

    void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
        reg.push_back({prefix + ".w",
                       {static_cast<int>(w_.rows()), static_cast<int>(w_.cols())},
                       &w_,
                       &g_w_,
                       true});
        reg.push_back({prefix + ".b", {static_cast<int>(bias_.cols())}, &bias_, &g_bias_, true});
    }

    int in_dim() const { return static_cast<int>(w_.rows()); }
    int out_dim() const { return static_cast<int>(w_.cols()); }

private:
    Mat<S> w_, bias_, g_w_, g_bias_, cache_;
};

template <class S>
class ReluMat {
public:
    Mat<S> forward(const Mat<S>& x) {
        cache_ = x;
        return x.cwiseMax(static_cast<S>(0));
    }
    Mat<S> backward(const Mat<S>& gout) {
        return gout.cwiseProduct((cache_.array() > 0).template cast<S>().matrix());
    }

private:
    Mat<S> cache_;
};

template <class S>
class TanhMat {
public:
    Mat<S> forward(const Mat<S>& x) {
        out_ = x.array().tanh().matrix();
        return out_;
    }
    Mat<S> backward(const Mat<S>& gout) {
        return gout.cwiseProduct(
            (Mat<S>::Ones(out_.rows(), out_.cols()) - out_.cwiseProduct(out_)));
    }

private:
    Mat<S> out_;
};

}  // namespace irsmec::nn

#endif
