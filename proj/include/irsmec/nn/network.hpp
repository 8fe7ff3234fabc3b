#ifndef IRSMEC_NN_NETWORK_HPP
#define IRSMEC_NN_NETWORK_HPP

#include "irsmec/nn/layers.hpp"

namespace irsmec::nn {

/// Width plan of one CNN-DenseNet-FCN network. The channel plan of the
/// feature extractor is fixed at 2 -> 3 (directional convs) -> 1 (pointwise).
struct NetShape {
    int m = 0, n = 0, k = 0;  // CSI matrix dimensions
    int d = 64;               // pooled feature length per branch
    int h1 = 128;             // dense block width
    int h2 = 128;             // head width
    int action_dim = 0;       // appended to the dense-block input (critics)
    int out_dim = 1;
    bool squash = false;  // tanh on the output (actor)

    int feature_dim() const { return 3 * d; }
    int dense_in() const { return feature_dim() + action_dim; }
};

/// One CSI branch: horizontal and vertical directional convolution paths,
/// each pooled to length d and summed.
template <class S>
class CsiBranch {
public:
    CsiBranch() = default;

    template <class Rng>
    CsiBranch(int rows, int cols, int d, Rng& rng)
        : conv_h_(2, 3, rows, 1, rng),
          conv_v_(2, 3, 1, cols, rng),
          bn_h_(3),
          bn_v_(3),
          pw_h_(3, 1, 1, 1, rng),
          pw_v_(3, 1, 1, 1, rng),
          pool_h_(d),
          pool_v_(d) {}

    Mat<S> forward(const PlaneBatch<S>& in, ForwardMode mode) {
        Mat<S> h = pool_h_.forward(pw_h_.forward(relu_h_.forward(bn_h_.forward(conv_h_.forward(in), mode))));
        Mat<S> v = pool_v_.forward(pw_v_.forward(relu_v_.forward(bn_v_.forward(conv_v_.forward(in), mode))));
        return h + v;
    }

    PlaneBatch<S> backward(const Mat<S>& gout) {
        PlaneBatch<S> gh = conv_h_.backward(
            bn_h_.backward(relu_h_.backward(pw_h_.backward(pool_h_.backward(gout)))));
        PlaneBatch<S> gv = conv_v_.backward(
            bn_v_.backward(relu_v_.backward(pw_v_.backward(pool_v_.backward(gout)))));
        for (std::size_t i = 0; i < gh.p.size(); ++i) gh.p[i] += gv.p[i];
        return gh;
    }

    void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
        conv_h_.register_params(reg, prefix + ".conv_h");
        bn_h_.register_params(reg, prefix + ".bn_h");
        pw_h_.register_params(reg, prefix + ".pw_h");
        conv_v_.register_params(reg, prefix + ".conv_v");
        bn_v_.register_params(reg, prefix + ".bn_v");
        pw_v_.register_params(reg, prefix + ".pw_v");
    }

private:
    Conv2d<S> conv_h_, conv_v_;
    BatchNorm2d<S> bn_h_, bn_v_;
    ReluPlanes<S> relu_h_, relu_v_;
    Conv2d<S> pw_h_, pw_v_;
    FlattenPool<S> pool_h_, pool_v_;
};

/// Three fully connected layers where each layer sees the block input
/// concatenated with every previous layer's output.
template <class S>
class DenseBlock {
public:
    DenseBlock() = default;

    template <class Rng>
    DenseBlock(int in_dim, int h1, Rng& rng)
        : l1_(in_dim, h1, rng), l2_(in_dim + h1, h1, rng), l3_(in_dim + 2 * h1, h1, rng) {}

    Mat<S> forward(const Mat<S>& x) {
        in_dim_ = static_cast<int>(x.cols());
        o1_ = r1_.forward(l1_.forward(x));
        Mat<S> x2(x.rows(), x.cols() + o1_.cols());
        x2 << x, o1_;
        o2_ = r2_.forward(l2_.forward(x2));
        Mat<S> x3(x.rows(), x2.cols() + o2_.cols());
        x3 << x2, o2_;
        return r3_.forward(l3_.forward(x3));
    }

    Mat<S> backward(const Mat<S>& gout) {
        const int h1 = static_cast<int>(o1_.cols());
        Mat<S> g3 = l3_.backward(r3_.backward(gout));  // (in + 2h1)
        Mat<S> gx = g3.leftCols(in_dim_);
        Mat<S> go1 = g3.middleCols(in_dim_, h1);
        Mat<S> go2 = g3.rightCols(h1);
        Mat<S> g2 = l2_.backward(r2_.backward(go2));  // (in + h1)
        gx += g2.leftCols(in_dim_);
        go1 += g2.rightCols(h1);
        gx += l1_.backward(r1_.backward(go1));
        return gx;
    }

    void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
        l1_.register_params(reg, prefix + ".l1");
        l2_.register_params(reg, prefix + ".l2");
        l3_.register_params(reg, prefix + ".l3");
    }

private:
    Affine<S> l1_, l2_, l3_;
    ReluMat<S> r1_, r2_, r3_;
    Mat<S> o1_, o2_;
    int in_dim_ = 0;
};

/// Complete network: three CSI branches -> concatenation (plus the action
/// vector for critics) -> dense block -> three-layer head.
template <class S>
class Network {
public:
    Network() = default;

    template <class Rng>
    Network(const NetShape& shape, Rng& rng)
        : shape_(shape),
          b_dir_(shape.m, shape.n, shape.d, rng),
          b_irs_(shape.k, shape.n, shape.d, rng),
          b_g_(shape.m, shape.k, shape.d, rng),
          dense_(shape.dense_in(), shape.h1, rng),
          f1_(shape.h1, shape.h2, rng),
          f2_(shape.h2, shape.h2, rng),
          f3_(shape.h2, shape.out_dim, rng) {}

    // The parameter registry exposes raw pointers into the layers, so the
    // network must stay at one address for its lifetime.
    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;

    const NetShape& shape() const { return shape_; }

    Mat<S> forward(const StateBatch<S>& state, const Mat<S>* action, ForwardMode mode) {
        if (shape_.action_dim > 0 &&
            (!action || action->cols() != shape_.action_dim ||
             action->rows() != state.batch()))
            throw std::invalid_argument("network: action input missing or mis-shaped");
        Mat<S> fd = b_dir_.forward(state.dir, mode);
        Mat<S> fi = b_irs_.forward(state.irs, mode);
        Mat<S> fg = b_g_.forward(state.g, mode);
        Mat<S> x(fd.rows(), shape_.dense_in());
        if (shape_.action_dim > 0)
            x << fd, fi, fg, *action;
        else
            x << fd, fi, fg;
        Mat<S> y = f2_.forward(hr1_.forward(f1_.forward(dense_.forward(x))));
        y = f3_.forward(hr2_.forward(y));
        if (shape_.squash) y = tanh_.forward(y);
        has_cache_ = true;
        return y;
    }

    /// Accumulates parameter gradients; optionally returns the gradient with
    /// respect to the appended action input. A recorded forward pass is
    /// consumed; calling twice without a new forward throws.
    void backward(const Mat<S>& gout, Mat<S>* g_action = nullptr) {
        if (!has_cache_)
            throw std::logic_error("network: backward without a recorded forward pass");
        has_cache_ = false;
        Mat<S> g = shape_.squash ? tanh_.backward(gout) : gout;
        g = hr2_.backward(f3_.backward(g));
        g = hr1_.backward(f2_.backward(g));
        g = dense_.backward(f1_.backward(g));
        const int d = shape_.d;
        if (g_action && shape_.action_dim > 0)
            *g_action = g.rightCols(shape_.action_dim);
        b_dir_.backward(g.middleCols(0, d));
        b_irs_.backward(g.middleCols(d, d));
        b_g_.backward(g.middleCols(2 * d, d));
    }

    void zero_grad() {
        for (auto& r : params())
            if (r.grad) r.grad->setZero();
    }

    ParamRegistry<S> params() {
        ParamRegistry<S> reg;
        b_dir_.register_params(reg, "feat.dir");
        b_irs_.register_params(reg, "feat.irs");
        b_g_.register_params(reg, "feat.g");
        dense_.register_params(reg, "dense");
        f1_.register_params(reg, "head.l1");
        f2_.register_params(reg, "head.l2");
        f3_.register_params(reg, "head.l3");
        return reg;
    }

    /// Copies parameters and buffers from another network of the same shape.
    void copy_from(Network<S>& other) {
        auto dst = params();
        auto src = other.params();
        for (std::size_t i = 0; i < dst.size(); ++i) *dst[i].value = *src[i].value;
    }

    /// target <- tau * online + (1 - tau) * target, buffers included.
    void soft_update_from(Network<S>& online, S tau) {
        auto dst = params();
        auto src = online.params();
        for (std::size_t i = 0; i < dst.size(); ++i)
            *dst[i].value = tau * (*src[i].value) + (1 - tau) * (*dst[i].value);
    }

private:
    NetShape shape_;
    CsiBranch<S> b_dir_, b_irs_, b_g_;
    DenseBlock<S> dense_;
    Affine<S> f1_, f2_, f3_;
    ReluMat<S> hr1_, hr2_;
    TanhMat<S> tanh_;
    bool has_cache_ = false;
};

}  // namespace irsmec::nn

#endif
