#ifndef IRSMEC_NN_TENSOR_HPP
#define IRSMEC_NN_TENSOR_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace irsmec::nn {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

/// A batch of multi-channel 2-D planes (batch, channels, rows, cols),
/// stored as one Eigen matrix per (sample, channel).
template <class S>
struct PlaneBatch {
    int batch = 0, channels = 0, rows = 0, cols = 0;
    std::vector<Mat<S>> p;

    PlaneBatch() = default;
    PlaneBatch(int b, int c, int r, int w) { resize(b, c, r, w); }

    void resize(int b, int c, int r, int w) {
        batch = b;
        channels = c;
        rows = r;
        cols = w;
        p.assign(static_cast<std::size_t>(b) * c, Mat<S>::Zero(r, w));
    }

    Mat<S>& at(int b, int c) { return p[static_cast<std::size_t>(b) * channels + c]; }
    const Mat<S>& at(int b, int c) const {
        return p[static_cast<std::size_t>(b) * channels + c];
    }

    void set_zero() {
        for (auto& m : p) m.setZero();
    }
};

/// The three standardized CSI tensors fed to every network.
template <class S>
struct StateBatch {
    PlaneBatch<S> dir;  // 2 x M x N
    PlaneBatch<S> irs;  // 2 x K x N
    PlaneBatch<S> g;    // 2 x M x K

    int batch() const { return dir.batch; }
};

/// Named view of one parameter (or persistent buffer) of a network.
template <class S>
struct ParamRef {
    std::string name;
    std::vector<int> shape;  // semantic shape recorded in checkpoints
    Mat<S>* value = nullptr;
    Mat<S>* grad = nullptr;  // null for non-learnable buffers
    bool learnable = false;
};

template <class S>
using ParamRegistry = std::vector<ParamRef<S>>;

template <class S>
inline std::size_t learnable_count(const ParamRegistry<S>& reg) {
    std::size_t n = 0;
    for (const auto& r : reg)
        if (r.learnable) n += static_cast<std::size_t>(r.value->size());
    return n;
}

}  // namespace irsmec::nn

#endif
