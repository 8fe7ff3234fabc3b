#ifndef IRSMEC_NN_ADAM_HPP
#define IRSMEC_NN_ADAM_HPP

#include <cmath>

#include "irsmec/nn/tensor.hpp"

namespace irsmec::nn {

/// Adaptive-moment gradient step over a parameter registry. Moment buffers
/// align with the learnable entries of the registry passed at construction;
/// the same network must be passed to every step call.
template <class S>
class Adam {
public:
    Adam() = default;

    Adam(const ParamRegistry<S>& reg, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (const auto& r : reg) {
            if (!r.learnable) continue;
            m_.push_back(Mat<S>::Zero(r.value->rows(), r.value->cols()));
            v_.push_back(Mat<S>::Zero(r.value->rows(), r.value->cols()));
            names_.push_back(r.name);
        }
    }

    void step(const ParamRegistry<S>& reg) {
        ++t_;
        const S c1 = static_cast<S>(1.0 - std::pow(beta1_, t_));
        const S c2 = static_cast<S>(1.0 - std::pow(beta2_, t_));
        std::size_t j = 0;
        for (const auto& r : reg) {
            if (!r.learnable) continue;
            Mat<S>& m = m_[j];
            Mat<S>& v = v_[j];
            const Mat<S>& g = *r.grad;
            m = static_cast<S>(beta1_) * m + static_cast<S>(1.0 - beta1_) * g;
            v = static_cast<S>(beta2_) * v +
                static_cast<S>(1.0 - beta2_) * g.cwiseProduct(g);
            r.value->array() -= static_cast<S>(lr_) * (m.array() / c1) /
                                ((v.array() / c2).sqrt() + static_cast<S>(eps_));
            ++j;
        }
    }

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }
    long step_count() const { return t_; }
    void set_step_count(long t) { t_ = t; }

    /// Exposes the moment buffers for checkpointing.
    void register_state(ParamRegistry<S>& reg, const std::string& prefix) {
        for (std::size_t j = 0; j < m_.size(); ++j) {
            reg.push_back({prefix + "." + names_[j] + ".m",
                           {static_cast<int>(m_[j].rows()), static_cast<int>(m_[j].cols())},
                           &m_[j],
                           nullptr,
                           false});
            reg.push_back({prefix + "." + names_[j] + ".v",
                           {static_cast<int>(v_[j].rows()), static_cast<int>(v_[j].cols())},
                           &v_[j],
                           nullptr,
                           false});
        }
    }

private:
    double lr_ = 3e-4, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    std::vector<Mat<S>> m_, v_;
    std::vector<std::string> names_;
};

}  // namespace irsmec::nn

#endif
