#include "mpdr/adam.hpp"

#include <cmath>

#include "mpdr/error.hpp"

namespace mpdr {

Adam::Adam(AdamConfig cfg) : cfg_(cfg) {
    if (!(cfg_.lr >= 0.0) || !(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0) ||
        !(cfg_.beta2 >= 0.0 && cfg_.beta2 < 1.0) || !(cfg_.eps > 0.0)) {
        throw ConfigError("invalid adam configuration");
    }
}

void Adam::step(std::vector<Tensor>& params, std::span<const Tensor> grads) {
    if (params.size() != grads.size()) {
        throw ConfigError("adam: " + std::to_string(params.size()) + " parameters but " +
                          std::to_string(grads.size()) + " gradients");
    }
    if (m_.empty()) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const Tensor& p : params) {
            m_.push_back(Tensor::zeros_like(p));
            v_.push_back(Tensor::zeros_like(p));
        }
    } else if (m_.size() != params.size()) {
        throw ConfigError("adam: parameter count changed between steps");
    }

    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params[i];
        const Tensor& g = grads[i];
        if (!p.same_shape(g) || !p.same_shape(m_[i])) {
            throw ConfigError("adam: shape mismatch at parameter " + std::to_string(i) + ": " +
                              p.shape_string() + " vs " + g.shape_string());
        }
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (std::size_t j = 0; j < p.numel(); ++j) {
            m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
            v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
            double mhat = m[j] / bc1;
            double vhat = v[j] / bc2;
            p[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void Adam::reset() {
    t_ = 0;
    m_.clear();
    v_.clear();
}

} // namespace mpdr
