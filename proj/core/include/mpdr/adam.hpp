#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mpdr/tensor.hpp"

namespace mpdr {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction. Moment buffers are allocated on the first step
/// and tied to the parameter shapes seen there. While every gradient seen so
/// far is zero the parameters stay bitwise unchanged.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {});

    const AdamConfig& config() const { return cfg_; }
    std::uint64_t steps() const { return t_; }

    /// One update over a flat parameter list. `grads` must align with
    /// `params` element for element.
    void step(std::vector<Tensor>& params, std::span<const Tensor> grads);

    void reset();

private:
    AdamConfig cfg_;
    std::uint64_t t_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

} // namespace mpdr
