#pragma once

#include <cmath>
#include <functional>

#include "mpdr/tensor.hpp"

namespace testsupport {

/// Central finite differences of a scalar function, one element at a time.
inline mpdr::Tensor fd_gradient(const std::function<double(const mpdr::Tensor&)>& f,
                                const mpdr::Tensor& x, double h = 1e-5) {
    mpdr::Tensor g = mpdr::Tensor::zeros_like(x);
    mpdr::Tensor xp = x;
    for (std::size_t i = 0; i < x.numel(); ++i) {
        double orig = xp[i];
        xp[i] = orig + h;
        double fp = f(xp);
        xp[i] = orig - h;
        double fm = f(xp);
        xp[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Largest elementwise |a-b| / max(|a|, |b|, floor). The floor keeps entries
/// that are zero in both tensors from dominating the ratio.
inline double max_rel_diff(const mpdr::Tensor& a, const mpdr::Tensor& b, double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), floor});
        worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
    }
    return worst;
}

} // namespace testsupport
