#pragma once

#include <cstddef>
#include <vector>

#include "cdcr/nn/mat.hpp"

namespace cdcr::nn {

// Adaptive-moment gradient descent with conventional defaults
// (beta1 = 0.9, beta2 = 0.999, eps = 1e-8) and bias correction.
struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam() = default;
    Adam(std::vector<Mat*> params, AdamConfig cfg);

    // grads[i] pairs with the i-th parameter matrix.
    void step(const std::vector<Mat>& grads);

    const AdamConfig& config() const { return cfg_; }

private:
    std::vector<Mat*> params_;
    std::vector<Mat> m_;
    std::vector<Mat> v_;
    AdamConfig cfg_;
    std::size_t t_ = 0;
};

}  // namespace cdcr::nn
