#include "cdcr/nn/adam.hpp"

#include <cmath>

#include "cdcr/errors.hpp"

namespace cdcr::nn {

Adam::Adam(std::vector<Mat*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (Mat* p : params_) {
        m_.emplace_back(p->rows(), p->cols(), 0.0);
        v_.emplace_back(p->rows(), p->cols(), 0.0);
    }
}

void Adam::step(const std::vector<Mat>& grads) {
    if (grads.size() != params_.size()) throw ValidationError("adam: gradient count mismatch");
    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Mat& p = *params_[i];
        const Mat& g = grads[i];
        if (!p.same_shape(g)) throw ValidationError("adam: gradient shape mismatch");
        Mat& m = m_[i];
        Mat& v = v_[i];
        for (std::size_t k = 0; k < p.size(); ++k) {
            double gk = g.raw()[k];
            m.raw()[k] = cfg_.beta1 * m.raw()[k] + (1.0 - cfg_.beta1) * gk;
            v.raw()[k] = cfg_.beta2 * v.raw()[k] + (1.0 - cfg_.beta2) * gk * gk;
            double mhat = m.raw()[k] / bc1;
            double vhat = v.raw()[k] / bc2;
            p.raw()[k] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

}  // namespace cdcr::nn
