#include "ssw/optim.hpp"

#include <cmath>

#include "ssw/kernels.hpp"

namespace ssw::nn {

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto impl = params_[i].impl();
        if (impl->grad.empty()) continue;
        kern::adam_step(impl->data.data(), impl->grad.data(), m_[i].data(), v_[i].data(),
                        impl->data.size(), lr_, beta1_, beta2_, bc1, bc2, eps_);
    }
}

void Adam::zero_grad() {
    for (Tensor& p : params_) p.zero_grad();
}

}  // namespace ssw::nn
