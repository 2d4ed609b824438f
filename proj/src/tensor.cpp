#include "ssw/tensor.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ssw::nn {

namespace {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) {
        if (d == 0) throw std::invalid_argument("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}

thread_local Tape* t_current_tape = nullptr;

}  // namespace

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    auto impl = std::make_shared<TensorImpl>();
    impl->data.assign(shape_numel(shape), 0.0);
    impl->shape = std::move(shape);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (auto& v : t.impl()->data) v = value;
    return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return full({1}, value, requires_grad);
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> data, bool requires_grad) {
    if (shape_numel(shape) != data.size())
        throw std::invalid_argument("tensor data length does not match shape");
    auto impl = std::make_shared<TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::randn(std::vector<std::size_t> shape, Rng& rng, double stddev, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (auto& v : t.impl()->data) v = rng.normal(0.0, stddev);
    return t;
}

Tensor Tensor::randu(std::vector<std::size_t> shape, Rng& rng, double lo, double hi,
                     bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (auto& v : t.impl()->data) v = rng.uniform(lo, hi);
    return t;
}

std::size_t Tensor::rows() const { return ndim() >= 2 ? impl_->shape[0] : 1; }

std::size_t Tensor::cols() const {
    return ndim() >= 2 ? impl_->shape[ndim() - 1] : impl_->shape[0];
}

double Tensor::item() const {
    if (size() != 1) throw std::invalid_argument("item() requires a scalar tensor, got " + shape_str());
    return impl_->data[0];
}

std::vector<double>& Tensor::grad() {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
    return impl_->grad;
}

void Tensor::zero_grad() { impl_->grad.assign(impl_->data.size(), 0.0); }

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < impl_->shape.size(); ++i) {
        if (i) os << 'x';
        os << impl_->shape[i];
    }
    os << ')';
    return os.str();
}

double* accum_grad(const std::shared_ptr<TensorImpl>& t) {
    if (t->grad.empty()) t->grad.assign(t->data.size(), 0.0);
    return t->grad.data();
}

void Tape::backward(const Tensor& loss) {
    if (consumed_) throw std::logic_error("tape already consumed; backward may run only once");
    if (!loss.defined() || loss.size() != 1)
        throw std::invalid_argument("backward requires a scalar loss");
    if (!loss.requires_grad())
        throw std::invalid_argument("loss is detached: no recorded operation produced it");
    consumed_ = true;
    loss.impl()->grad.assign(1, 1.0);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

Tape* Tape::current() { return t_current_tape; }

TapeScope::TapeScope(Tape& tape) : prev_(t_current_tape) { t_current_tape = &tape; }

TapeScope::~TapeScope() { t_current_tape = prev_; }

}  // namespace ssw::nn
