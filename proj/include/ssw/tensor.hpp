#pragma once

// Dense f64 tensors with tape-based reverse-mode differentiation.
//
// A Tensor is a shared handle; values are written once by the producing
// op and only grad buffers mutate afterwards. Ops record a backward
// closure on the thread's current Tape when any input requires grad.
// One Tape corresponds to one forward pass and can be consumed by
// backward() exactly once. Independent tapes may live on different
// threads; a single tape is not thread-safe.

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ssw/rng.hpp"

namespace ssw::nn {

class Tape;

struct TensorImpl {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until backward touches it
    bool requires_grad = false;
};

class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
    static Tensor full(std::vector<std::size_t> shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    static Tensor from(std::vector<std::size_t> shape, std::vector<double> data,
                       bool requires_grad = false);
    static Tensor randn(std::vector<std::size_t> shape, Rng& rng, double stddev = 1.0,
                        bool requires_grad = false);
    static Tensor randu(std::vector<std::size_t> shape, Rng& rng, double lo, double hi,
                        bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const std::vector<std::size_t>& shape() const { return impl_->shape; }
    std::size_t size() const { return impl_->data.size(); }
    std::size_t ndim() const { return impl_->shape.size(); }
    std::size_t dim(std::size_t i) const { return impl_->shape[i]; }
    // 2D accessors; 1D tensors read as a single row
    std::size_t rows() const;
    std::size_t cols() const;

    double* data() { return impl_->data.data(); }
    const double* data() const { return impl_->data.data(); }
    const std::vector<double>& values() const { return impl_->data; }
    double at(std::size_t i) const { return impl_->data[i]; }
    double at(std::size_t r, std::size_t c) const { return impl_->data[r * cols() + c]; }
    double item() const;  // scalar tensors only

    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool v) { impl_->requires_grad = v; }

    bool has_grad() const { return !impl_->grad.empty(); }
    // allocates (zeroed) on first use
    std::vector<double>& grad();
    const std::vector<double>& grad() const { return impl_->grad; }
    void zero_grad();

    std::shared_ptr<TensorImpl>& impl() { return impl_; }
    const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

    std::string shape_str() const;

private:
    explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<TensorImpl> impl_;
};

// Ensures grad buffer exists, returns pointer for accumulation.
double* accum_grad(const std::shared_ptr<TensorImpl>& t);

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    void record(std::function<void()> backward) { nodes_.push_back(std::move(backward)); }

    // Seeds d(loss)/d(loss) = 1 and replays nodes in reverse recording
    // order, populating .grad on every participating tensor. Throws if
    // loss is not a scalar, if loss is not connected to any recorded
    // node, or if this tape was already consumed.
    void backward(const Tensor& loss);

    bool consumed() const { return consumed_; }
    std::size_t node_count() const { return nodes_.size(); }

    static Tape* current();

private:
    friend class TapeScope;
    std::vector<std::function<void()>> nodes_;
    bool consumed_ = false;
};

class TapeScope {
public:
    explicit TapeScope(Tape& tape);
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

private:
    Tape* prev_;
};

}  // namespace ssw::nn
