#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "editseq/rng.hpp"

namespace editseq {

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

// One value node in the computation record. Nodes created by an operation
// under an active tape carry a backward closure; leaves (parameters,
// constants) do not. Leaf gradients accumulate across backward calls until
// reset; non-leaf gradients are scratch space cleared by each backward pass.
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::function<void(Node&)> backward;

    void ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), 0.0);
    }
};

}  // namespace detail

// Dense n-dimensional 64-bit float tensor with shared-node semantics:
// copying a Tensor aliases the same storage and gradient buffer.
class Tensor {
public:
    Tensor() = default;

    static Tensor scalar(double v, bool requires_grad = false);
    static Tensor vector(std::vector<double> values, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double v, bool requires_grad = false);
    // Uniform in [-bound, bound].
    static Tensor uniform(Shape shape, double bound, Rng& rng, bool requires_grad = true);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int64_t size() const { return static_cast<int64_t>(node_->value.size()); }
    int64_t dim(size_t i) const { return node_->shape[i]; }
    int64_t ndim() const { return static_cast<int64_t>(node_->shape.size()); }

    double item() const;
    double at(int64_t flat_index) const { return node_->value[flat_index]; }
    std::span<const double> values() const { return node_->value; }
    std::span<double> mutable_values() { return node_->value; }

    bool requires_grad() const { return node_ && node_->requires_grad; }
    bool is_leaf() const { return node_ && !node_->backward; }
    bool has_grad() const { return node_ && !node_->grad.empty(); }
    std::span<const double> grad() const;
    std::span<double> mutable_grad();
    void zero_grad() { if (node_) node_->grad.clear(); }

    bool same_node(const Tensor& other) const { return node_ == other.node_; }

    std::shared_ptr<detail::Node> node() const { return node_; }
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

private:
    std::shared_ptr<detail::Node> node_;
};

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

// Ordered record of executed operations. Constructing a Tape makes it the
// active tape for the current thread; destruction restores the previous
// one. Operations record themselves only while a tape is active and some
// input requires a gradient.
class Tape {
public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Reverse sweep from a scalar loss. Leaf gradients accumulate
    // additively across calls; intermediate gradients are recomputed.
    void backward(const Tensor& loss);

    size_t size() const { return nodes_.size(); }
    void record(std::shared_ptr<detail::Node> node) { nodes_.push_back(std::move(node)); }

    static Tape* active();

private:
    std::vector<std::shared_ptr<detail::Node>> nodes_;
    Tape* previous_ = nullptr;
};

// ---- forward operations -------------------------------------------------
// Elementwise binary ops accept equal shapes or a single-element operand
// broadcast against the other side. All ops validate input finiteness.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, double b);
Tensor mul(const Tensor& a, double b);

// [m,k]x[k,n] -> [m,n]; [m,k]x[k] -> [m]; [k]x[k,n] -> [n].
Tensor matmul(const Tensor& a, const Tensor& b);

// Joins 1-D tensors (or scalars) into one vector.
Tensor concat(std::span<const Tensor> parts);
Tensor concat(std::initializer_list<Tensor> parts);

// 1-D slice [start, start+len).
Tensor slice(const Tensor& v, int64_t start, int64_t len);

Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor log(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor squared_difference(const Tensor& a, const Tensor& b);

// Numerically stable softmax over a non-empty 1-D tensor.
Tensor softmax(const Tensor& v);

// Value pass-through with no backward contribution.
Tensor stop_gradient(const Tensor& x);

// Differentiable row gather from an embedding matrix [vocab, dim];
// backward scatter-adds into the selected row.
Tensor embedding_lookup(const Tensor& table, int64_t id);

// Index of the maximum element; ties break to the lowest index.
int64_t argmax(std::span<const double> values);
int64_t argmax(const Tensor& v);

// ---- finite-difference verification -------------------------------------

struct FdProbe {
    Tensor loss;
    // Discrete decisions (argmax picks) taken while evaluating. A perturbed
    // evaluation whose signature differs from the baseline is skipped.
    std::vector<int64_t> signature;
};

struct FdReport {
    double max_rel_error = 0.0;
    int64_t checked = 0;
    int64_t skipped = 0;
};

// Central-difference check of d(loss)/d(param) for every coordinate of every
// listed parameter. `f` must rebuild the loss graph on each call and be
// deterministic; non-determinism across two baseline evaluations is
// rejected. Relative error per coordinate:
//   |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
FdReport finite_diff_check(const std::function<FdProbe()>& f,
                           std::span<Tensor> params, double eps);
FdReport finite_diff_check(const std::function<Tensor()>& f,
                           std::span<Tensor> params, double eps);

}  // namespace editseq
