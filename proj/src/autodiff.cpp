#include "editseq/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace editseq {

using detail::Node;

int64_t shape_numel(const Shape& shape) {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

namespace {

void validate_shape(const Shape& shape) {
    if (shape.empty()) throw std::invalid_argument("tensor shape must have at least one dimension");
    for (int64_t d : shape) {
        if (d < 1) throw std::invalid_argument("tensor dimensions must be positive, got " + shape_str(shape));
    }
}

void check_finite(const Tensor& t, const char* op) {
    for (double x : t.values()) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument(std::string(op) + ": non-finite input value");
        }
    }
}

std::shared_ptr<Node> make_node(Shape shape, std::vector<double> value) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->value = std::move(value);
    return node;
}

// Attaches the backward closure and records the node when a tape is active
// and some input carries a gradient requirement.
Tensor finish(std::shared_ptr<Node> out, std::span<const Tensor> inputs,
              std::function<void(Node&)> backward) {
    Tape* tape = Tape::active();
    if (tape) {
        bool rg = false;
        for (const Tensor& in : inputs) rg = rg || in.requires_grad();
        if (rg) {
            out->requires_grad = true;
            out->backward = std::move(backward);
            tape->record(out);
        }
    }
    return Tensor(std::move(out));
}

Tensor finish(std::shared_ptr<Node> out, std::initializer_list<Tensor> inputs,
              std::function<void(Node&)> backward) {
    return finish(std::move(out), std::span<const Tensor>(inputs.begin(), inputs.size()),
                  std::move(backward));
}

void accumulate(const std::shared_ptr<Node>& node, size_t i, double g) {
    node->grad[i] += g;
}

}  // namespace

// ---- Tensor --------------------------------------------------------------

Tensor Tensor::scalar(double v, bool requires_grad) {
    return from({1}, {v}, requires_grad);
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
    int64_t n = static_cast<int64_t>(values.size());
    return from({n}, std::move(values), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    validate_shape(shape);
    if (shape_numel(shape) != static_cast<int64_t>(values.size())) {
        throw std::invalid_argument("tensor value count " + std::to_string(values.size()) +
                                    " does not match shape " + shape_str(shape));
    }
    auto node = make_node(std::move(shape), std::move(values));
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    validate_shape(shape);
    std::vector<double> v(static_cast<size_t>(shape_numel(shape)), 0.0);
    return from(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    validate_shape(shape);
    std::vector<double> v(static_cast<size_t>(shape_numel(shape)), value);
    return from(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::uniform(Shape shape, double bound, Rng& rng, bool requires_grad) {
    validate_shape(shape);
    std::vector<double> v(static_cast<size_t>(shape_numel(shape)));
    for (double& x : v) x = rng.uniform(-bound, bound);
    return from(std::move(shape), std::move(v), requires_grad);
}

double Tensor::item() const {
    if (!node_ || node_->value.size() != 1) {
        throw std::invalid_argument("item() requires a single-element tensor, got " +
                                    (node_ ? shape_str(node_->shape) : std::string("<empty>")));
    }
    return node_->value[0];
}

std::span<const double> Tensor::grad() const {
    if (!node_ || node_->grad.empty()) return {};
    return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
}

// ---- Tape ----------------------------------------------------------------

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape::Tape() : previous_(g_active_tape) {
    g_active_tape = this;
}

Tape::~Tape() {
    g_active_tape = previous_;
}

Tape* Tape::active() { return g_active_tape; }

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1) {
        throw std::invalid_argument("backward requires a scalar loss, got " +
                                    (loss.defined() ? shape_str(loss.shape()) : std::string("<empty>")));
    }
    if (nodes_.empty()) throw std::invalid_argument("backward on an empty tape");
    // Intermediate gradients are per-pass scratch; leaves keep accumulating.
    for (auto& node : nodes_) node->grad.clear();
    auto seed = loss.node();
    seed->ensure_grad();
    seed->grad[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        Node& node = **it;
        if (node.backward && !node.grad.empty()) node.backward(node);
    }
}

// ---- elementwise binary ---------------------------------------------------

namespace {

enum class BinKind { SameShape, ScalarLeft, ScalarRight };

BinKind classify(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() == b.shape()) return BinKind::SameShape;
    if (a.size() == 1) return BinKind::ScalarLeft;
    if (b.size() == 1) return BinKind::ScalarRight;
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    BinKind kind = classify(a, b, "add");
    check_finite(a, "add");
    check_finite(b, "add");
    const Shape& out_shape = (kind == BinKind::ScalarLeft) ? b.shape() : a.shape();
    size_t n = static_cast<size_t>(shape_numel(out_shape));
    std::vector<double> out(n);
    auto av = a.values(), bv = b.values();
    for (size_t i = 0; i < n; ++i) {
        out[i] = (kind == BinKind::ScalarLeft ? av[0] : av[i]) +
                 (kind == BinKind::ScalarRight ? bv[0] : bv[i]);
    }
    auto node = make_node(out_shape, std::move(out));
    auto an = a.node(), bn = b.node();
    return finish(node, {a, b}, [an, bn, kind](Node& o) {
        size_t n = o.grad.size();
        if (an->requires_grad) {
            an->ensure_grad();
            if (kind == BinKind::ScalarLeft) {
                for (size_t i = 0; i < n; ++i) accumulate(an, 0, o.grad[i]);
            } else {
                for (size_t i = 0; i < n; ++i) accumulate(an, i, o.grad[i]);
            }
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            if (kind == BinKind::ScalarRight) {
                for (size_t i = 0; i < n; ++i) accumulate(bn, 0, o.grad[i]);
            } else {
                for (size_t i = 0; i < n; ++i) accumulate(bn, i, o.grad[i]);
            }
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    BinKind kind = classify(a, b, "sub");
    check_finite(a, "sub");
    check_finite(b, "sub");
    const Shape& out_shape = (kind == BinKind::ScalarLeft) ? b.shape() : a.shape();
    size_t n = static_cast<size_t>(shape_numel(out_shape));
    std::vector<double> out(n);
    auto av = a.values(), bv = b.values();
    for (size_t i = 0; i < n; ++i) {
        out[i] = (kind == BinKind::ScalarLeft ? av[0] : av[i]) -
                 (kind == BinKind::ScalarRight ? bv[0] : bv[i]);
    }
    auto node = make_node(out_shape, std::move(out));
    auto an = a.node(), bn = b.node();
    return finish(node, {a, b}, [an, bn, kind](Node& o) {
        size_t n = o.grad.size();
        if (an->requires_grad) {
            an->ensure_grad();
            if (kind == BinKind::ScalarLeft) {
                for (size_t i = 0; i < n; ++i) accumulate(an, 0, o.grad[i]);
            } else {
                for (size_t i = 0; i < n; ++i) accumulate(an, i, o.grad[i]);
            }
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            if (kind == BinKind::ScalarRight) {
                for (size_t i = 0; i < n; ++i) accumulate(bn, 0, -o.grad[i]);
            } else {
                for (size_t i = 0; i < n; ++i) accumulate(bn, i, -o.grad[i]);
            }
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    BinKind kind = classify(a, b, "mul");
    check_finite(a, "mul");
    check_finite(b, "mul");
    const Shape& out_shape = (kind == BinKind::ScalarLeft) ? b.shape() : a.shape();
    size_t n = static_cast<size_t>(shape_numel(out_shape));
    std::vector<double> out(n);
    auto av = a.values(), bv = b.values();
    for (size_t i = 0; i < n; ++i) {
        out[i] = (kind == BinKind::ScalarLeft ? av[0] : av[i]) *
                 (kind == BinKind::ScalarRight ? bv[0] : bv[i]);
    }
    auto node = make_node(out_shape, std::move(out));
    auto an = a.node(), bn = b.node();
    return finish(node, {a, b}, [an, bn, kind](Node& o) {
        size_t n = o.grad.size();
        if (an->requires_grad) {
            an->ensure_grad();
            for (size_t i = 0; i < n; ++i) {
                double other = (kind == BinKind::ScalarRight) ? bn->value[0] : bn->value[i];
                accumulate(an, kind == BinKind::ScalarLeft ? 0 : i, o.grad[i] * other);
            }
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (size_t i = 0; i < n; ++i) {
                double other = (kind == BinKind::ScalarLeft) ? an->value[0] : an->value[i];
                accumulate(bn, kind == BinKind::ScalarRight ? 0 : i, o.grad[i] * other);
            }
        }
    });
}

Tensor add(const Tensor& a, double b) { return add(a, Tensor::scalar(b)); }
Tensor mul(const Tensor& a, double b) { return mul(a, Tensor::scalar(b)); }

// ---- matmul ----------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_finite(a, "matmul");
    check_finite(b, "matmul");
    const bool a_mat = a.ndim() == 2;
    const bool b_mat = b.ndim() == 2;
    auto av = a.values(), bv = b.values();
    auto an = a.node(), bn = b.node();

    if (a_mat && b_mat) {
        int64_t m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
        if (k != k2) {
            throw std::invalid_argument("matmul: inner dimensions differ, " + shape_str(a.shape()) +
                                        " x " + shape_str(b.shape()));
        }
        std::vector<double> out(static_cast<size_t>(m * n), 0.0);
        for (int64_t i = 0; i < m; ++i) {
            for (int64_t l = 0; l < k; ++l) {
                double ail = av[i * k + l];
                for (int64_t j = 0; j < n; ++j) out[i * n + j] += ail * bv[l * n + j];
            }
        }
        auto node = make_node({m, n}, std::move(out));
        return finish(node, {a, b}, [an, bn, m, k, n](Node& o) {
            if (an->requires_grad) {
                an->ensure_grad();
                for (int64_t i = 0; i < m; ++i) {
                    for (int64_t l = 0; l < k; ++l) {
                        double g = 0.0;
                        for (int64_t j = 0; j < n; ++j) g += o.grad[i * n + j] * bn->value[l * n + j];
                        an->grad[i * k + l] += g;
                    }
                }
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (int64_t l = 0; l < k; ++l) {
                    for (int64_t i = 0; i < m; ++i) {
                        double ail = an->value[i * k + l];
                        for (int64_t j = 0; j < n; ++j) bn->grad[l * n + j] += ail * o.grad[i * n + j];
                    }
                }
            }
        });
    }

    if (a_mat && b.ndim() == 1) {
        int64_t m = a.dim(0), k = a.dim(1);
        if (k != b.dim(0)) {
            throw std::invalid_argument("matmul: inner dimensions differ, " + shape_str(a.shape()) +
                                        " x " + shape_str(b.shape()));
        }
        std::vector<double> out(static_cast<size_t>(m), 0.0);
        for (int64_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (int64_t l = 0; l < k; ++l) acc += av[i * k + l] * bv[l];
            out[i] = acc;
        }
        auto node = make_node({m}, std::move(out));
        return finish(node, {a, b}, [an, bn, m, k](Node& o) {
            if (an->requires_grad) {
                an->ensure_grad();
                for (int64_t i = 0; i < m; ++i) {
                    double g = o.grad[i];
                    for (int64_t l = 0; l < k; ++l) an->grad[i * k + l] += g * bn->value[l];
                }
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (int64_t i = 0; i < m; ++i) {
                    double g = o.grad[i];
                    for (int64_t l = 0; l < k; ++l) bn->grad[l] += an->value[i * k + l] * g;
                }
            }
        });
    }

    if (a.ndim() == 1 && b_mat) {
        int64_t k = a.dim(0), n = b.dim(1);
        if (k != b.dim(0)) {
            throw std::invalid_argument("matmul: inner dimensions differ, " + shape_str(a.shape()) +
                                        " x " + shape_str(b.shape()));
        }
        std::vector<double> out(static_cast<size_t>(n), 0.0);
        for (int64_t l = 0; l < k; ++l) {
            double xl = av[l];
            for (int64_t j = 0; j < n; ++j) out[j] += xl * bv[l * n + j];
        }
        auto node = make_node({n}, std::move(out));
        return finish(node, {a, b}, [an, bn, k, n](Node& o) {
            if (an->requires_grad) {
                an->ensure_grad();
                for (int64_t l = 0; l < k; ++l) {
                    double g = 0.0;
                    for (int64_t j = 0; j < n; ++j) g += bn->value[l * n + j] * o.grad[j];
                    an->grad[l] += g;
                }
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (int64_t l = 0; l < k; ++l) {
                    double xl = an->value[l];
                    for (int64_t j = 0; j < n; ++j) bn->grad[l * n + j] += xl * o.grad[j];
                }
            }
        });
    }

    throw std::invalid_argument("matmul: unsupported shapes " + shape_str(a.shape()) + " x " +
                                shape_str(b.shape()));
}

// ---- concat / slice --------------------------------------------------------

Tensor concat(std::span<const Tensor> parts) {
    if (parts.empty()) throw std::invalid_argument("concat: no inputs");
    int64_t total = 0;
    for (const Tensor& p : parts) {
        if (p.ndim() != 1) {
            throw std::invalid_argument("concat: expects 1-D inputs, got " + shape_str(p.shape()));
        }
        check_finite(p, "concat");
        total += p.size();
    }
    std::vector<double> out;
    out.reserve(static_cast<size_t>(total));
    for (const Tensor& p : parts) {
        auto v = p.values();
        out.insert(out.end(), v.begin(), v.end());
    }
    auto node = make_node({total}, std::move(out));
    std::vector<std::shared_ptr<Node>> in_nodes;
    in_nodes.reserve(parts.size());
    for (const Tensor& p : parts) in_nodes.push_back(p.node());
    return finish(node, parts, [in_nodes](Node& o) {
        size_t offset = 0;
        for (const auto& in : in_nodes) {
            size_t n = in->value.size();
            if (in->requires_grad) {
                in->ensure_grad();
                for (size_t i = 0; i < n; ++i) in->grad[i] += o.grad[offset + i];
            }
            offset += n;
        }
    });
}

Tensor concat(std::initializer_list<Tensor> parts) {
    return concat(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor slice(const Tensor& v, int64_t start, int64_t len) {
    if (v.ndim() != 1) throw std::invalid_argument("slice: expects a 1-D input, got " + shape_str(v.shape()));
    if (start < 0 || len < 1 || start + len > v.size()) {
        throw std::invalid_argument("slice: range [" + std::to_string(start) + "," +
                                    std::to_string(start + len) + ") out of bounds for " +
                                    shape_str(v.shape()));
    }
    check_finite(v, "slice");
    auto vv = v.values();
    std::vector<double> out(vv.begin() + start, vv.begin() + start + len);
    auto node = make_node({len}, std::move(out));
    auto vn = v.node();
    return finish(node, {v}, [vn, start, len](Node& o) {
        if (!vn->requires_grad) return;
        vn->ensure_grad();
        for (int64_t i = 0; i < len; ++i) vn->grad[start + i] += o.grad[i];
    });
}

// ---- elementwise unary -------------------------------------------------------

Tensor tanh(const Tensor& x) {
    check_finite(x, "tanh");
    auto xv = x.values();
    std::vector<double> out(xv.size());
    for (size_t i = 0; i < xv.size(); ++i) out[i] = std::tanh(xv[i]);
    auto node = make_node(x.shape(), std::move(out));
    auto xn = x.node();
    return finish(node, {x}, [xn](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (size_t i = 0; i < o.grad.size(); ++i) {
            double y = o.value[i];
            xn->grad[i] += o.grad[i] * (1.0 - y * y);
        }
    });
}

Tensor sigmoid(const Tensor& x) {
    check_finite(x, "sigmoid");
    auto xv = x.values();
    std::vector<double> out(xv.size());
    for (size_t i = 0; i < xv.size(); ++i) {
        double v = xv[i];
        out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    auto node = make_node(x.shape(), std::move(out));
    auto xn = x.node();
    return finish(node, {x}, [xn](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (size_t i = 0; i < o.grad.size(); ++i) {
            double y = o.value[i];
            xn->grad[i] += o.grad[i] * y * (1.0 - y);
        }
    });
}

Tensor log(const Tensor& x) {
    check_finite(x, "log");
    auto xv = x.values();
    std::vector<double> out(xv.size());
    for (size_t i = 0; i < xv.size(); ++i) out[i] = std::log(xv[i]);
    auto node = make_node(x.shape(), std::move(out));
    auto xn = x.node();
    return finish(node, {x}, [xn](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (size_t i = 0; i < o.grad.size(); ++i) xn->grad[i] += o.grad[i] / xn->value[i];
    });
}

Tensor sum(const Tensor& x) {
    check_finite(x, "sum");
    double acc = 0.0;
    for (double v : x.values()) acc += v;
    auto node = make_node({1}, {acc});
    auto xn = x.node();
    return finish(node, {x}, [xn](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (double& g : xn->grad) g += o.grad[0];
    });
}

Tensor mean(const Tensor& x) {
    check_finite(x, "mean");
    double acc = 0.0;
    for (double v : x.values()) acc += v;
    double n = static_cast<double>(x.size());
    auto node = make_node({1}, {acc / n});
    auto xn = x.node();
    return finish(node, {x}, [xn, n](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        double g = o.grad[0] / n;
        for (double& gi : xn->grad) gi += g;
    });
}

Tensor squared_difference(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument("squared_difference: shape mismatch " + shape_str(a.shape()) +
                                    " vs " + shape_str(b.shape()));
    }
    check_finite(a, "squared_difference");
    check_finite(b, "squared_difference");
    auto av = a.values(), bv = b.values();
    std::vector<double> out(av.size());
    for (size_t i = 0; i < av.size(); ++i) {
        double d = av[i] - bv[i];
        out[i] = d * d;
    }
    auto node = make_node(a.shape(), std::move(out));
    auto an = a.node(), bn = b.node();
    return finish(node, {a, b}, [an, bn](Node& o) {
        for (size_t i = 0; i < o.grad.size(); ++i) {
            double d = 2.0 * (an->value[i] - bn->value[i]) * o.grad[i];
            if (an->requires_grad) {
                an->ensure_grad();
                an->grad[i] += d;
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                bn->grad[i] -= d;
            }
        }
    });
}

Tensor softmax(const Tensor& v) {
    if (v.ndim() != 1) throw std::invalid_argument("softmax: expects a 1-D input, got " + shape_str(v.shape()));
    if (v.size() < 1) throw std::invalid_argument("softmax: empty input");
    check_finite(v, "softmax");
    auto xv = v.values();
    double max_v = xv[0];
    for (double x : xv) max_v = std::max(max_v, x);
    std::vector<double> out(xv.size());
    double z = 0.0;
    for (size_t i = 0; i < xv.size(); ++i) {
        out[i] = std::exp(xv[i] - max_v);
        z += out[i];
    }
    for (double& p : out) p /= z;
    auto node = make_node(v.shape(), std::move(out));
    auto vn = v.node();
    return finish(node, {v}, [vn](Node& o) {
        if (!vn->requires_grad) return;
        vn->ensure_grad();
        double dot = 0.0;
        for (size_t i = 0; i < o.grad.size(); ++i) dot += o.grad[i] * o.value[i];
        for (size_t i = 0; i < o.grad.size(); ++i) {
            vn->grad[i] += o.value[i] * (o.grad[i] - dot);
        }
    });
}

Tensor stop_gradient(const Tensor& x) {
    auto node = make_node(x.shape(), std::vector<double>(x.values().begin(), x.values().end()));
    return Tensor(std::move(node));
}

Tensor embedding_lookup(const Tensor& table, int64_t id) {
    if (table.ndim() != 2) {
        throw std::invalid_argument("embedding_lookup: table must be 2-D, got " + shape_str(table.shape()));
    }
    int64_t rows = table.dim(0), dim = table.dim(1);
    if (id < 0 || id >= rows) {
        throw std::invalid_argument("embedding_lookup: id " + std::to_string(id) +
                                    " out of range for table " + shape_str(table.shape()));
    }
    check_finite(table, "embedding_lookup");
    auto tv = table.values();
    std::vector<double> out(tv.begin() + id * dim, tv.begin() + (id + 1) * dim);
    auto node = make_node({dim}, std::move(out));
    auto tn = table.node();
    return finish(node, {table}, [tn, id, dim](Node& o) {
        if (!tn->requires_grad) return;
        tn->ensure_grad();
        for (int64_t i = 0; i < dim; ++i) tn->grad[id * dim + i] += o.grad[i];
    });
}

int64_t argmax(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("argmax: empty input");
    int64_t best = 0;
    for (size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = static_cast<int64_t>(i);
    }
    return best;
}

int64_t argmax(const Tensor& v) { return argmax(v.values()); }

// ---- finite differences -----------------------------------------------------

FdReport finite_diff_check(const std::function<FdProbe()>& f, std::span<Tensor> params,
                           double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("finite_diff_check: eps must be positive");

    FdProbe base1 = f();
    FdProbe base2 = f();
    if (base1.loss.item() != base2.loss.item() || base1.signature != base2.signature) {
        throw std::runtime_error("finite_diff_check: function is not deterministic across evaluations");
    }

    std::vector<std::vector<double>> analytic;
    {
        for (Tensor& p : params) p.zero_grad();
        Tape tape;
        FdProbe probe = f();
        tape.backward(probe.loss);
        for (Tensor& p : params) {
            auto g = p.grad();
            if (g.empty()) {
                analytic.emplace_back(static_cast<size_t>(p.size()), 0.0);
            } else {
                analytic.emplace_back(g.begin(), g.end());
            }
            p.zero_grad();
        }
    }

    FdReport report;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& p = params[pi];
        auto vals = p.mutable_values();
        for (size_t i = 0; i < vals.size(); ++i) {
            double saved = vals[i];
            vals[i] = saved + eps;
            FdProbe plus = f();
            vals[i] = saved - eps;
            FdProbe minus = f();
            vals[i] = saved;
            if (plus.signature != base1.signature || minus.signature != base1.signature) {
                ++report.skipped;
                continue;
            }
            double numeric = (plus.loss.item() - minus.loss.item()) / (2.0 * eps);
            double a = analytic[pi][i];
            double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            report.max_rel_error = std::max(report.max_rel_error, err);
            ++report.checked;
        }
    }
    return report;
}

FdReport finite_diff_check(const std::function<Tensor()>& f, std::span<Tensor> params,
                           double eps) {
    return finite_diff_check([&f]() { return FdProbe{f(), {}}; }, params, eps);
}

}  // namespace editseq
