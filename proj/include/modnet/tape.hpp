#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "modnet/matrix.hpp"

namespace modnet {

// A learned tensor together with its gradient slot.
struct Param {
    std::string name;
    Matrix value;
    Matrix grad;

    Param() = default;
    Param(std::string n, Matrix v)
        : name(std::move(n)), value(std::move(v)), grad(Matrix::zeros(value.rows, value.cols)) {}

    void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

// Handle to a value recorded on a Tape.
struct Var {
    int idx{-1};
    bool valid() const { return idx >= 0; }
};

// Reverse-mode tape. Operations are recorded in topological order (inputs
// always precede their consumers); backward() replays the records once in
// reverse, accumulating gradients in tape order so runs are bit-reproducible.
// A Tape is single-owner while recording; independent tapes may run in
// parallel across samples.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaves. constant() rejects non-finite entries; leaf() registers a
    // parameter once per tape and routes its gradient back to p.grad.
    Var constant(Matrix m);
    Var zeros(int r, int c) { return constant(Matrix::zeros(r, c)); }
    Var ones(int r, int c) { return constant(Matrix::ones(r, c)); }
    Var leaf(Param& p);

    Var matmul(Var a, Var b);
    // Elementwise add; also accepts a 1xN second operand broadcast across rows.
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var sigmoid(Var a);
    Var tanh(Var a);
    // Natural log; rejects non-positive entries.
    Var log(Var a);
    // Row-stable softmax: per-row max subtraction, each row sums to 1.
    Var softmax_rows(Var a);
    Var concat_rows(const std::vector<Var>& parts);
    Var concat_cols(const std::vector<Var>& parts);
    Var transpose(Var a);
    Var scale(Var a, double c);
    // Sum of all entries, as a 1x1 matrix.
    Var sum(Var a);
    // Clamp into [lo, hi]; gradient passes only strictly inside the interval.
    Var clamp(Var a, double lo, double hi);
    // Copy of row i; gradient scatters back into that row.
    Var select_row(Var a, int i);

    const Matrix& value(Var v) const;
    double scalar(Var v) const;
    std::size_t size() const { return nodes_.size(); }

    // Gradient of a scalar loss with respect to every recorded node; leaf
    // gradients are added into their Param::grad slots in tape order.
    void backward(Var loss);

    // Gradient of a node after backward(); test/introspection surface.
    const Matrix& grad(Var v) const;

private:
    using BackFn = std::function<void(Tape&)>;

    struct Node {
        Matrix value;
        Matrix grad;
        BackFn back;
        Param* param{nullptr};
    };

    std::vector<Node> nodes_;
    std::unordered_map<const Param*, int> leaf_cache_;

    Var push(Matrix value, BackFn back, Param* param = nullptr);
    const Node& node(Var v, const char* who) const;
    Matrix& grad_slot(int idx) { return nodes_[static_cast<std::size_t>(idx)].grad; }
    const Matrix& val(int idx) const { return nodes_[static_cast<std::size_t>(idx)].value; }
};

}  // namespace modnet
