#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <unordered_map>

#include <Eigen/Dense>

namespace condor::nn {

using Matrix = Eigen::MatrixXd;

class Tape;

/// Handle to a node recorded on a Tape. Values are matrices; a batch of
/// vectors is stored one per row.
class Var {
public:
    Var() = default;

    const Matrix& value() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
    int id() const { return id_; }
    Tape* tape() const { return tape_; }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    int id_ = -1;
};

/// Gradients of a scalar with respect to the leaves that lie on a path to it.
/// Leaves that do not influence the output have no entry.
class Gradients {
public:
    bool has(const Var& leaf) const { return grads_.count(leaf.id()) != 0; }
    const Matrix& of(const Var& leaf) const;
    std::size_t size() const { return grads_.size(); }

private:
    friend class Tape;
    std::unordered_map<int, Matrix> grads_;
};

/// Append-only record of primitive operations. Nodes are stored in creation
/// order, which is a topological order, so the reverse sweep is a single pass.
class Tape {
public:
    using BackwardFn = std::function<void(const Matrix& grad_out, const Matrix& out_value, Tape& tape)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Trainable leaf; receives a gradient when it influences the output.
    Var leaf(Matrix value);
    /// Non-trainable input.
    Var constant(Matrix value);

    /// Records an op result. `parents` decides whether the node needs a gradient.
    Var record(Matrix value, std::initializer_list<Var> parents, BackwardFn backward);

    /// Reverse-mode sweep from a 1x1 output. Throws std::invalid_argument for
    /// non-scalar outputs or vars from another tape.
    Gradients backward(const Var& output);

    const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
    std::size_t size() const { return nodes_.size(); }
    /// Number of nodes whose backward function ran during the last sweep.
    std::size_t last_backward_visits() const { return last_visits_; }

    /// Adds `g` into the pending gradient of node `id` (no-op for constants).
    void accumulate(int id, const Matrix& g);

private:
    struct Node {
        Matrix value;
        bool requires_grad = false;
        bool is_leaf = false;
        BackwardFn backward;
    };

    std::deque<Node> nodes_;
    std::vector<Matrix> pending_;
    std::vector<char> has_pending_;
    std::size_t last_visits_ = 0;
};

// Elementwise and shape ops. All operands must live on the same tape.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
/// a + row, with a 1 x cols row broadcast down the rows of a.
Var add_row(const Var& a, const Var& row);
/// a ⊙ row, with a 1 x cols row broadcast down the rows of a.
Var mul_row(const Var& a, const Var& row);
/// a ⊙ col, with a rows x 1 column broadcast across the columns of a.
Var mul_col(const Var& a, const Var& col);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var matmul(const Var& a, const Var& b);
Var square(const Var& a);
Var relu(const Var& a);
Var sigmoid(const Var& a);
/// Tanh approximation of GELU.
Var gelu(const Var& a);
/// Clamp to [lo, hi]; the gradient is zero where the clamp is active.
Var clamp(const Var& a, double lo, double hi);
/// Row-wise layer normalization with affine gamma/beta (both 1 x cols).
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);
/// Squared Euclidean norm of each row (rows x 1).
Var row_sq_norm(const Var& a);
/// Euclidean norm of each row (rows x 1); the gradient at a zero row is zero.
Var row_norm(const Var& a);
/// Sum of all entries (1 x 1).
Var sum(const Var& a);
Var concat_cols(const Var& a, const Var& b);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);

// Plain (untaped) activations shared with the fast evaluation path.
Matrix gelu_value(const Matrix& x);
Matrix sigmoid_value(const Matrix& x);
Matrix layer_norm_value(const Matrix& x, const Matrix& gamma, const Matrix& beta, double eps = 1e-5);

}  // namespace condor::nn
