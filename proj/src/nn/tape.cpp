#include "condor/nn/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace condor::nn {

namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

Tape& same_tape(const Var& a, const Var& b) {
    if (!a.valid() || a.tape() != b.tape()) throw std::invalid_argument("operands live on different tapes");
    return *a.tape();
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

const Matrix& Var::value() const {
    if (!tape_) throw std::logic_error("value() on an empty Var");
    return tape_->value(id_);
}

const Matrix& Gradients::of(const Var& leaf) const {
    auto it = grads_.find(leaf.id());
    if (it == grads_.end()) throw std::out_of_range("no gradient recorded for this leaf");
    return it->second;
}

Var Tape::leaf(Matrix value) {
    nodes_.push_back(Node{std::move(value), true, true, nullptr});
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::constant(Matrix value) {
    nodes_.push_back(Node{std::move(value), false, false, nullptr});
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Matrix value, std::initializer_list<Var> parents, BackwardFn backward) {
    bool needs = false;
    for (const Var& p : parents) {
        if (p.tape() != this) throw std::invalid_argument("parent recorded on another tape");
        needs = needs || requires_grad(p.id());
    }
    nodes_.push_back(Node{std::move(value), needs, false, needs ? std::move(backward) : nullptr});
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::accumulate(int id, const Matrix& g) {
    const auto i = static_cast<std::size_t>(id);
    if (!nodes_[i].requires_grad) return;
    if (has_pending_[i]) {
        pending_[i] += g;
    } else {
        pending_[i] = g;
        has_pending_[i] = 1;
    }
}

Gradients Tape::backward(const Var& output) {
    if (output.tape() != this) throw std::invalid_argument("output belongs to another tape");
    if (output.rows() != 1 || output.cols() != 1) throw std::invalid_argument("backward needs a scalar (1x1) output");

    pending_.assign(nodes_.size(), Matrix());
    has_pending_.assign(nodes_.size(), 0);
    last_visits_ = 0;
    Gradients out;
    if (!requires_grad(output.id())) return out;

    accumulate(output.id(), Matrix::Ones(1, 1));
    for (int id = output.id(); id >= 0; --id) {
        const auto i = static_cast<std::size_t>(id);
        if (!has_pending_[i]) continue;
        ++last_visits_;
        Node& node = nodes_[i];
        if (node.is_leaf) {
            out.grads_.emplace(id, std::move(pending_[i]));
        } else if (node.backward) {
            node.backward(pending_[i], node.value, *this);
        }
        pending_[i] = Matrix();
    }
    pending_.clear();
    has_pending_.clear();
    return out;
}

Var add(const Var& a, const Var& b) {
    Tape& t = same_tape(a, b);
    require_same_shape(a, b, "add");
    const int ia = a.id(), ib = b.id();
    return t.record(a.value() + b.value(), {a, b}, [ia, ib](const Matrix& g, const Matrix&, Tape& tp) {
        tp.accumulate(ia, g);
        tp.accumulate(ib, g);
    });
}

Var sub(const Var& a, const Var& b) {
    Tape& t = same_tape(a, b);
    require_same_shape(a, b, "sub");
    const int ia = a.id(), ib = b.id();
    return t.record(a.value() - b.value(), {a, b}, [ia, ib](const Matrix& g, const Matrix&, Tape& tp) {
        tp.accumulate(ia, g);
        tp.accumulate(ib, -g);
    });
}

Var mul(const Var& a, const Var& b) {
    Tape& t = same_tape(a, b);
    require_same_shape(a, b, "mul");
    const int ia = a.id(), ib = b.id();
    return t.record(a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](const Matrix& g, const Matrix&, Tape& tp) {
        if (tp.requires_grad(ia)) tp.accumulate(ia, g.cwiseProduct(tp.value(ib)));
        if (tp.requires_grad(ib)) tp.accumulate(ib, g.cwiseProduct(tp.value(ia)));
    });
}

Var add_row(const Var& a, const Var& row) {
    Tape& t = same_tape(a, row);
    if (row.rows() != 1 || row.cols() != a.cols()) throw std::invalid_argument("add_row: shape mismatch");
    const int ia = a.id(), ir = row.id();
    Matrix v = a.value().rowwise() + row.value().row(0);
    return t.record(std::move(v), {a, row}, [ia, ir](const Matrix& g, const Matrix&, Tape& tp) {
        tp.accumulate(ia, g);
        if (tp.requires_grad(ir)) tp.accumulate(ir, g.colwise().sum());
    });
}

Var mul_row(const Var& a, const Var& row) {
    Tape& t = same_tape(a, row);
    if (row.rows() != 1 || row.cols() != a.cols()) throw std::invalid_argument("mul_row: shape mismatch");
    const int ia = a.id(), ir = row.id();
    Matrix v = a.value().array().rowwise() * row.value().row(0).array();
    return t.record(std::move(v), {a, row}, [ia, ir](const Matrix& g, const Matrix&, Tape& tp) {
        if (tp.requires_grad(ia)) {
            Matrix ga = g.array().rowwise() * tp.value(ir).row(0).array();
            tp.accumulate(ia, ga);
        }
        if (tp.requires_grad(ir)) tp.accumulate(ir, g.cwiseProduct(tp.value(ia)).colwise().sum());
    });
}

Var mul_col(const Var& a, const Var& col) {
    Tape& t = same_tape(a, col);
    if (col.cols() != 1 || col.rows() != a.rows()) throw std::invalid_argument("mul_col: shape mismatch");
    const int ia = a.id(), ic = col.id();
    Matrix v = a.value().array().colwise() * col.value().col(0).array();
    return t.record(std::move(v), {a, col}, [ia, ic](const Matrix& g, const Matrix&, Tape& tp) {
        if (tp.requires_grad(ia)) {
            Matrix ga = g.array().colwise() * tp.value(ic).col(0).array();
            tp.accumulate(ia, ga);
        }
        if (tp.requires_grad(ic)) tp.accumulate(ic, g.cwiseProduct(tp.value(ia)).rowwise().sum());
    });
}

Var scale(const Var& a, double s) {
    const int ia = a.id();
    return a.tape()->record(a.value() * s, {a}, [ia, s](const Matrix& g, const Matrix&, Tape& tp) { tp.accumulate(ia, g * s); });
}

Var add_scalar(const Var& a, double s) {
    const int ia = a.id();
    Matrix v = a.value().array() + s;
    return a.tape()->record(std::move(v), {a}, [ia](const Matrix& g, const Matrix&, Tape& tp) { tp.accumulate(ia, g); });
}

Var matmul(const Var& a, const Var& b) {
    Tape& t = same_tape(a, b);
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
    const int ia = a.id(), ib = b.id();
    return t.record(a.value() * b.value(), {a, b}, [ia, ib](const Matrix& g, const Matrix&, Tape& tp) {
        if (tp.requires_grad(ia)) tp.accumulate(ia, g * tp.value(ib).transpose());
        if (tp.requires_grad(ib)) tp.accumulate(ib, tp.value(ia).transpose() * g);
    });
}

Var square(const Var& a) {
    const int ia = a.id();
    return a.tape()->record(a.value().cwiseAbs2(), {a}, [ia](const Matrix& g, const Matrix&, Tape& tp) {
        tp.accumulate(ia, 2.0 * g.cwiseProduct(tp.value(ia)));
    });
}

Var relu(const Var& a) {
    const int ia = a.id();
    return a.tape()->record(a.value().cwiseMax(0.0), {a}, [ia](const Matrix& g, const Matrix&, Tape& tp) {
        Matrix mask = (tp.value(ia).array() > 0.0).cast<double>();
        tp.accumulate(ia, g.cwiseProduct(mask));
    });
}

Matrix sigmoid_value(const Matrix& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

Var sigmoid(const Var& a) {
    const int ia = a.id();
    return a.tape()->record(sigmoid_value(a.value()), {a}, [ia](const Matrix& g, const Matrix& out, Tape& tp) {
        const auto s = out.array();
        tp.accumulate(ia, (g.array() * s * (1.0 - s)).matrix());
    });
}

Matrix gelu_value(const Matrix& x) {
    const auto xa = x.array();
    const auto inner = kGeluC * (xa + kGeluA * xa.cube());
    return (0.5 * xa * (1.0 + inner.tanh())).matrix();
}

Var gelu(const Var& a) {
    const int ia = a.id();
    return a.tape()->record(gelu_value(a.value()), {a}, [ia](const Matrix& g, const Matrix&, Tape& tp) {
        const auto x = tp.value(ia).array();
        const Eigen::ArrayXXd th = (kGeluC * (x + kGeluA * x.cube())).tanh();
        const Eigen::ArrayXXd d =
            0.5 * (1.0 + th) + 0.5 * x * (1.0 - th.square()) * kGeluC * (1.0 + 3.0 * kGeluA * x.square());
        tp.accumulate(ia, (g.array() * d).matrix());
    });
}

Var clamp(const Var& a, double lo, double hi) {
    const int ia = a.id();
    return a.tape()->record(a.value().cwiseMax(lo).cwiseMin(hi), {a}, [ia, lo, hi](const Matrix& g, const Matrix&, Tape& tp) {
        const auto x = tp.value(ia).array();
        Matrix mask = ((x > lo) && (x < hi)).cast<double>();
        tp.accumulate(ia, g.cwiseProduct(mask));
    });
}

Matrix layer_norm_value(const Matrix& x, const Matrix& gamma, const Matrix& beta, double eps) {
    const Eigen::VectorXd mean = x.rowwise().mean();
    Matrix centered = x.colwise() - mean;
    const Eigen::VectorXd inv_std =
        ((centered.array().square().rowwise().mean()) + eps).rsqrt().matrix();
    Matrix xhat = centered.array().colwise() * inv_std.array();
    Matrix out = xhat.array().rowwise() * gamma.row(0).array();
    out.rowwise() += beta.row(0);
    return out;
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
    Tape& t = *x.tape();
    if (gamma.tape() != &t || beta.tape() != &t) throw std::invalid_argument("layer_norm: operands on different tapes");
    if (gamma.rows() != 1 || gamma.cols() != x.cols() || beta.rows() != 1 || beta.cols() != x.cols())
        throw std::invalid_argument("layer_norm: affine shape mismatch");
    const Eigen::VectorXd mean = x.value().rowwise().mean();
    Matrix centered = x.value().colwise() - mean;
    Eigen::VectorXd inv_std = ((centered.array().square().rowwise().mean()) + eps).rsqrt().matrix();
    Matrix xhat = centered.array().colwise() * inv_std.array();
    Matrix out = xhat.array().rowwise() * gamma.value().row(0).array();
    out.rowwise() += beta.value().row(0);
    const int ix = x.id(), ig = gamma.id(), ib = beta.id();
    return t.record(std::move(out), {x, gamma, beta},
                    [ix, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](const Matrix& g, const Matrix&, Tape& tp) {
                        if (tp.requires_grad(ig)) tp.accumulate(ig, g.cwiseProduct(xhat).colwise().sum());
                        if (tp.requires_grad(ib)) tp.accumulate(ib, g.colwise().sum());
                        if (tp.requires_grad(ix)) {
                            const Matrix dxhat = g.array().rowwise() * tp.value(ig).row(0).array();
                            const Eigen::VectorXd m1 = dxhat.rowwise().mean();
                            const Eigen::VectorXd m2 = dxhat.cwiseProduct(xhat).rowwise().mean();
                            Matrix dx = (dxhat.colwise() - m1) - (xhat.array().colwise() * m2.array()).matrix();
                            dx = dx.array().colwise() * inv_std.array();
                            tp.accumulate(ix, dx);
                        }
                    });
}

Var row_sq_norm(const Var& a) {
    const int ia = a.id();
    Matrix v = a.value().rowwise().squaredNorm();
    return a.tape()->record(std::move(v), {a}, [ia](const Matrix& g, const Matrix&, Tape& tp) {
        Matrix ga = 2.0 * (tp.value(ia).array().colwise() * g.col(0).array()).matrix();
        tp.accumulate(ia, ga);
    });
}

Var row_norm(const Var& a) {
    const int ia = a.id();
    Matrix v = a.value().rowwise().norm();
    return a.tape()->record(std::move(v), {a}, [ia](const Matrix& g, const Matrix& norm, Tape& tp) {
        Eigen::ArrayXd coef(norm.rows());
        for (Eigen::Index r = 0; r < norm.rows(); ++r) coef[r] = norm(r, 0) > 0.0 ? g(r, 0) / norm(r, 0) : 0.0;
        Matrix ga = tp.value(ia).array().colwise() * coef;
        tp.accumulate(ia, ga);
    });
}

Var sum(const Var& a) {
    const int ia = a.id();
    Matrix v(1, 1);
    v(0, 0) = a.value().sum();
    const Eigen::Index r = a.rows(), c = a.cols();
    return a.tape()->record(std::move(v), {a}, [ia, r, c](const Matrix& g, const Matrix&, Tape& tp) {
        tp.accumulate(ia, Matrix::Constant(r, c, g(0, 0)));
    });
}

Var concat_cols(const Var& a, const Var& b) {
    Tape& t = same_tape(a, b);
    if (a.rows() != b.rows()) throw std::invalid_argument("concat_cols: row count mismatch");
    Matrix v(a.rows(), a.cols() + b.cols());
    v << a.value(), b.value();
    const int ia = a.id(), ib = b.id();
    const Eigen::Index ca = a.cols(), cb = b.cols();
    return t.record(std::move(v), {a, b}, [ia, ib, ca, cb](const Matrix& g, const Matrix&, Tape& tp) {
        if (tp.requires_grad(ia)) tp.accumulate(ia, g.leftCols(ca));
        if (tp.requires_grad(ib)) tp.accumulate(ib, g.rightCols(cb));
    });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > a.cols()) throw std::invalid_argument("slice_cols: out of range");
    const int ia = a.id();
    const Eigen::Index r = a.rows(), c = a.cols();
    Matrix v = a.value().middleCols(start, count);
    return a.tape()->record(std::move(v), {a}, [ia, r, c, start, count](const Matrix& g, const Matrix&, Tape& tp) {
        Matrix ga = Matrix::Zero(r, c);
        ga.middleCols(start, count) = g;
        tp.accumulate(ia, ga);
    });
}

}  // namespace condor::nn
