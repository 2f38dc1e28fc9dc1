#include "condor/nn/mlp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace condor::nn {

void ParameterStore::add(std::string name, Matrix value) {
    m1_.push_back(Matrix::Zero(value.rows(), value.cols()));
    m2_.push_back(Matrix::Zero(value.rows(), value.cols()));
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
}

std::size_t ParameterStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
    return n;
}

double& ParameterStore::scalar(std::size_t flat_index) {
    for (auto& v : values_) {
        const auto sz = static_cast<std::size_t>(v.size());
        if (flat_index < sz) return v.data()[flat_index];
        flat_index -= sz;
    }
    throw std::out_of_range("flat parameter index out of range");
}

double ParameterStore::scalar(std::size_t flat_index) const {
    return const_cast<ParameterStore*>(this)->scalar(flat_index);
}

std::vector<Var> ParameterStore::bind(Tape& tape) const {
    std::vector<Var> out;
    out.reserve(values_.size());
    for (const auto& v : values_) out.push_back(tape.leaf(v));
    return out;
}

std::vector<Matrix> ParameterStore::collect(const Gradients& grads, const std::vector<Var>& bound) const {
    if (bound.size() != values_.size()) throw std::invalid_argument("bound parameter count mismatch");
    std::vector<Matrix> out;
    out.reserve(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (grads.has(bound[i])) {
            out.push_back(grads.of(bound[i]));
        } else {
            out.push_back(Matrix::Zero(values_[i].rows(), values_[i].cols()));
        }
    }
    return out;
}

void MlpSpec::validate() const {
    if (input_dim < 1 || output_dim < 1 || layers < 1 || (layers > 1 && hidden_width < 1))
        throw std::invalid_argument("invalid MLP spec");
}

namespace {

int layer_in(const MlpSpec& s, int layer) { return layer == 0 ? s.input_dim : s.hidden_width; }
int layer_out(const MlpSpec& s, int layer) { return layer == s.layers - 1 ? s.output_dim : s.hidden_width; }

std::string pname(int layer, const char* what) {
    std::ostringstream os;
    os << "layer" << layer << '.' << what;
    return os.str();
}

}  // namespace

ParameterStore init_mlp(const MlpSpec& spec, std::mt19937_64& rng) {
    spec.validate();
    ParameterStore store;
    for (int l = 0; l < spec.layers; ++l) {
        const int in = layer_in(spec, l), out = layer_out(spec, l);
        const double bound = std::sqrt(1.0 / in);
        std::uniform_real_distribution<double> u(-bound, bound);
        Matrix w(in, out), b(1, out);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
        for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = u(rng);
        store.add(pname(l, "weight"), std::move(w));
        store.add(pname(l, "bias"), std::move(b));
        if (l + 1 < spec.layers) {
            store.add(pname(l, "ln_gamma"), Matrix::Ones(1, out));
            store.add(pname(l, "ln_beta"), Matrix::Zero(1, out));
        }
    }
    return store;
}

void check_layout(const MlpSpec& spec, const ParameterStore& params) {
    spec.validate();
    std::size_t k = 0;
    auto expect = [&](const std::string& name, int rows, int cols) {
        if (k >= params.size() || params.name(k) != name || params.value(k).rows() != rows ||
            params.value(k).cols() != cols) {
            throw std::invalid_argument("parameter layout mismatch at " + name);
        }
        ++k;
    };
    for (int l = 0; l < spec.layers; ++l) {
        const int in = layer_in(spec, l), out = layer_out(spec, l);
        expect(pname(l, "weight"), in, out);
        expect(pname(l, "bias"), 1, out);
        if (l + 1 < spec.layers) {
            expect(pname(l, "ln_gamma"), 1, out);
            expect(pname(l, "ln_beta"), 1, out);
        }
    }
    if (k != params.size()) throw std::invalid_argument("parameter store has extra entries");
}

Var mlp_forward(const MlpSpec& spec, const std::vector<Var>& bound, const Var& input) {
    if (input.cols() != spec.input_dim) {
        std::ostringstream msg;
        msg << "MLP input has " << input.cols() << " columns, expected " << spec.input_dim;
        throw std::invalid_argument(msg.str());
    }
    Var h = input;
    std::size_t k = 0;
    for (int l = 0; l < spec.layers; ++l) {
        h = add_row(matmul(h, bound.at(k)), bound.at(k + 1));
        k += 2;
        if (l + 1 < spec.layers) {
            h = gelu(layer_norm(h, bound.at(k), bound.at(k + 1)));
            k += 2;
        }
    }
    return spec.output == OutputActivation::sigmoid ? sigmoid(h) : h;
}

Matrix mlp_eval(const MlpSpec& spec, const ParameterStore& params, const Matrix& input) {
    if (input.cols() != spec.input_dim) throw std::invalid_argument("MLP input width mismatch");
    Matrix h = input;
    std::size_t k = 0;
    for (int l = 0; l < spec.layers; ++l) {
        Matrix z = h * params.value(k);
        z.rowwise() += params.value(k + 1).row(0);
        k += 2;
        if (l + 1 < spec.layers) {
            h = gelu_value(layer_norm_value(z, params.value(k), params.value(k + 1)));
            k += 2;
        } else {
            h = std::move(z);
        }
    }
    return spec.output == OutputActivation::sigmoid ? sigmoid_value(h) : h;
}

}  // namespace condor::nn
