#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "condor/errors.hpp"
#include "condor/nn/adamw.hpp"
#include "condor/nn/mlp.hpp"
#include "condor/nn/tape.hpp"

using namespace condor;
using namespace condor::nn;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// Central-difference gradient of f with respect to every entry of p.
Matrix numeric_grad(const std::function<double()>& f, Matrix& p, double h = 1e-5) {
    Matrix g(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double saved = p.data()[i];
        p.data()[i] = saved + h;
        const double up = f();
        p.data()[i] = saved - h;
        const double down = f();
        p.data()[i] = saved;
        g.data()[i] = (up - down) / (2.0 * h);
    }
    return g;
}

double rel_err(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double x = a.data()[i], y = b.data()[i];
        worst = std::max(worst, std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-6}));
    }
    return worst;
}

}  // namespace

TEST_CASE("square gradient") {
    Tape t;
    const Var w = t.leaf(scalar(3.0));
    const Gradients g = t.backward(sum(square(w)));
    CHECK(g.of(w)(0, 0) == 6.0);
}

TEST_CASE("product rule") {
    Tape t;
    const Var a = t.leaf(scalar(2.0)), b = t.leaf(scalar(5.0));
    const Gradients g = t.backward(mul(a, b));
    CHECK(g.of(a)(0, 0) == 5.0);
    CHECK(g.of(b)(0, 0) == 2.0);
}

TEST_CASE("leaves off the output path have no gradient entry") {
    Tape t;
    const Var a = t.leaf(scalar(2.0)), unused = t.leaf(scalar(1.0));
    const Var c = t.constant(scalar(4.0));
    const Gradients g = t.backward(mul(a, c));
    CHECK(g.has(a));
    CHECK_FALSE(g.has(unused));
    CHECK_FALSE(g.has(c));
    CHECK(g.size() == 1);
    CHECK_THROWS_AS(g.of(unused), std::out_of_range);
}

TEST_CASE("backward rejects non-scalar outputs") {
    Tape t;
    const Var a = t.leaf(Matrix::Ones(2, 2));
    CHECK_THROWS_AS(t.backward(a), std::invalid_argument);
}

TEST_CASE("backward visits each reachable node exactly once") {
    Tape t;
    const Var x = t.leaf(scalar(1.5));
    // A diamond: x feeds two branches that rejoin.
    const Var a = square(x), b = scale(x, 3.0);
    const Var out = add(add(a, b), mul(a, b));
    const std::size_t before = t.size();
    const Gradients g = t.backward(out);
    CHECK(t.last_backward_visits() == before);
    // d/dx [x^2 + 3x + 3x^3] = 2x + 3 + 9x^2
    CHECK(g.of(x)(0, 0) == doctest::Approx(2 * 1.5 + 3 + 9 * 1.5 * 1.5));
}

TEST_CASE("every primitive matches finite differences") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto random = [&](Eigen::Index r, Eigen::Index c) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
        return m;
    };
    Matrix a = random(3, 4), b = random(3, 4), row = random(1, 4), col = random(3, 1), w = random(4, 2);
    Matrix gamma = random(1, 4), beta = random(1, 4);
    // Weighted sum makes every output entry matter.
    const Matrix weights4 = random(3, 4), weights2 = random(3, 2), weights1 = random(3, 1), weights6 = random(3, 6);

    using Build = std::function<Var(Tape&, Var, Var, Var, Var, Var, Var, Var)>;
    const std::vector<std::pair<const char*, Build>> cases = {
        {"add", [&](Tape& t, Var A, Var B, Var, Var, Var, Var, Var) { return sum(mul(add(A, B), t.constant(weights4))); }},
        {"sub", [&](Tape& t, Var A, Var B, Var, Var, Var, Var, Var) { return sum(mul(sub(A, B), t.constant(weights4))); }},
        {"mul", [&](Tape& t, Var A, Var B, Var, Var, Var, Var, Var) { return sum(mul(mul(A, B), t.constant(weights4))); }},
        {"add_row", [&](Tape& t, Var A, Var, Var R, Var, Var, Var, Var) { return sum(mul(add_row(A, R), t.constant(weights4))); }},
        {"mul_row", [&](Tape& t, Var A, Var, Var R, Var, Var, Var, Var) { return sum(mul(mul_row(A, R), t.constant(weights4))); }},
        {"mul_col", [&](Tape& t, Var A, Var, Var, Var C, Var, Var, Var) { return sum(mul(mul_col(A, C), t.constant(weights4))); }},
        {"scale", [&](Tape& t, Var A, Var, Var, Var, Var, Var, Var) { return sum(mul(scale(A, -2.5), t.constant(weights4))); }},
        {"add_scalar", [&](Tape& t, Var A, Var, Var, Var, Var, Var, Var) { return sum(mul(add_scalar(A, 0.7), t.constant(weights4))); }},
        {"matmul", [&](Tape& t, Var A, Var, Var, Var, Var W, Var, Var) { return sum(mul(matmul(A, W), t.constant(weights2))); }},
        {"square", [&](Tape& t, Var A, Var, Var, Var, Var, Var, Var) { return sum(mul(square(A), t.constant(weights4))); }},
        {"relu", [&](Tape& t, Var A, Var, Var, Var, Var, Var, Var) { return sum(mul(relu(A), t.constant(weights4))); }},
        {"sigmoid", [&](Tape& t, Var A, Var, Var, Var, Var, Var, Var) { return sum(mul(sigmoid(A), t.constant(weights4))); }},
        {"gelu", [&](Tape& t, Var A, Var, Var, Var, Var, Var, Var) { return sum(mul(gelu(A), t.constant(weights4))); }},
        {"clamp", [&](Tape& t, Var A, Var, Var, Var, Var, Var, Var) { return sum(mul(clamp(A, -0.5, 0.5), t.constant(weights4))); }},
        {"layer_norm", [&](Tape& t, Var A, Var, Var, Var, Var, Var G, Var Bt) { return sum(mul(layer_norm(A, G, Bt), t.constant(weights4))); }},
        {"row_sq_norm", [&](Tape& t, Var A, Var, Var, Var, Var, Var, Var) { return sum(mul(row_sq_norm(A), t.constant(weights1))); }},
        {"row_norm", [&](Tape& t, Var A, Var, Var, Var, Var, Var, Var) { return sum(mul(row_norm(A), t.constant(weights1))); }},
        {"concat_cols", [&](Tape& t, Var A, Var, Var, Var, Var W, Var, Var) { return sum(mul(concat_cols(A, slice_cols(matmul(A, W), 0, 2)), t.constant(weights6))); }},
        {"slice_cols", [&](Tape& t, Var A, Var, Var, Var, Var, Var, Var) { return sum(mul(slice_cols(A, 1, 2), t.constant(weights2))); }},
    };
    for (const auto& [label, build] : cases) {
        const std::string name = label;
        CAPTURE(name);
        std::vector<Matrix*> params = {&a, &b, &row, &col, &w, &gamma, &beta};
        auto eval = [&](Tape& t, std::vector<Var>& leaves) {
            leaves.clear();
            for (Matrix* p : params) leaves.push_back(t.leaf(*p));
            return build(t, leaves[0], leaves[1], leaves[2], leaves[3], leaves[4], leaves[5], leaves[6]);
        };
        Tape t;
        std::vector<Var> leaves;
        const Gradients g = t.backward(eval(t, leaves));
        for (std::size_t k = 0; k < params.size(); ++k) {
            if (!g.has(leaves[k])) continue;
            const Matrix fd = numeric_grad(
                [&] {
                    Tape t2;
                    std::vector<Var> l2;
                    return eval(t2, l2).value()(0, 0);
                },
                *params[k]);
            CHECK(rel_err(g.of(leaves[k]), fd) < 1e-6);
        }
    }
}

TEST_CASE("row_norm has zero gradient at a zero row") {
    Tape t;
    const Var z = t.leaf(Matrix::Zero(1, 3));
    CHECK(t.backward(sum(row_norm(z))).of(z).isZero());
}

TEST_CASE("clamp blocks gradient where active") {
    Tape t;
    const Var x = t.leaf((Matrix(1, 3) << -2.0, 0.1, 3.0).finished());
    const Matrix g = t.backward(sum(clamp(x, -1.0, 1.0))).of(x);
    CHECK(g == (Matrix(1, 3) << 0.0, 1.0, 0.0).finished());
}

TEST_CASE("activations at reference points") {
    CHECK(gelu_value(scalar(0.0))(0, 0) == 0.0);
    CHECK(sigmoid_value(scalar(0.0))(0, 0) == 0.5);
    // Constant rows normalize to zero before the affine terms.
    const Matrix ln = layer_norm_value(Matrix::Constant(2, 5, 3.0), Matrix::Ones(1, 5), Matrix::Zero(1, 5));
    CHECK(ln.isZero());
    // Tanh approximation: gelu(1) = 0.5 (1 + tanh(sqrt(2/pi) (1 + 0.044715))).
    CHECK(gelu_value(scalar(1.0))(0, 0) ==
          doctest::Approx(0.5 * (1.0 + std::tanh(0.7978845608028654 * 1.044715))).epsilon(1e-15));
}

TEST_CASE("mlp with zero weights outputs its last bias") {
    std::mt19937_64 rng(0);
    const MlpSpec spec{3, 6, 3, 2, OutputActivation::linear};
    ParameterStore p = init_mlp(spec, rng);
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p.name(i).find("ln_gamma") == std::string::npos) p.value(i).setZero();
    p.value(p.size() - 1) << 0.25, -4.0;
    const Matrix out = mlp_eval(spec, p, Matrix::Random(5, 3));
    for (Eigen::Index r = 0; r < 5; ++r) CHECK(out.row(r) == (Matrix(1, 2) << 0.25, -4.0).finished());
}

TEST_CASE("mlp layout and shape checks") {
    std::mt19937_64 rng(1);
    const MlpSpec spec{2, 8, 3, 2, OutputActivation::sigmoid};
    const ParameterStore p = init_mlp(spec, rng);
    CHECK(p.size() == 3 * 2 + 2 * 2);
    CHECK_NOTHROW(check_layout(spec, p));
    CHECK_THROWS_AS(check_layout({2, 9, 3, 2, OutputActivation::linear}, p), std::invalid_argument);
    CHECK_THROWS_AS(mlp_eval(spec, p, Matrix::Zero(1, 3)), std::invalid_argument);
    Tape t;
    CHECK_THROWS_AS(mlp_forward(spec, p.bind(t), t.constant(Matrix::Zero(1, 3))), std::invalid_argument);
    // Initialization bound is sqrt(1 / fan_in).
    CHECK(p.value(0).cwiseAbs().maxCoeff() <= std::sqrt(0.5));
    CHECK(p.value(4).cwiseAbs().maxCoeff() <= std::sqrt(1.0 / 8));
    const Matrix y = mlp_eval(spec, p, Matrix::Random(10, 2));
    CHECK(y.minCoeff() > 0.0);
    CHECK(y.maxCoeff() < 1.0);
}

TEST_CASE("taped and plain forward passes agree") {
    std::mt19937_64 rng(2);
    const MlpSpec spec{3, 7, 3, 2, OutputActivation::linear};
    const ParameterStore p = init_mlp(spec, rng);
    const Matrix x = Matrix::Random(4, 3);
    Tape t;
    CHECK((mlp_forward(spec, p.bind(t), t.constant(x)).value() - mlp_eval(spec, p, x)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("random tiny networks: autodiff agrees with finite differences") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> width(1, 8), layers(1, 3), dim(1, 4);
    for (int trial = 0; trial < 20; ++trial) {
        const MlpSpec spec{dim(rng), width(rng), layers(rng), dim(rng),
                           trial % 2 ? OutputActivation::sigmoid : OutputActivation::linear};
        ParameterStore p = init_mlp(spec, rng);
        const Matrix x = Matrix::Random(3, spec.input_dim);
        const Matrix target = Matrix::Random(3, spec.output_dim);
        auto loss = [&](Tape& t, const std::vector<Var>& bound) {
            const Var y = mlp_forward(spec, bound, t.constant(x));
            return sum(square(sub(y, t.constant(target))));
        };
        Tape t;
        const auto bound = p.bind(t);
        const Gradients g = t.backward(loss(t, bound));
        const auto grads = p.collect(g, bound);
        for (std::size_t k = 0; k < p.size(); ++k) {
            const Matrix fd = numeric_grad(
                [&] {
                    Tape t2;
                    return loss(t2, p.bind(t2)).value()(0, 0);
                },
                p.value(k));
            CHECK(rel_err(grads[k], fd) < 1e-4);
        }
    }
}

TEST_CASE("adamw first step from the hand-evaluated recurrence") {
    ParameterStore p;
    p.add("w", scalar(1.0));
    AdamWConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.weight_decay = 0.0;
    adamw_step(p, {scalar(0.1)}, cfg);
    // m̂ = g, v̂ = g², so the step is lr·g/(|g| + eps).
    CHECK(p.value(0)(0, 0) == doctest::Approx(1.0 - 0.01 * 0.1 / (0.1 + 1e-8)).epsilon(1e-14));
    CHECK(p.value(0)(0, 0) == doctest::Approx(0.99).epsilon(1e-6));
    CHECK(p.step() == 1);
}

TEST_CASE("adamw decoupled decay and fixed point") {
    ParameterStore p;
    p.add("w", scalar(1.0));
    AdamWConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.weight_decay = 0.1;
    adamw_step(p, {scalar(0.0)}, cfg);
    CHECK(p.value(0)(0, 0) == doctest::Approx(0.999).epsilon(1e-15));
    cfg.weight_decay = 0.0;
    const Matrix before = p.value(0);
    adamw_step(p, {scalar(0.0)}, cfg);
    CHECK(p.value(0) == before);
}

TEST_CASE("adamw rejects bad gradients without touching parameters") {
    ParameterStore p;
    p.add("w", Matrix::Ones(2, 2));
    const AdamWConfig cfg;
    Matrix bad = Matrix::Zero(2, 2);
    bad(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(adamw_step(p, {bad}, cfg), NumericDivergence);
    CHECK(p.value(0) == Matrix::Ones(2, 2));
    CHECK(p.step() == 0);
    CHECK_THROWS_AS(adamw_step(p, {Matrix::Zero(1, 2)}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(adamw_step(p, {}, cfg), std::invalid_argument);
}

TEST_CASE("adamw matches a scalar reference over many steps") {
    ParameterStore p;
    p.add("w", scalar(0.3));
    AdamWConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.weight_decay = 0.01;
    double w = 0.3, m = 0.0, v = 0.0;
    for (int t = 1; t <= 50; ++t) {
        const double g = 2.0 * (w - 1.0);
        adamw_step(p, {scalar(2.0 * (p.value(0)(0, 0) - 1.0))}, cfg);
        w *= 1.0 - cfg.learning_rate * cfg.weight_decay;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        w -= cfg.learning_rate * (m / (1.0 - std::pow(0.9, t))) / (std::sqrt(v / (1.0 - std::pow(0.999, t))) + 1e-8);
    }
    CHECK(p.value(0)(0, 0) == doctest::Approx(w).epsilon(1e-12));
}
