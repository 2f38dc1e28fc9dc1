#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "condor/errors.hpp"
#include "condor/learning.hpp"
#include "condor/synth.hpp"
#include "support.hpp"

using namespace condor;
using condor::testing::tiny_model;
using condor::testing::zero_network;

namespace {

double value_of(const nn::Var& v) { return v.value()(0, 0); }

// Single-demo training set in a [-1, 1]^n workspace so normalized == original.
TrainingSet unit_set(const Matrix& demo, double dt, int order = 1) {
    TrainingSet set;
    set.workspace = Workspace(-Vector::Ones(demo.cols()), Vector::Ones(demo.cols()));
    set.dim = static_cast<int>(demo.cols());
    set.order = order;
    set.dt = dt;
    set.goal = demo.row(demo.rows() - 1).transpose();
    set.demos.push_back({demo, Vector()});
    return set;
}

// 1-D model whose decoder outputs the constant `velocity`.
CondorModel constant_field_1d(double velocity, double dt) {
    ModelConfig cfg;
    cfg.dim = 1;
    cfg.dt = dt;
    cfg.arch.hidden_width = 4;
    CondorModel m = CondorModel::create(cfg, Workspace(Vector::Constant(1, -10.0), Vector::Constant(1, 10.0)),
                                        Vector::Zero(1));
    zero_network(m.decoder, Vector::Constant(1, velocity));
    return m;
}

double full_loss(const CondorModel& m, const std::vector<ImitationWindow>& imit, const StabilityBatch& stab,
                 const TrainConfig& cfg) {
    nn::Tape tape;
    const BoundModel bm = bind(m, tape);
    return value_of(total_loss(bm, imit, stab, cfg).total);
}

}  // namespace

TEST_CASE("imitation loss hand-unrolled 1-D case") {
    // x' = 0, dt = 1, targets 2 and 3 from x0 = 1: residuals 1 and 2.
    const CondorModel m = constant_field_1d(0.0, 1.0);
    ImitationWindow w{Vector::Constant(1, 1.0 / 10.0), Matrix(2, 1), Vector()};
    w.targets << 2.0 / 10.0, 3.0 / 10.0;
    nn::Tape tape;
    const double loss = value_of(imitation_loss(bind(m, tape), {w}));
    // Normalized units scale squared residuals by 1/10^2.
    CHECK(loss * 100.0 == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(std::abs(loss * 100.0 - 2.5) < 1e-10);
}

TEST_CASE("imitation loss matches an independent unroll with clipping") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const CondorModel m = tiny_model(1, 1, 4, 100 + trial);
        const int h = 1 + trial % 3;
        ImitationWindow w{Vector::Constant(1, u(rng)), Matrix(h, 1), Vector()};
        for (int k = 0; k < h; ++k) w.targets(k, 0) = u(rng);
        nn::Tape tape;
        const double loss = value_of(imitation_loss(bind(m, tape), {w}));

        double x = w.start[0], expected = 0.0;
        for (int k = 0; k < h; ++k) {
            const double f = task_derivative(m, Matrix::Constant(1, 1, x))(0, 0);
            const double pred = x + f * m.config.dt;
            expected += (w.targets(k, 0) - pred) * (w.targets(k, 0) - pred);
            x = std::clamp(pred, -1.0, 1.0);
        }
        CHECK(std::abs(loss - expected / h) < 1e-10);
    }
}

TEST_CASE("imitation loss is zero for a model that reproduces its targets") {
    const CondorModel m = constant_field_1d(0.5, 0.2);
    ImitationWindow w{Vector::Constant(1, 0.0), Matrix(3, 1), Vector()};
    w.targets << 0.1, 0.2, 0.3;  // 0.5 * 0.2 per step in normalized units
    nn::Tape tape;
    CHECK(std::abs(value_of(imitation_loss(bind(m, tape), {w}))) < 1e-20);
}

TEST_CASE("imitation loss averages over actual residual terms with truncated windows") {
    const CondorModel m = constant_field_1d(0.0, 1.0);
    ImitationWindow a{Vector::Zero(1), Matrix::Constant(1, 1, 0.1), Vector()};
    ImitationWindow b{Vector::Zero(1), Matrix::Constant(3, 1, 0.2), Vector()};
    nn::Tape tape;
    const double loss = value_of(imitation_loss(bind(m, tape), {a, b}));
    CHECK(loss == doctest::Approx((0.01 + 3 * 0.04) / 4.0));
}

TEST_CASE("pairwise and triplet terms match closed-form arithmetic") {
    nn::Tape tape;
    auto c = [&](double v) { return tape.constant(Matrix::Constant(1, 1, v)); };
    SUBCASE("pairwise hand case") {
        const double v = value_of(pairwise_term(c(0.4), c(0.1), c(0.0), 0.5));
        CHECK(std::abs(v - 0.25) < 1e-10);
    }
    SUBCASE("pairwise frozen encoder gives m squared") {
        CHECK(std::abs(value_of(pairwise_term(c(0.3), c(0.3), c(0.3), 0.2)) - 0.04) < 1e-15);
    }
    SUBCASE("pairwise satisfied") {
        CHECK(value_of(pairwise_term(c(1.0), c(1.0), c(0.0), 0.5)) == 0.0);
    }
    SUBCASE("triplet hand case") {
        // d(a,p)^2 = 0.04, d(a,n)^2 = 0.01.
        const double v = value_of(triplet_term(c(0.2), c(0.0), c(0.1), 1e-4));
        CHECK(std::abs(v - 0.0301) < 1e-10);
    }
    SUBCASE("triplet coincident points give m") {
        CHECK(std::abs(value_of(triplet_term(c(0.7), c(0.7), c(0.7), 0.03)) - 0.03) < 1e-15);
    }
    SUBCASE("triplet satisfied") {
        CHECK(value_of(triplet_term(c(0.0), c(0.0), c(1.0), 0.5)) == 0.0);
    }
}

TEST_CASE("coincident traces reduce both variants to their hinge values") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        nn::Tape tape;
        Matrix y(1, 2), prev(1, 2);
        y << u(rng), u(rng);
        prev << u(rng), u(rng);
        const double m = 0.5 * (u(rng) + 1.0);
        const double d = (y - prev).norm();
        const nn::Var a = tape.constant(y), p = tape.constant(prev);
        CHECK(std::abs(value_of(pairwise_term(a, a, p, m)) - std::pow(std::max(0.0, m - d), 2)) < 1e-14);
        CHECK(std::abs(value_of(triplet_term(a, a, p, m)) - std::max(0.0, m - d * d)) < 1e-14);
    }
}

TEST_CASE("stability loss equals the trace-based hand computation") {
    const CondorModel m = tiny_model(2, 1, 6, 21);
    StabilityBatch batch{Matrix(3, 2), Matrix(3, 0)};
    batch.starts << 0.3, -0.2, -0.9, 0.8, 0.0, 0.5;
    const double margin = 0.05;
    for (LossVariant variant : {LossVariant::pairwise, LossVariant::triplet}) {
        for (int window : {1, 3}) {
            nn::Tape tape;
            const double loss = value_of(stability_loss(bind(m, tape), batch, window, margin, variant));
            double expected = 0.0;
            for (int b = 0; b < 3; ++b) {
                const RolloutTrace tr = rollout_latent_pair(m, batch.starts.row(b).transpose(), window);
                for (int t = 1; t <= window; ++t) {
                    const double match = (tr.latent_free.row(t) - tr.latent_task.row(t)).squaredNorm();
                    const double sep = (tr.latent_task.row(t) - tr.latent_task.row(t - 1)).norm();
                    expected += variant == LossVariant::pairwise
                                    ? match + std::pow(std::max(0.0, margin - sep), 2)
                                    : std::max(0.0, match - sep * sep + margin);
                }
            }
            CHECK(loss == doctest::Approx(expected / (3.0 * window)).epsilon(1e-12));
        }
    }
}

TEST_CASE("total loss combines parts with lambda") {
    const CondorModel m = tiny_model(2, 1, 6, 5);
    TrainingSet data = unit_set(synthesize("line").states(0) / 40.0, 0.01);
    std::mt19937_64 rng(1);
    const auto imit = sample_imitation_batch(data, 4, 3, rng);
    const auto stab = sample_stability_batch(data, 4, rng);
    TrainConfig cfg;
    cfg.lambda_stable = 9.3e-2;
    nn::Tape tape;
    const BoundModel bm = bind(m, tape);
    const LossParts parts = total_loss(bm, imit, stab, cfg);
    CHECK(value_of(parts.total) ==
          doctest::Approx(value_of(parts.imitation) + 9.3e-2 * value_of(parts.stability)).epsilon(1e-14));
    cfg.loss_variant = LossVariant::bc_only;
    const LossParts bc = total_loss(bm, imit, stab, cfg);
    CHECK_FALSE(bc.stability.valid());
    CHECK(value_of(bc.total) == value_of(bc.imitation));
    CHECK(1.0 + 9.3e-2 * 2.0 == doctest::Approx(1.186).epsilon(1e-15));
}

TEST_CASE("imitation sampler honours window rules") {
    Matrix demo(3, 1);
    demo << -0.5, 0.0, 0.5;
    const TrainingSet data = unit_set(demo, 0.1);
    std::mt19937_64 rng(4);
    SUBCASE("short demonstrations are truncated") {
        for (const auto& w : sample_imitation_batch(data, 5, 14, rng)) {
            CHECK(w.targets.rows() == 2);
            CHECK(w.start[0] == -0.5);
        }
    }
    SUBCASE("window of one is a single transition") {
        for (const auto& w : sample_imitation_batch(data, 20, 1, rng)) {
            REQUIRE(w.targets.rows() == 1);
            CHECK(w.targets(0, 0) == doctest::Approx(w.start[0] + 0.5));
        }
    }
    SUBCASE("seeded sampling is reproducible") {
        const TrainingSet sine = TrainingSet::build({synthesize("sine")});
        std::mt19937_64 r1(9), r2(9);
        const auto a = sample_imitation_batch(sine, 16, 5, r1);
        const auto b = sample_imitation_batch(sine, 16, 5, r2);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].start == b[i].start);
            CHECK(a[i].targets == b[i].targets);
        }
    }
    SUBCASE("empty set is rejected") {
        TrainingSet empty;
        CHECK_THROWS_AS(sample_imitation_batch(empty, 1, 1, rng), std::invalid_argument);
    }
}

TEST_CASE("stability sampler covers the hypercube and the simplex") {
    TrainingSet data = TrainingSet::build({synthesize("sine"), synthesize("scurve"), synthesize("spiral")});
    REQUIRE(data.code_dim == 3);
    std::mt19937_64 rng(2);
    const StabilityBatch b = sample_stability_batch(data, 500, rng);
    CHECK(b.starts.minCoeff() >= -1.0);
    CHECK(b.starts.maxCoeff() <= 1.0);
    CHECK(b.codes.minCoeff() >= 0.0);
    for (Eigen::Index r = 0; r < b.codes.rows(); ++r) CHECK(b.codes.row(r).sum() == doctest::Approx(1.0));
    CHECK(b.codes.col(0).mean() == doctest::Approx(1.0 / 3.0).epsilon(0.1));
}

TEST_CASE("training set assigns one-hot codes and a shared goal") {
    const auto a = synthesize("sine"), b = synthesize("scurve");
    const TrainingSet data = TrainingSet::build({a, b});
    CHECK(data.code_dim == 2);
    CHECK(data.demos.size() == a.trajectories.size() + b.trajectories.size());
    CHECK(data.demos.front().code == one_hot(2, 0));
    CHECK(data.demos.back().code == one_hot(2, 1));
    CHECK(data.goal.norm() < 1e-9);
    CHECK(TrainingSet::build({a}).code_dim == 0);
}

TEST_CASE("full loss gradients match central finite differences") {
    for (LossVariant variant : {LossVariant::pairwise, LossVariant::triplet}) {
        CAPTURE(to_string(variant));
        CondorModel m = tiny_model(2, 1, 8, 31);
        const TrainingSet data = TrainingSet::build({synthesize("sine")});
        m.workspace = data.workspace;
        m.config.dt = data.dt;
        TrainConfig cfg;
        cfg.loss_variant = variant;
        cfg.lambda_stable = 1.0;
        cfg.margin = 0.05;
        cfg.stability_window = 3;
        std::mt19937_64 rng(8);
        const auto imit = sample_imitation_batch(data, 4, 4, rng);
        const auto stab = sample_stability_batch(data, 4, rng);

        nn::Tape tape;
        const BoundModel bm = bind(m, tape);
        const ModelGradients g = collect_gradients(bm, tape.backward(total_loss(bm, imit, stab, cfg).total));
        std::vector<double> analytic;
        for (const auto* set : {&g.encoder, &g.decoder, &g.gain})
            for (const auto& mat : *set)
                for (Eigen::Index i = 0; i < mat.size(); ++i) analytic.push_back(mat.data()[i]);

        auto refs = condor::testing::all_scalars(m);
        REQUIRE(refs.size() == analytic.size());
        std::vector<std::size_t> idx(refs.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), std::mt19937_64(77));
        const double h = 1e-5;
        double worst = 0.0;
        for (std::size_t k = 0; k < 60; ++k) {
            const auto& ref = refs[idx[k]];
            double& p = ref.store->scalar(ref.index);
            const double saved = p;
            p = saved + h;
            const double up = full_loss(m, imit, stab, cfg);
            p = saved - h;
            const double down = full_loss(m, imit, stab, cfg);
            p = saved;
            const double fd = (up - down) / (2.0 * h);
            const double a = analytic[idx[k]];
            worst = std::max(worst, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6}));
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("every parameter receives a gradient in adaptive mode") {
    const TrainingSet data = TrainingSet::build({synthesize("sine")});
    TrainConfig cfg;
    cfg.arch.hidden_width = 8;
    CondorModel m = CondorModel::create(model_config_for(data, cfg), data.workspace, data.goal);
    std::mt19937_64 rng(5);
    const auto imit = sample_imitation_batch(data, 16, 5, rng);
    const auto stab = sample_stability_batch(data, 16, rng);
    nn::Tape tape;
    const BoundModel bm = bind(m, tape);
    const nn::Gradients grads = tape.backward(total_loss(bm, imit, stab, cfg).total);
    for (const auto* leaves : {&bm.encoder, &bm.decoder, &bm.gain}) {
        REQUIRE_FALSE(leaves->empty());
        for (const auto& v : *leaves) {
            REQUIRE(grads.has(v));
            CHECK(grads.of(v).cwiseAbs().maxCoeff() > 0.0);
        }
    }
}

TEST_CASE("training loop contracts") {
    const TrainingSet data = TrainingSet::build({synthesize("sine")});
    TrainConfig cfg;
    cfg.arch.hidden_width = 8;
    cfg.imitation_batch = cfg.stability_batch = 8;
    cfg.log_every = 5;

    SUBCASE("zero iterations returns the initial model") {
        cfg.iterations = 0;
        const TrainResult r = train(data, cfg);
        const CondorModel fresh = CondorModel::create(model_config_for(data, cfg), data.workspace, data.goal);
        CHECK(r.iterations_done == 0);
        CHECK(r.history.empty());
        CHECK(r.model.encoder.values() == fresh.encoder.values());
        CHECK(r.model.decoder.values() == fresh.decoder.values());
    }
    SUBCASE("same seed gives bit-identical parameters") {
        cfg.iterations = 12;
        const TrainResult a = train(data, cfg), b = train(data, cfg);
        CHECK(a.model.encoder.values() == b.model.encoder.values());
        CHECK(a.model.gain.values() == b.model.gain.values());
        REQUIRE(a.history.size() == 4);
        CHECK(a.history.back().iteration == 11);
        cfg.seed = 1;
        CHECK(train(data, cfg).model.encoder.values() != a.model.encoder.values());
    }
    SUBCASE("monitor can stop training") {
        cfg.iterations = 50;
        TrainMonitor mon{10, [](long it, const CondorModel&) { return it < 20; }};
        const TrainResult r = train(data, cfg, mon);
        CHECK(r.stopped_early);
        CHECK(r.iterations_done == 20);
    }
    SUBCASE("divergence keeps the last good model") {
        cfg.iterations = 5;
        CondorModel bad = CondorModel::create(model_config_for(data, cfg), data.workspace, data.goal);
        const auto before = bad.decoder.values();
        bad.encoder.value(0)(0, 0) = std::numeric_limits<double>::quiet_NaN();
        const TrainResult r = train(data, cfg, bad);
        CHECK(r.diverged);
        CHECK(r.iterations_done == 0);
        CHECK_FALSE(r.diagnostics.empty());
        CHECK(r.model.decoder.values() == before);
    }
    SUBCASE("invalid configs are rejected") {
        cfg.margin = 0.0;
        CHECK_THROWS_AS(train(data, cfg), std::invalid_argument);
    }
}

TEST_CASE("loss variant names roundtrip") {
    for (auto v : {LossVariant::pairwise, LossVariant::triplet, LossVariant::bc_only})
        CHECK(loss_variant_from_string(to_string(v)) == v);
    CHECK_THROWS_AS(loss_variant_from_string("hinge"), std::invalid_argument);
}
