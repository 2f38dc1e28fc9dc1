#include "condor/learning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "condor/errors.hpp"

namespace condor {

std::string to_string(LossVariant v) {
    switch (v) {
        case LossVariant::pairwise: return "pairwise";
        case LossVariant::triplet: return "triplet";
        case LossVariant::bc_only: return "bc_only";
    }
    return "pairwise";
}

LossVariant loss_variant_from_string(const std::string& s) {
    if (s == "pairwise") return LossVariant::pairwise;
    if (s == "triplet") return LossVariant::triplet;
    if (s == "bc_only") return LossVariant::bc_only;
    throw std::invalid_argument("unknown loss variant '" + s + "'");
}

double TrainConfig::learning_rate_at(long iteration) const {
    if (final_lr_fraction >= 1.0 || iterations <= 1) return learning_rate;
    const double progress = std::clamp(static_cast<double>(iteration) / static_cast<double>(iterations - 1), 0.0, 1.0);
    const double f = final_lr_fraction + (1.0 - final_lr_fraction) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    return learning_rate * f;
}

void TrainConfig::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
    };
    if (loss_variant != LossVariant::bc_only) positive(lambda_stable, "lambda_stable");
    positive(margin, "margin");
    positive(alpha_max, "alpha_max");
    positive(learning_rate, "learning_rate");
    if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0))
        throw std::invalid_argument("final_lr_fraction must lie in (0, 1]");
    if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be non-negative");
    if (gain_mode == GainMode::fixed) positive(fixed_gain, "fixed_gain");
    if (imitation_window < 1 || stability_window < 1) throw std::invalid_argument("windows must be >= 1");
    if (imitation_batch < 1 || stability_batch < 1) throw std::invalid_argument("batch sizes must be >= 1");
    if (iterations < 0) throw std::invalid_argument("iterations must be non-negative");
    if (log_every < 1) throw std::invalid_argument("log_every must be >= 1");
    if (padding < 0.0) throw std::invalid_argument("padding must be non-negative");
}

TrainingSet TrainingSet::build(const std::vector<MotionDataset>& datasets, double padding,
                               std::vector<std::string>* warnings) {
    if (datasets.empty()) throw std::invalid_argument("no datasets given");
    TrainingSet set;
    const MotionDataset& first = datasets.front();
    set.order = first.order;
    set.dim = first.dim;
    set.dt = first.dt;
    for (const auto& ds : datasets) {
        ds.validate();
        if (ds.order != set.order || ds.dim != set.dim)
            throw std::invalid_argument("datasets disagree on order or dimension");
        if (std::abs(ds.dt - set.dt) > 1e-12 * std::max(1.0, set.dt))
            throw std::invalid_argument("datasets disagree on dt");
    }
    set.code_dim = datasets.size() > 1 ? static_cast<int>(datasets.size()) : 0;
    set.workspace = fit_workspace(datasets, padding, warnings);

    // Motions learned jointly share one goal: the mean of all demonstration endpoints.
    if (datasets.size() == 1) {
        set.goal = first.resolved_goal();
    } else {
        MotionDataset pooled = first;
        pooled.goal.reset();
        pooled.trajectories.clear();
        for (const auto& ds : datasets)
            pooled.trajectories.insert(pooled.trajectories.end(), ds.trajectories.begin(), ds.trajectories.end());
        set.goal = derive_goal(pooled);
    }

    for (std::size_t m = 0; m < datasets.size(); ++m) {
        const Vector code = set.code_dim ? one_hot(set.code_dim, static_cast<int>(m)) : Vector();
        for (std::size_t i = 0; i < datasets[m].trajectories.size(); ++i)
            set.demos.push_back({set.workspace.normalize_rows(datasets[m].states(i)), code});
    }
    return set;
}

std::vector<ImitationWindow> sample_imitation_batch(const TrainingSet& data, int batch, int window,
                                                    std::mt19937_64& rng) {
    if (data.demos.empty()) throw std::invalid_argument("cannot sample from an empty training set");
    if (batch < 1 || window < 1) throw std::invalid_argument("batch and window must be >= 1");
    std::uniform_int_distribution<std::size_t> pick(0, data.demos.size() - 1);
    std::vector<ImitationWindow> out;
    out.reserve(static_cast<std::size_t>(batch));
    for (int b = 0; b < batch; ++b) {
        const Demonstration& d = data.demos[pick(rng)];
        const Eigen::Index t_len = d.states.rows();
        if (t_len < 2) throw std::invalid_argument("demonstrations need at least 2 states");
        Eigen::Index start = 0;
        Eigen::Index len = window;
        if (t_len - 1 < window) {
            len = t_len - 1;
        } else {
            std::uniform_int_distribution<Eigen::Index> t0(0, t_len - window - 1);
            start = t0(rng);
        }
        out.push_back({d.states.row(start).transpose(), d.states.middleRows(start + 1, len), d.code});
    }
    return out;
}

StabilityBatch sample_stability_batch(const TrainingSet& data, int batch, std::mt19937_64& rng) {
    StabilityBatch out;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    out.starts.resize(batch, data.dim);
    for (Eigen::Index i = 0; i < out.starts.size(); ++i) out.starts.data()[i] = u(rng);
    out.codes.resize(batch, data.code_dim);
    if (data.code_dim > 0) {
        std::exponential_distribution<double> e(1.0);
        for (int b = 0; b < batch; ++b) {
            double total = 0.0;
            for (int c = 0; c < data.code_dim; ++c) total += (out.codes(b, c) = e(rng));
            out.codes.row(b) /= total;
        }
    }
    return out;
}

nn::Var imitation_loss(const BoundModel& bm, const std::vector<ImitationWindow>& batch) {
    if (batch.empty()) throw std::invalid_argument("imitation batch is empty");
    const CondorModel& m = *bm.model;
    const int n = m.dim();
    const auto rows = static_cast<Eigen::Index>(batch.size());
    Eigen::Index horizon = 0;
    Eigen::Index terms = 0;
    Matrix starts(rows, n);
    Matrix codes(rows, m.code_dim());
    for (Eigen::Index b = 0; b < rows; ++b) {
        const auto& w = batch[static_cast<std::size_t>(b)];
        if (w.start.size() != n || w.targets.cols() != n || w.targets.rows() < 1)
            throw std::invalid_argument("imitation window has the wrong shape");
        starts.row(b) = w.start.transpose();
        if (m.code_dim() > 0) codes.row(b) = w.code.transpose();
        horizon = std::max(horizon, w.targets.rows());
        terms += w.targets.rows();
    }

    nn::Tape& tape = *bm.tape;
    const nn::Var code_var = m.code_dim() > 0 ? tape.constant(codes) : nn::Var();
    nn::Var x = tape.constant(starts);
    nn::Var acc;
    for (Eigen::Index k = 0; k < horizon; ++k) {
        Matrix target = Matrix::Zero(rows, n);
        Matrix mask = Matrix::Ones(rows, 1);
        bool partial = false;
        for (Eigen::Index b = 0; b < rows; ++b) {
            const auto& w = batch[static_cast<std::size_t>(b)];
            if (k < w.targets.rows()) {
                target.row(b) = w.targets.row(k);
            } else {
                mask(b, 0) = 0.0;
                partial = true;
            }
        }
        const nn::Var pred = euler_unclipped(bm, x, code_var);
        nn::Var sq = nn::row_sq_norm(nn::sub(tape.constant(std::move(target)), pred));
        if (partial) sq = nn::mul(sq, tape.constant(std::move(mask)));
        const nn::Var step_sum = nn::sum(sq);
        acc = acc.valid() ? nn::add(acc, step_sum) : step_sum;
        x = nn::clamp(pred, -1.0, 1.0);
    }
    return nn::scale(acc, 1.0 / static_cast<double>(terms));
}

nn::Var pairwise_term(const nn::Var& latent_free, const nn::Var& latent_task, const nn::Var& latent_task_prev,
                      double margin) {
    const nn::Var match = nn::row_sq_norm(nn::sub(latent_free, latent_task));
    const nn::Var dist = nn::row_norm(nn::sub(latent_task, latent_task_prev));
    const nn::Var hinge = nn::relu(nn::add_scalar(nn::scale(dist, -1.0), margin));
    return nn::add(match, nn::square(hinge));
}

nn::Var triplet_term(const nn::Var& latent_free, const nn::Var& latent_task, const nn::Var& latent_task_prev,
                     double margin) {
    const nn::Var pos = nn::row_sq_norm(nn::sub(latent_task, latent_free));
    const nn::Var neg = nn::row_sq_norm(nn::sub(latent_task, latent_task_prev));
    return nn::relu(nn::add_scalar(nn::sub(pos, neg), margin));
}

nn::Var stability_loss(const BoundModel& bm, const StabilityBatch& batch, int window, double margin,
                       LossVariant variant) {
    if (window < 1) throw std::invalid_argument("stability window must be >= 1");
    if (variant == LossVariant::bc_only) throw std::invalid_argument("bc_only has no stability loss");
    const CondorModel& m = *bm.model;
    const Eigen::Index rows = batch.starts.rows();
    if (rows < 1 || batch.starts.cols() != m.dim()) throw std::invalid_argument("stability batch has the wrong shape");
    nn::Tape& tape = *bm.tape;
    const nn::Var codes = m.code_dim() > 0 ? tape.constant(expand_codes(m, batch.codes, rows)) : nn::Var();

    const nn::Var goal_latent = latent_goal(bm, rows, codes);
    nn::Var x = tape.constant(clip_rows_to_workspace(batch.starts));
    nn::Var y_task = encode(bm, x, codes);
    nn::Var y_free = y_task;
    nn::Var acc;
    for (int t = 1; t <= window; ++t) {
        x = nn::clamp(euler_unclipped_from_latent(bm, x, y_task), -1.0, 1.0);
        const nn::Var y_task_next = encode(bm, x, codes);
        y_free = latent_step(bm, y_free, goal_latent);
        const nn::Var term = variant == LossVariant::pairwise ? pairwise_term(y_free, y_task_next, y_task, margin)
                                                              : triplet_term(y_free, y_task_next, y_task, margin);
        const nn::Var s = nn::sum(term);
        acc = acc.valid() ? nn::add(acc, s) : s;
        y_task = y_task_next;
    }
    return nn::scale(acc, 1.0 / static_cast<double>(rows * window));
}

LossParts total_loss(const BoundModel& bm, const std::vector<ImitationWindow>& imitation,
                     const StabilityBatch& stability, const TrainConfig& config) {
    LossParts parts;
    parts.imitation = imitation_loss(bm, imitation);
    if (config.loss_variant == LossVariant::bc_only) {
        parts.total = parts.imitation;
        return parts;
    }
    parts.stability = stability_loss(bm, stability, config.stability_window, config.margin, config.loss_variant);
    parts.total = nn::add(parts.imitation, nn::scale(parts.stability, config.lambda_stable));
    return parts;
}

ModelConfig model_config_for(const TrainingSet& data, const TrainConfig& config) {
    ModelConfig mc;
    mc.order = data.order;
    mc.dim = data.dim;
    mc.code_dim = data.code_dim;
    mc.dt = data.dt;
    mc.alpha_max = config.alpha_max;
    mc.gain_mode = config.gain_mode;
    mc.fixed_gain = config.fixed_gain;
    mc.arch = config.arch;
    mc.seed = config.seed;
    return mc;
}

namespace {

constexpr std::uint64_t kSamplerStream = 0x9E3779B97F4A7C15ULL;

double scalar_of(const nn::Var& v) { return v.valid() ? v.value()(0, 0) : 0.0; }

}  // namespace

HistoryRow train_step(CondorModel& model, const TrainingSet& data, const TrainConfig& config, std::mt19937_64& rng,
                      long iteration) {
    const auto imitation = sample_imitation_batch(data, config.imitation_batch, config.imitation_window, rng);
    StabilityBatch stability;
    if (config.loss_variant != LossVariant::bc_only)
        stability = sample_stability_batch(data, config.stability_batch, rng);

    nn::Tape tape;
    const BoundModel bm = bind(model, tape);
    const LossParts parts = total_loss(bm, imitation, stability, config);
    HistoryRow row{iteration, scalar_of(parts.imitation), scalar_of(parts.stability), scalar_of(parts.total)};
    if (!std::isfinite(row.loss_total)) {
        std::ostringstream msg;
        msg << "non-finite loss at iteration " << iteration << " (imitation " << row.loss_il << ", stability "
            << row.loss_stable << ")";
        throw NumericDivergence(msg.str());
    }

    const ModelGradients grads = collect_gradients(bm, tape.backward(parts.total));
    const nn::AdamWConfig opt{config.learning_rate_at(iteration), 0.9, 0.999, 1e-8, config.weight_decay};
    // Validate all three before touching any, so a failure leaves the model intact.
    for (const auto* g : {&grads.encoder, &grads.decoder, &grads.gain}) {
        for (const auto& m : *g) {
            if (!m.allFinite()) {
                std::ostringstream msg;
                msg << "non-finite gradient at iteration " << iteration;
                throw NumericDivergence(msg.str());
            }
        }
    }
    nn::adamw_step(model.encoder, grads.encoder, opt);
    nn::adamw_step(model.decoder, grads.decoder, opt);
    if (model.gain.size()) nn::adamw_step(model.gain, grads.gain, opt);
    return row;
}

TrainResult train(const TrainingSet& data, const TrainConfig& config, const TrainMonitor& monitor) {
    config.validate();
    return train(data, config, CondorModel::create(model_config_for(data, config), data.workspace, data.goal), monitor);
}

TrainResult train(const TrainingSet& data, const TrainConfig& config, CondorModel initial,
                  const TrainMonitor& monitor) {
    config.validate();
    initial.check();
    TrainResult result{std::move(initial), {}, 0, false, false, {}};
    std::mt19937_64 rng(config.seed ^ kSamplerStream);
    for (long it = 0; it < config.iterations; ++it) {
        HistoryRow row;
        try {
            row = train_step(result.model, data, config, rng, it);
        } catch (const NumericDivergence& e) {
            result.diverged = true;
            result.diagnostics = e.what();
            return result;
        }
        result.iterations_done = it + 1;
        if (it % config.log_every == 0 || it + 1 == config.iterations) result.history.push_back(row);
        if (monitor.every > 0 && monitor.callback && (it + 1) % monitor.every == 0) {
            if (!monitor.callback(it + 1, result.model)) {
                result.stopped_early = true;
                return result;
            }
        }
    }
    return result;
}

}  // namespace condor
