#include "condor/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace condor {

void StabilityEvalConfig::validate() const {
    if (steps < 1) throw std::invalid_argument("stability sweep needs L >= 1");
    if (starts < 1) throw std::invalid_argument("stability sweep needs P >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("stability sweep needs epsilon > 0");
}

double epsilon_from_span_fraction(const Workspace& workspace, int position_dim, double fraction) {
    if (!(fraction > 0.0)) throw std::invalid_argument("span fraction must be positive");
    const int d = position_dim > 0 ? std::min(position_dim, workspace.dim()) : workspace.dim();
    return fraction * workspace.span().head(d).mean();
}

Matrix sweep_starts(int dim, int count, std::uint64_t seed) {
    if (dim < 1 || count < 1) throw std::invalid_argument("sweep needs dim >= 1 and count >= 1");
    if (dim == 2) {
        const int g = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)) - 1e-12));
        Matrix out(g * g, 2);
        for (int i = 0; i < g; ++i) {
            for (int j = 0; j < g; ++j) {
                const double xi = g == 1 ? 0.0 : -1.0 + 2.0 * i / (g - 1);
                const double xj = g == 1 ? 0.0 : -1.0 + 2.0 * j / (g - 1);
                out.row(i * g + j) << xi, xj;
            }
        }
        return out;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix out(count, dim);
    for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = u(rng);
    return out;
}

SweepResult stability_sweep(const CondorModel& model, const Matrix& starts, int steps, double epsilon_normalized,
                            const Vector& code, const FieldTransform& transform) {
    if (steps < 1) throw std::invalid_argument("stability sweep needs L >= 1");
    if (starts.rows() < 1 || starts.cols() != model.dim()) throw std::invalid_argument("sweep starts have the wrong shape");
    const Matrix codes = expand_codes(model, code.size() ? Matrix(code.transpose()) : Matrix(), starts.rows());
    Matrix x = clip_rows_to_workspace(starts);
    for (int t = 0; t < steps; ++t) x = euler_step(model, x, codes, transform);

    SweepResult r;
    r.trials = static_cast<int>(starts.rows());
    r.epsilon_normalized = epsilon_normalized;
    r.final_distances = (x.rowwise() - model.goal.transpose()).rowwise().norm();
    for (Eigen::Index i = 0; i < r.final_distances.size(); ++i) {
        const double d = r.final_distances[i];
        if (!std::isfinite(d) || d > epsilon_normalized) ++r.failures;
    }
    r.unsuccessful_fraction = static_cast<double>(r.failures) / r.trials;
    return r;
}

SweepResult stability_sweep(const CondorModel& model, const StabilityEvalConfig& cfg, const Vector& code) {
    cfg.validate();
    const int pd = model.config.order == 2 ? model.dim() / 2 : model.dim();
    const double eps = model.workspace.to_normalized_length(cfg.epsilon, pd);
    return stability_sweep(model, sweep_starts(model.dim(), cfg.starts, cfg.seed), cfg.steps, eps, code);
}

namespace {

int position_dim(const CondorModel& m) { return m.config.order == 2 ? m.dim() / 2 : m.dim(); }

Matrix positions_original(const CondorModel& m, const Matrix& normalized) {
    return m.workspace.denormalize_rows(normalized).leftCols(position_dim(m));
}

void require_compatible(const CondorModel& model, const MotionDataset& dataset) {
    dataset.validate();
    if (dataset.dim != model.dim() || dataset.order != model.config.order)
        throw std::invalid_argument("dataset does not match the model's state space");
}

}  // namespace

AccuracyReport evaluate_accuracy(const CondorModel& model, const MotionDataset& dataset, const Vector& code) {
    require_compatible(model, dataset);
    AccuracyReport rep;
    const Vector goal = model.workspace.denormalize(model.goal).head(position_dim(model));
    for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
        const Matrix& demo = dataset.trajectories[i];
        const Vector x0 = model.workspace.normalize(dataset.states(i).row(0).transpose());
        const Matrix roll = positions_original(model, rollout_task(model, x0, static_cast<int>(demo.rows()) - 1, code));
        DemoScore s;
        s.rmse = trajectory_rmse(roll, demo);
        s.dtwd = dtwd(roll, demo);
        s.frechet = frechet(roll, demo);
        s.final_distance = (roll.row(roll.rows() - 1).transpose() - goal).norm();
        rep.per_demo.push_back(s);
        rep.rmse += s.rmse;
        rep.dtwd += s.dtwd;
        rep.frechet += s.frechet;
        rep.goal_precision += s.final_distance;
    }
    const double n = static_cast<double>(rep.per_demo.size());
    rep.rmse /= n;
    rep.dtwd /= n;
    rep.frechet /= n;
    rep.goal_precision /= n;
    return rep;
}

MismatchCurve mismatch_error(const CondorModel& model, const Matrix& starts, int horizon,
                             const std::vector<double>& fractions, const Vector& code) {
    if (horizon < 1) throw std::invalid_argument("mismatch curve needs horizon >= 1");
    if (starts.rows() < 1) throw std::invalid_argument("mismatch curve needs at least one start");
    for (std::size_t k = 0; k < fractions.size(); ++k) {
        if (fractions[k] < 0.0 || fractions[k] > 1.0 || (k > 0 && fractions[k] < fractions[k - 1]))
            throw std::invalid_argument("mismatch fractions must be ascending within [0, 1]");
    }
    const Matrix codes = code.size() ? Matrix(code.transpose()) : Matrix();
    const auto task = rollout_task(model, starts, horizon, codes);
    const auto mapped = map_latent_to_task(model, starts, rollout_latent_free(model, starts, horizon, codes));

    // accumulated[t] holds, per start, the summed pointwise error up to step t.
    std::vector<Vector> accumulated;
    Vector running = Vector::Zero(starts.rows());
    for (int t = 0; t <= horizon; ++t) {
        running += (task[static_cast<std::size_t>(t)] - mapped[static_cast<std::size_t>(t)]).rowwise().norm();
        accumulated.push_back(running);
    }
    MismatchCurve curve;
    for (double f : fractions) {
        const auto t = static_cast<std::size_t>(std::lround(f * horizon));
        const Vector& a = accumulated[t];
        const double mean = a.mean();
        curve.fractions.push_back(f);
        curve.mean.push_back(mean);
        curve.stddev.push_back(std::sqrt((a.array() - mean).square().mean()));
    }
    return curve;
}

MismatchCurve mismatch_error(const CondorModel& model, const MismatchConfig& cfg, const Vector& code) {
    if (cfg.points < 1) throw std::invalid_argument("mismatch curve needs at least one point");
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix starts(cfg.starts, model.dim());
    for (Eigen::Index i = 0; i < starts.size(); ++i) starts.data()[i] = u(rng);
    std::vector<double> fractions;
    for (int k = 1; k <= cfg.points; ++k) fractions.push_back(static_cast<double>(k) / cfg.points);
    return mismatch_error(model, starts, cfg.horizon, fractions, code);
}

double latent_mismatch_rmse(const CondorModel& model, const MotionDataset& dataset, const Vector& code) {
    require_compatible(model, dataset);
    double total = 0.0;
    long count = 0;
    for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
        const Vector x0 = model.workspace.normalize(dataset.states(i).row(0).transpose());
        const int h = static_cast<int>(dataset.trajectories[i].rows()) - 1;
        const RolloutTrace tr = rollout_latent_pair(model, x0, h, code);
        total += (tr.latent_free.bottomRows(h) - tr.latent_task.bottomRows(h)).rowwise().squaredNorm().sum();
        count += h;
    }
    return std::sqrt(total / static_cast<double>(count));
}

namespace {

// Demonstration-matched rollouts compared in normalized position units.
struct NormalizedFit {
    double rmse = 0.0;
    std::vector<Matrix> rollouts;
};

NormalizedFit normalized_fit(const CondorModel& model, const MotionDataset& ds, const Vector& code) {
    const int pd = position_dim(model);
    NormalizedFit fit;
    for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
        const Matrix states = model.workspace.normalize_rows(ds.states(i));
        const Matrix roll =
            rollout_task(model, Vector(states.row(0).transpose()), static_cast<int>(states.rows()) - 1, code)
                .leftCols(pd);
        fit.rmse += trajectory_rmse(roll, states.leftCols(pd));
        fit.rollouts.push_back(roll);
    }
    fit.rmse /= static_cast<double>(ds.trajectories.size());
    return fit;
}

}  // namespace

double model_hyper_objective(const CondorModel& model, const std::vector<MotionDataset>& datasets,
                             double gamma_stable, double gamma_goal) {
    if (datasets.empty()) throw std::invalid_argument("objective needs at least one dataset");
    const Vector goal = model.goal.head(position_dim(model));
    double acc = 0.0, stable = 0.0, goal_term = 0.0;
    for (std::size_t m = 0; m < datasets.size(); ++m) {
        require_compatible(model, datasets[m]);
        const Vector code = model.code_dim() > 0 ? one_hot(model.code_dim(), static_cast<int>(m)) : Vector();
        const NormalizedFit fit = normalized_fit(model, datasets[m], code);
        acc += fit.rmse;
        stable += latent_mismatch_rmse(model, datasets[m], code);
        goal_term += goal_precision(fit.rollouts, goal);
    }
    const double k = static_cast<double>(datasets.size());
    return hyper_objective(acc / k, stable / k, goal_term / k, gamma_stable, gamma_goal);
}

EvalReport evaluate(const CondorModel& model, const MotionDataset& dataset, const EvalConfig& cfg,
                    const Vector& code) {
    require_compatible(model, dataset);
    EvalReport rep;
    StabilityEvalConfig sc = cfg.stability;
    if (!(sc.epsilon > 0.0))
        sc.epsilon = epsilon_from_span_fraction(model.workspace, position_dim(model), cfg.epsilon_span_fraction);
    const SweepResult sweep = stability_sweep(model, sc, code);
    rep.unsuccessful_fraction = sweep.unsuccessful_fraction;
    rep.sweep_failures = sweep.failures;
    rep.sweep_trials = sweep.trials;
    rep.epsilon = sc.epsilon;
    rep.accuracy = evaluate_accuracy(model, dataset, code);

    MismatchConfig mc = cfg.mismatch;
    if (mc.horizon <= 0) {
        for (const auto& tr : dataset.trajectories) mc.horizon = std::max(mc.horizon, static_cast<int>(tr.rows()));
    }
    rep.mismatch_curve = mismatch_error(model, mc, code);
    rep.latent_mismatch = latent_mismatch_rmse(model, dataset, code);

    // The objective's terms are measured in normalized units so they are comparable across datasets.
    const NormalizedFit fit = normalized_fit(model, dataset, code);
    rep.hyper_objective = hyper_objective(fit.rmse, rep.latent_mismatch,
                                          goal_precision(fit.rollouts, model.goal.head(position_dim(model))),
                                          cfg.gamma_stable, cfg.gamma_goal);
    return rep;
}

}  // namespace condor
