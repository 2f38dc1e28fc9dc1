#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "condor/errors.hpp"
#include "condor/evaluation.hpp"

namespace condor {

void SearchSpace::validate() const {
    for (const auto& p : params) {
        if (p.name.empty()) throw std::invalid_argument("search parameter without a name");
        if (!(p.high >= p.low)) throw std::invalid_argument("search range for " + p.name + " is inverted");
        if (p.scale == ParamScale::log && !(p.low > 0.0))
            throw std::invalid_argument("log-scaled range for " + p.name + " must be positive");
    }
}

Assignment sample_assignment(const SearchSpace& space, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Assignment out;
    for (const auto& p : space.params) {
        const double u = unit(rng);
        double v = p.scale == ParamScale::log
                       ? std::exp(std::log(p.low) + u * (std::log(p.high) - std::log(p.low)))
                       : p.low + u * (p.high - p.low);
        if (p.integer) v = std::clamp(std::round(v), std::ceil(p.low), std::floor(p.high));
        out[p.name] = std::clamp(v, p.low, p.high);
    }
    return out;
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

class MedianReporter : public TrialReporter {
public:
    MedianReporter(const PruneConfig& cfg, const std::vector<std::map<long, double>>& completed)
        : cfg_(cfg), completed_(completed) {}

    bool report(long step, double value) override {
        curve_[step] = value;
        last_ = value;
        if (pruned_) return false;
        if (!cfg_.enabled || !std::isfinite(value)) return true;
        if (value > cfg_.threshold) return prune(step);
        std::vector<double> peers;
        for (const auto& c : completed_) {
            const auto it = c.find(step);
            if (it != c.end()) peers.push_back(it->second);
        }
        if (static_cast<int>(peers.size()) < std::max(1, cfg_.min_completed)) return true;
        if (value > median(peers)) return prune(step);
        return true;
    }

    bool pruned() const { return pruned_; }
    long pruned_at() const { return pruned_at_; }
    double last() const { return last_; }
    const std::map<long, double>& curve() const { return curve_; }

private:
    bool prune(long step) {
        pruned_ = true;
        pruned_at_ = step;
        return false;
    }

    const PruneConfig& cfg_;
    const std::vector<std::map<long, double>>& completed_;
    std::map<long, double> curve_;
    bool pruned_ = false;
    long pruned_at_ = -1;
    double last_ = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace

SearchResult random_search(const SearchSpace& space, int budget, const PruneConfig& prune, std::uint64_t seed,
                           const TrialFn& trial) {
    space.validate();
    if (budget < 1) throw std::invalid_argument("search budget must be >= 1");
    std::mt19937_64 rng(seed);
    SearchResult result;
    std::vector<std::map<long, double>> completed_curves;

    for (int i = 0; i < budget; ++i) {
        TrialRecord rec;
        rec.index = i;
        rec.params = sample_assignment(space, rng);
        MedianReporter reporter(prune, completed_curves);
        try {
            const double value = trial(rec.params, reporter);
            if (reporter.pruned()) {
                rec.pruned = true;
                rec.pruned_at = reporter.pruned_at();
                rec.objective = reporter.last();
            } else {
                rec.objective = value;
                if (!std::isfinite(value)) {
                    rec.failed = true;
                    rec.note = "non-finite objective";
                } else {
                    completed_curves.push_back(reporter.curve());
                }
            }
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.objective = std::numeric_limits<double>::quiet_NaN();
            rec.note = e.what();
        }
        result.trials.push_back(rec);
    }

    auto pick = [&](bool want_pruned) {
        int best = -1;
        for (const auto& t : result.trials) {
            if (t.failed || t.pruned != want_pruned || !std::isfinite(t.objective)) continue;
            if (best < 0 || t.objective < result.trials[static_cast<std::size_t>(best)].objective) best = t.index;
        }
        return best;
    };
    result.best_index = pick(false);
    if (result.best_index < 0) {
        result.best_index = pick(true);
        if (result.best_index >= 0) {
            result.best_is_partial = true;
            result.warnings.push_back("all trials were pruned; returning the best partial trial");
        } else {
            result.warnings.push_back("no trial produced a finite objective");
            return result;
        }
    }
    const TrialRecord& best = result.trials[static_cast<std::size_t>(result.best_index)];
    result.best = best.params;
    result.best_objective = best.objective;
    return result;
}

TrainConfig apply_assignment(TrainConfig cfg, const Assignment& params) {
    for (const auto& [name, v] : params) {
        const auto as_int = [&] { return static_cast<int>(std::lround(v)); };
        if (name == "lambda_stable") cfg.lambda_stable = v;
        else if (name == "margin") cfg.margin = v;
        else if (name == "imitation_window") cfg.imitation_window = as_int();
        else if (name == "stability_window") cfg.stability_window = as_int();
        else if (name == "imitation_batch") cfg.imitation_batch = as_int();
        else if (name == "stability_batch") cfg.stability_batch = as_int();
        else if (name == "alpha_max") cfg.alpha_max = v;
        else if (name == "learning_rate") cfg.learning_rate = v;
        else if (name == "weight_decay") cfg.weight_decay = v;
        else if (name == "fixed_gain") cfg.fixed_gain = v;
        else if (name == "iterations") cfg.iterations = std::lround(v);
        else if (name == "hidden_width") cfg.arch.hidden_width = as_int();
        else throw std::invalid_argument("unknown hyperparameter '" + name + "'");
    }
    return cfg;
}

TrainingSearchResult tune_training(const SearchSpace& space, int budget, const PruneConfig& prune,
                                   const std::vector<MotionDataset>& datasets, const TrainConfig& base,
                                   long check_every, std::uint64_t seed) {
    const TrainingSet data = TrainingSet::build(datasets, base.padding);
    auto trial = [&](const Assignment& a, TrialReporter& reporter) {
        const TrainConfig cfg = apply_assignment(base, a);
        cfg.validate();
        double last = std::numeric_limits<double>::quiet_NaN();
        TrainMonitor monitor;
        monitor.every = check_every;
        monitor.callback = [&](long it, const CondorModel& model) {
            last = model_hyper_objective(model, datasets);
            return reporter.report(it, last);
        };
        const TrainResult r = train(data, cfg, monitor);
        if (r.diverged) throw NumericDivergence(r.diagnostics);
        if (r.stopped_early) return last;
        return model_hyper_objective(r.model, datasets);
    };
    TrainingSearchResult out;
    out.search = random_search(space, budget, prune, seed, trial);
    out.best_config = out.search.best_index >= 0 ? apply_assignment(base, out.search.best) : base;
    return out;
}

}  // namespace condor
