#include "condor/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "condor/errors.hpp"
#include "condor/evaluation.hpp"
#include "condor/io.hpp"
#include "condor/synth.hpp"

namespace condor::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;

fs::path output_root() {
    const char* env = std::getenv(kOutputRootEnv);
    return env && *env ? fs::path(env) : fs::path("runs");
}

fs::path resolve_out(const std::string& given, const std::string& command) {
    return given.empty() ? output_root() / command : fs::path(given);
}

Vector parse_vector(const std::string& text, const std::string& what) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(cell, &used));
            if (used != cell.size() && cell.find_first_not_of(" \t", used) != std::string::npos)
                throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw io::InputError(what + ": cannot parse '" + text + "' as comma-separated numbers");
        }
    }
    if (v.empty()) throw io::InputError(what + " is empty");
    return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string join(const std::vector<std::string>& parts) {
    std::string s;
    for (const auto& p : parts) s += (s.empty() ? "" : " ") + p;
    return s;
}

// Options shared by commands that read datasets.
struct DatasetArgs {
    std::vector<std::string> paths;
    double csv_dt = 0.01;
    int csv_order = 1;

    void add(CLI::App* app, bool multiple) {
        if (multiple)
            app->add_option("--dataset", paths, "Dataset JSON file or CSV directory (repeat for several motions)")
                ->required();
        else
            app->add_option("--dataset", paths, "Dataset JSON file or CSV directory")->required()->expected(1);
        app->add_option("--csv-dt", csv_dt, "Sample period for CSV directories")->capture_default_str();
        app->add_option("--csv-order", csv_order, "Order for CSV directories (1 or 2)")->capture_default_str();
    }

    std::vector<MotionDataset> load() const {
        io::CsvDatasetOptions opt;
        opt.dt = csv_dt;
        opt.order = csv_order;
        std::vector<MotionDataset> out;
        for (const auto& p : paths) out.push_back(io::load_dataset(p, opt));
        return out;
    }
};

std::string fingerprint(const std::vector<MotionDataset>& ds) {
    std::string all;
    for (const auto& d : ds) all += io::dataset_fingerprint(d);
    return ds.size() == 1 ? all : io::fnv1a_hex(all);
}

Vector resolve_code(const CondorModel& model, const std::string& code_text, int motion) {
    if (!code_text.empty()) {
        const Vector c = parse_vector(code_text, "--code");
        if (c.size() != model.code_dim())
            throw std::invalid_argument("--code has " + std::to_string(c.size()) + " entries, the model expects " +
                                        std::to_string(model.code_dim()));
        return c;
    }
    if (model.code_dim() == 0) return Vector();
    return one_hot(model.code_dim(), motion);
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    DatasetArgs data;
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<long> iterations;
    long checkpoint_every = 0;
};

int cmd_train(const TrainArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
    io::RunManifest man;
    man.command = "train";
    man.arguments = argv;
    man.started_at = io::utc_timestamp();

    const auto datasets = a.data.load();
    TrainConfig cfg = a.config.empty() ? TrainConfig{} : io::train_config_from_json(io::read_json(a.config));
    if (a.seed) cfg.seed = *a.seed;
    if (a.iterations) cfg.iterations = *a.iterations;
    cfg.validate();

    const fs::path dir = resolve_out(a.out, "train");
    fs::create_directories(dir);
    const Json cfg_json = io::train_config_to_json(cfg);
    man.config_hash = io::fnv1a_hex(cfg_json.dump());
    man.seed = cfg.seed;
    man.dataset_fingerprint = fingerprint(datasets);
    man.checkpoint_path = (dir / "checkpoint.json").string();
    io::write_json(cfg_json, dir / "config.json");

    std::vector<std::string> warnings;
    const TrainingSet set = TrainingSet::build(datasets, cfg.padding, &warnings);
    for (const auto& w : warnings) out << "warning: " << w << "\n";

    TrainMonitor monitor;
    if (a.checkpoint_every > 0) {
        monitor.every = a.checkpoint_every;
        monitor.callback = [&](long it, const CondorModel& model) {
            io::save_checkpoint(dir / "checkpoint.json", model, it, &cfg);
            return true;
        };
    }
    const TrainResult r = train(set, cfg, monitor);
    io::save_checkpoint(dir / "checkpoint.json", r.model, r.iterations_done, &cfg);
    io::write_history_csv(r.history, dir / "history.csv");
    man.outputs = {"checkpoint.json", "history.csv", "config.json"};
    man.finished_at = io::utc_timestamp();
    if (r.diverged) {
        man.status = "diverged: " + r.diagnostics;
        io::write_manifest(man, dir / "manifest.json");
        throw NumericDivergence(r.diagnostics + " (last good checkpoint saved to " + man.checkpoint_path + ")");
    }
    io::write_manifest(man, dir / "manifest.json");
    if (!r.history.empty()) {
        const HistoryRow& h = r.history.back();
        out << "trained " << r.iterations_done << " iterations; loss_il " << h.loss_il << " loss_stable "
            << h.loss_stable << " loss_total " << h.loss_total << "\n";
    }
    out << "wrote " << dir.string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string checkpoint;
    DatasetArgs data;
    std::string config;
    std::string out;
    std::optional<int> steps, starts;
    std::optional<double> epsilon, epsilon_span;
    std::optional<std::uint64_t> seed;
    std::string code;
    int motion = 0;
};

int cmd_eval(const EvalArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
    io::RunManifest man;
    man.command = "eval";
    man.arguments = argv;
    man.started_at = io::utc_timestamp();
    const io::Checkpoint ck = io::load_checkpoint(a.checkpoint);
    const auto datasets = a.data.load();

    EvalConfig cfg;
    cfg.stability.epsilon = 0.0;  // defaults to a span fraction
    if (!a.config.empty()) cfg = io::eval_config_from_json(io::read_json(a.config), cfg);
    if (a.steps) cfg.stability.steps = *a.steps;
    if (a.starts) cfg.stability.starts = *a.starts;
    if (a.epsilon) cfg.stability.epsilon = *a.epsilon;
    if (a.epsilon_span) {
        cfg.epsilon_span_fraction = *a.epsilon_span;
        if (!a.epsilon) cfg.stability.epsilon = 0.0;
    }
    if (a.seed) cfg.stability.seed = cfg.mismatch.seed = *a.seed;

    const Vector code = resolve_code(ck.model, a.code, a.motion);
    const EvalReport rep = evaluate(ck.model, datasets.front(), cfg, code);

    const fs::path dir = resolve_out(a.out, "eval");
    const Json report = io::eval_report_to_json(rep);
    io::write_json(report, dir / "report.json");
    io::write_eval_report_csv(rep, dir / "report.csv");
    io::write_mismatch_csv(rep.mismatch_curve, dir / "mismatch.csv");

    man.config_hash = io::fnv1a_hex(io::eval_config_to_json(cfg).dump());
    man.seed = cfg.stability.seed;
    man.dataset_fingerprint = fingerprint(datasets);
    man.checkpoint_path = a.checkpoint;
    man.outputs = {"report.json", "report.csv", "mismatch.csv"};
    man.finished_at = io::utc_timestamp();
    io::write_manifest(man, dir / "manifest.json");

    out << std::setprecision(6) << "unsuccessful_fraction " << rep.unsuccessful_fraction << " (" << rep.sweep_failures
        << "/" << rep.sweep_trials << ", epsilon " << rep.epsilon << ")\n"
        << "rmse " << rep.accuracy.rmse << " dtwd " << rep.accuracy.dtwd << " frechet " << rep.accuracy.frechet
        << " goal_precision " << rep.accuracy.goal_precision << "\n"
        << "hyper_objective " << rep.hyper_objective << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct RolloutArgs {
    std::string checkpoint;
    std::vector<std::string> x0;
    std::string x0_file;
    int random = 0;
    std::uint64_t seed = 0;
    int horizon = 1000;
    std::string code;
    int motion = 0;
    std::string out;
};

int cmd_rollout(const RolloutArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
    io::RunManifest man;
    man.command = "rollout";
    man.arguments = argv;
    man.started_at = io::utc_timestamp();
    if (a.horizon < 0) throw std::invalid_argument("--horizon must be >= 0");
    const io::Checkpoint ck = io::load_checkpoint(a.checkpoint);
    const CondorModel& m = ck.model;

    std::vector<Vector> starts;  // original units
    for (const auto& s : a.x0) starts.push_back(parse_vector(s, "--x0"));
    if (!a.x0_file.empty()) {
        const Matrix rows = io::read_csv_matrix(a.x0_file);
        for (Eigen::Index r = 0; r < rows.rows(); ++r) starts.push_back(rows.row(r).transpose());
    }
    if (a.random > 0) {
        std::mt19937_64 rng(a.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int k = 0; k < a.random; ++k) {
            Vector z(m.dim());
            for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = u(rng);
            starts.push_back(m.workspace.denormalize(z));
        }
    }
    if (starts.empty()) throw io::InputError("no initial states: give --x0, --x0-file or --random");
    for (const auto& s : starts)
        if (s.size() != m.dim())
            throw std::invalid_argument("initial state has " + std::to_string(s.size()) + " entries, the model expects " +
                                        std::to_string(m.dim()));

    Matrix z(static_cast<Eigen::Index>(starts.size()), m.dim());
    for (std::size_t k = 0; k < starts.size(); ++k)
        z.row(static_cast<Eigen::Index>(k)) = m.workspace.normalize(starts[k]).transpose();
    const Vector code = resolve_code(m, a.code, a.motion);
    const Matrix codes = code.size() ? Matrix(code.transpose()) : Matrix();
    const auto steps = rollout_task(m, clip_rows_to_workspace(z), a.horizon, codes);

    const fs::path dir = resolve_out(a.out, "rollout");
    for (std::size_t k = 0; k < starts.size(); ++k) {
        Matrix traj(a.horizon + 1, m.dim());
        for (int t = 0; t <= a.horizon; ++t)
            traj.row(t) = steps[static_cast<std::size_t>(t)].row(static_cast<Eigen::Index>(k));
        char name[48];
        std::snprintf(name, sizeof name, "rollout_%03zu.csv", k);
        io::write_trajectory_csv(m.workspace.denormalize_rows(traj), m.config.dt, dir / name);
        man.outputs.push_back(name);
    }
    man.config_hash = io::fnv1a_hex(Json{{"horizon", a.horizon}, {"code", join(a.x0) + "|" + a.code}}.dump());
    man.seed = a.seed;
    man.checkpoint_path = a.checkpoint;
    man.finished_at = io::utc_timestamp();
    io::write_manifest(man, dir / "manifest.json");
    out << "wrote " << starts.size() << " rollouts to " << dir.string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct FieldArgs {
    std::string checkpoint;
    int grid = 40;
    bool svg = false;
    int overlay = 0;
    std::string code;
    int motion = 0;
    std::string out;
};

int cmd_vector_field(const FieldArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
    io::RunManifest man;
    man.command = "vector-field";
    man.arguments = argv;
    man.started_at = io::utc_timestamp();
    const io::Checkpoint ck = io::load_checkpoint(a.checkpoint);
    const CondorModel& m = ck.model;
    if (m.dim() != 2 || m.config.order != 1) throw std::invalid_argument("vector-field export requires n=2, order 1");
    const Vector code = resolve_code(m, a.code, a.motion);
    const Matrix field = io::vector_field_grid(m, a.grid, code);

    const fs::path dir = resolve_out(a.out, "vector-field");
    io::write_vector_field_csv(field, dir / "vector_field.csv");
    man.outputs = {"vector_field.csv"};
    if (a.svg) {
        std::vector<Matrix> overlays;
        if (a.overlay > 0) {
            const Matrix z = sweep_starts(2, a.overlay * a.overlay, 0);
            const Matrix codes = code.size() ? Matrix(code.transpose()) : Matrix();
            const auto steps = rollout_task(m, z, 2000, codes);
            for (Eigen::Index k = 0; k < z.rows(); ++k) {
                Matrix t(static_cast<Eigen::Index>(steps.size()), 2);
                for (std::size_t s = 0; s < steps.size(); ++s) t.row(static_cast<Eigen::Index>(s)) = steps[s].row(k);
                overlays.push_back(m.workspace.denormalize_rows(t));
            }
        }
        io::write_vector_field_svg(field, m.workspace, dir / "vector_field.svg", overlays);
        man.outputs.push_back("vector_field.svg");
    }
    man.config_hash = io::fnv1a_hex(Json{{"grid", a.grid}, {"code", a.code}, {"motion", a.motion}}.dump());
    man.seed = m.config.seed;
    man.checkpoint_path = a.checkpoint;
    man.finished_at = io::utc_timestamp();
    io::write_manifest(man, dir / "manifest.json");
    out << "wrote " << field.rows() << " field samples to " << dir.string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string family = "sine";
    SynthOptions opt;
    std::string output;
    std::string format = "json";
};

void save_dataset(const MotionDataset& ds, const fs::path& path, const std::string& format) {
    if (format == "json") io::save_dataset_json(ds, path);
    else if (format == "csv") io::save_dataset_csv_dir(ds, path);
    else throw std::invalid_argument("unknown dataset format '" + format + "' (json or csv)");
}

void write_side_manifest(io::RunManifest man, const fs::path& output, const MotionDataset& ds) {
    man.dataset_fingerprint = io::dataset_fingerprint(ds);
    man.outputs = {output.filename().string()};
    man.finished_at = io::utc_timestamp();
    const fs::path side = fs::is_directory(output) ? output / "manifest.json"
                                                    : fs::path(output.string() + ".manifest.json");
    io::write_manifest(man, side);
}

int cmd_synth(const SynthArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
    io::RunManifest man;
    man.command = "dataset synth";
    man.arguments = argv;
    man.started_at = io::utc_timestamp();
    const MotionDataset ds = synthesize(a.family, a.opt);
    const fs::path path = a.output.empty() ? output_root() / "datasets" / (a.family + (a.format == "json" ? ".json" : ""))
                                           : fs::path(a.output);
    save_dataset(ds, path, a.format);
    man.seed = a.opt.seed;
    man.config_hash = io::fnv1a_hex(Json{{"family", a.family},
                                         {"demos", a.opt.demos},
                                         {"samples", a.opt.samples},
                                         {"dt", a.opt.dt},
                                         {"jitter", a.opt.jitter},
                                         {"rest", a.opt.rest},
                                         {"profile", a.opt.profile == TimingProfile::minimum_jerk ? "minimum_jerk" : "exponential"},
                                         {"order", a.opt.order}}
                                        .dump());
    write_side_manifest(man, path, ds);
    out << "wrote " << ds.trajectories.size() << " trajectories to " << path.string() << "\n";
    return kOk;
}

struct ConvertArgs {
    std::string input, output, format = "json", name;
    double dt = 0.01;
    int order = 1;
    std::string goal;
};

io::CsvDatasetOptions csv_options(const ConvertArgs& a) {
    io::CsvDatasetOptions o;
    o.name = a.name;
    o.dt = a.dt;
    o.order = a.order;
    if (!a.goal.empty()) o.goal = parse_vector(a.goal, "--goal");
    return o;
}

int cmd_convert(const ConvertArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
    io::RunManifest man;
    man.command = "dataset convert";
    man.arguments = argv;
    man.started_at = io::utc_timestamp();
    const MotionDataset ds = io::load_dataset(a.input, csv_options(a));
    save_dataset(ds, a.output, a.format);
    write_side_manifest(man, a.output, ds);
    out << "converted " << ds.trajectories.size() << " trajectories to " << a.output << "\n";
    return kOk;
}

int cmd_inspect(const ConvertArgs& a, std::ostream& out) {
    const MotionDataset ds = io::load_dataset(a.input, csv_options(a));
    out << "name " << ds.name << "\n"
        << "n " << ds.dim << "\n"
        << "order " << ds.order << "\n"
        << "dt " << ds.dt << "\n"
        << "trajectories " << ds.trajectories.size() << "\n"
        << "lengths";
    for (const auto& t : ds.trajectories) out << " " << t.rows();
    const Vector g = derive_goal(ds);
    out << "\nderived_goal";
    for (Eigen::Index i = 0; i < g.size(); ++i) out << " " << g[i];
    out << "\n";
    if (ds.goal) {
        out << "goal";
        for (Eigen::Index i = 0; i < ds.goal->size(); ++i) out << " " << (*ds.goal)[i];
        out << "\n";
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct HyperoptArgs {
    std::string space;
    DatasetArgs data;
    std::string config;
    int budget = 20;
    long check_every = 500;
    std::uint64_t seed = 0;
    bool no_prune = false;
    int min_completed = 3;
    std::string out;
};

int cmd_hyperopt(const HyperoptArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
    io::RunManifest man;
    man.command = "hyperopt";
    man.arguments = argv;
    man.started_at = io::utc_timestamp();
    const SearchSpace space = io::search_space_from_json(io::read_json(a.space));
    const auto datasets = a.data.load();
    const TrainConfig base = a.config.empty() ? TrainConfig{} : io::train_config_from_json(io::read_json(a.config));
    base.validate();
    PruneConfig prune;
    prune.enabled = !a.no_prune;
    prune.min_completed = a.min_completed;

    const TrainingSearchResult r = tune_training(space, a.budget, prune, datasets, base, a.check_every, a.seed);

    const fs::path dir = resolve_out(a.out, "hyperopt");
    fs::create_directories(dir);
    io::write_json(io::train_config_to_json(r.best_config), dir / "best_config.json");
    {
        std::ofstream trials(dir / "trials.csv", std::ios::binary);
        trials << "trial,status,pruned_at,objective";
        for (const auto& p : space.params) trials << "," << p.name;
        trials << ",note\n" << std::setprecision(17);
        for (const auto& t : r.search.trials) {
            const char* status = t.failed ? "failed" : t.pruned ? "pruned" : "complete";
            trials << t.index << "," << status << "," << (t.pruned ? std::to_string(t.pruned_at) : "") << ","
                   << t.objective;
            for (const auto& p : space.params) trials << "," << t.params.at(p.name);
            std::string note = t.note;
            for (char& c : note)
                if (c == ',' || c == '\n') c = ';';
            trials << "," << note << "\n";
        }
    }
    man.config_hash = io::fnv1a_hex(io::read_json(a.space).dump() + io::train_config_to_json(base).dump());
    man.seed = a.seed;
    man.dataset_fingerprint = fingerprint(datasets);
    man.outputs = {"best_config.json", "trials.csv"};
    man.finished_at = io::utc_timestamp();
    for (const auto& w : r.search.warnings) out << "warning: " << w << "\n";
    if (r.search.best_index < 0) man.status = "no finite trial";
    io::write_manifest(man, dir / "manifest.json");
    if (r.search.best_index < 0) throw NumericDivergence("no trial produced a finite objective");
    out << "best trial " << r.search.best_index << " objective " << r.search.best_objective << "\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Learn stable motion generators from demonstrations", "condor"};
    app.require_subcommand(1);
    app.footer(std::string("Outputs default to $") + kOutputRootEnv + " (or ./runs) when --out is omitted.");

    TrainArgs train_a;
    auto* train_cmd = app.add_subcommand("train", "Train a model on one or more datasets");
    train_a.data.add(train_cmd, true);
    train_cmd->add_option("--config", train_a.config, "Training config JSON");
    train_cmd->add_option("--out", train_a.out, "Output directory");
    train_cmd->add_option("--seed", train_a.seed, "Override the config seed");
    train_cmd->add_option("--iterations", train_a.iterations, "Override the iteration count");
    train_cmd->add_option("--checkpoint-every", train_a.checkpoint_every, "Also checkpoint every N iterations");

    EvalArgs eval_a;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint against a dataset");
    eval_cmd->add_option("--checkpoint", eval_a.checkpoint, "Checkpoint JSON")->required();
    eval_a.data.add(eval_cmd, false);
    eval_cmd->add_option("--config", eval_a.config, "Evaluation config JSON");
    eval_cmd->add_option("--steps", eval_a.steps, "Sweep integration steps L (default 2000)");
    eval_cmd->add_option("--starts", eval_a.starts, "Sweep initial states P (default 1225)");
    eval_cmd->add_option("--epsilon", eval_a.epsilon, "Convergence radius in original units");
    eval_cmd->add_option("--epsilon-span", eval_a.epsilon_span, "Convergence radius as a fraction of the span (default 0.01)");
    eval_cmd->add_option("--seed", eval_a.seed, "Seed for sampled starts");
    eval_cmd->add_option("--code", eval_a.code, "Motion code, comma separated");
    eval_cmd->add_option("--motion", eval_a.motion, "One-hot motion index when --code is absent");
    eval_cmd->add_option("--out", eval_a.out, "Output directory");

    RolloutArgs roll_a;
    auto* roll_cmd = app.add_subcommand("rollout", "Roll a checkpoint out from initial states");
    roll_cmd->add_option("--checkpoint", roll_a.checkpoint, "Checkpoint JSON")->required();
    roll_cmd->add_option("--x0", roll_a.x0, "Initial state in original units, comma separated (repeatable)");
    roll_cmd->add_option("--x0-file", roll_a.x0_file, "CSV of initial states with a header row");
    roll_cmd->add_option("--random", roll_a.random, "Add N seeded uniform starts over the workspace");
    roll_cmd->add_option("--seed", roll_a.seed, "Seed for --random");
    roll_cmd->add_option("--horizon", roll_a.horizon, "Number of Euler steps")->capture_default_str();
    roll_cmd->add_option("--code", roll_a.code, "Motion code, comma separated");
    roll_cmd->add_option("--motion", roll_a.motion, "One-hot motion index when --code is absent");
    roll_cmd->add_option("--out", roll_a.out, "Output directory");

    FieldArgs field_a;
    auto* field_cmd = app.add_subcommand("vector-field", "Export the learned field of a 2-D first-order model");
    field_cmd->add_option("--checkpoint", field_a.checkpoint, "Checkpoint JSON")->required();
    field_cmd->add_option("--grid", field_a.grid, "Grid resolution G")->capture_default_str();
    field_cmd->add_flag("--svg", field_a.svg, "Also write an SVG quiver plot");
    field_cmd->add_option("--overlay", field_a.overlay, "Draw rollouts from a KxK grid on the SVG");
    field_cmd->add_option("--code", field_a.code, "Motion code, comma separated");
    field_cmd->add_option("--motion", field_a.motion, "One-hot motion index when --code is absent");
    field_cmd->add_option("--out", field_a.out, "Output directory");

    auto* ds_cmd = app.add_subcommand("dataset", "Create, convert or inspect datasets");
    ds_cmd->require_subcommand(1);
    SynthArgs synth_a;
    auto* synth_cmd = ds_cmd->add_subcommand("synth", "Generate a synthetic motion family");
    synth_cmd->add_option("--family", synth_a.family, "sine, spiral, scurve, loop or line")->capture_default_str();
    synth_cmd->add_option("--demos", synth_a.opt.demos, "Demonstrations")->capture_default_str();
    synth_cmd->add_option("--samples", synth_a.opt.samples, "Samples per demonstration")->capture_default_str();
    synth_cmd->add_option("--dt", synth_a.opt.dt, "Sample period")->capture_default_str();
    synth_cmd->add_option("--jitter", synth_a.opt.jitter, "Relative shape perturbation")->capture_default_str();
    synth_cmd->add_option("--rest", synth_a.opt.rest, "Fraction of samples at rest on the goal")->capture_default_str();
    synth_cmd->add_option("--order", synth_a.opt.order, "1 or 2")->capture_default_str();
    const std::map<std::string, TimingProfile> profiles{{"exponential", TimingProfile::exponential},
                                                        {"minimum_jerk", TimingProfile::minimum_jerk}};
    synth_cmd->add_option("--profile", synth_a.opt.profile, "exponential or minimum_jerk")
        ->transform(CLI::CheckedTransformer(profiles, CLI::ignore_case));
    synth_cmd->add_option("--seed", synth_a.opt.seed, "Seed")->capture_default_str();
    synth_cmd->add_option("--output", synth_a.output, "Output file (or directory for csv)");
    synth_cmd->add_option("--format", synth_a.format, "json or csv")->capture_default_str();

    ConvertArgs conv_a;
    auto* conv_cmd = ds_cmd->add_subcommand("convert", "Convert between JSON and CSV-directory datasets");
    conv_cmd->add_option("--input", conv_a.input, "Dataset JSON file or CSV directory")->required();
    conv_cmd->add_option("--output", conv_a.output, "Output path")->required();
    conv_cmd->add_option("--format", conv_a.format, "json or csv")->capture_default_str();
    conv_cmd->add_option("--name", conv_a.name, "Dataset name for CSV input");
    conv_cmd->add_option("--dt", conv_a.dt, "Sample period for CSV input")->capture_default_str();
    conv_cmd->add_option("--order", conv_a.order, "Order for CSV input")->capture_default_str();
    conv_cmd->add_option("--goal", conv_a.goal, "Explicit goal for CSV input, comma separated");

    ConvertArgs insp_a;
    auto* insp_cmd = ds_cmd->add_subcommand("inspect", "Print a dataset summary");
    insp_cmd->add_option("--input", insp_a.input, "Dataset JSON file or CSV directory")->required();
    insp_cmd->add_option("--dt", insp_a.dt, "Sample period for CSV input")->capture_default_str();
    insp_cmd->add_option("--order", insp_a.order, "Order for CSV input")->capture_default_str();

    HyperoptArgs hyp_a;
    auto* hyp_cmd = app.add_subcommand("hyperopt", "Random search with median pruning");
    hyp_cmd->add_option("--space", hyp_a.space, "Search space JSON")->required();
    hyp_a.data.add(hyp_cmd, true);
    hyp_cmd->add_option("--config", hyp_a.config, "Base training config JSON");
    hyp_cmd->add_option("--budget", hyp_a.budget, "Number of trials")->capture_default_str();
    hyp_cmd->add_option("--check-every", hyp_a.check_every, "Iterations between pruning checks")->capture_default_str();
    hyp_cmd->add_option("--seed", hyp_a.seed, "Search seed")->capture_default_str();
    hyp_cmd->add_flag("--no-prune", hyp_a.no_prune, "Disable pruning");
    hyp_cmd->add_option("--min-completed", hyp_a.min_completed, "Completed trials before pruning starts")
        ->capture_default_str();
    hyp_cmd->add_option("--out", hyp_a.out, "Output directory");

    std::vector<char*> argv;
    std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"condor"} : args;
    for (auto& s : storage) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    const std::vector<std::string> rest(storage.begin() + 1, storage.end());
    try {
        if (*train_cmd) return cmd_train(train_a, rest, out);
        if (*eval_cmd) return cmd_eval(eval_a, rest, out);
        if (*roll_cmd) return cmd_rollout(roll_a, rest, out);
        if (*field_cmd) return cmd_vector_field(field_a, rest, out);
        if (*synth_cmd) return cmd_synth(synth_a, rest, out);
        if (*conv_cmd) return cmd_convert(conv_a, rest, out);
        if (*insp_cmd) return cmd_inspect(insp_a, out);
        if (*hyp_cmd) return cmd_hyperopt(hyp_a, rest, out);
    } catch (const io::InputError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const NumericDivergence& e) {
        err << "error: numeric divergence: " << e.what() << "\n";
        return kDivergence;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kValidationError;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << "\n";
        return kValidationError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}

}  // namespace condor::cli
