#include "condor/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace condor::io {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

Json vec_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector json_vec(const Json& j, const std::string& what) {
    if (!j.is_array()) throw InputError(what + " must be an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InputError(what + " must be an array of numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Json matrix_json(const Matrix& m) {
    return Json{{"rows", m.rows()}, {"cols", m.cols()},
                {"data", std::vector<double>(m.data(), m.data() + m.size())}};  // column-major
}

Matrix json_matrix(const Json& j, const std::string& what) {
    const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
    const Vector data = json_vec(j.at("data"), what);
    if (rows < 0 || cols < 0 || data.size() != rows * cols)
        throw std::invalid_argument(what + ": data length does not match its shape");
    return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

template <typename T>
void take(const Json& j, const char* key, T& field, std::set<std::string>& seen) {
    seen.insert(key);
    if (j.contains(key)) field = j.at(key).get<T>();
}

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& what) {
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw std::invalid_argument("unknown " + what + " key '" + key + "'");
}

std::string gain_mode_name(GainMode m) { return m == GainMode::fixed ? "fixed" : "adaptive"; }

GainMode gain_mode_from(const std::string& s) {
    if (s == "adaptive") return GainMode::adaptive;
    if (s == "fixed") return GainMode::fixed;
    throw std::invalid_argument("unknown gain mode '" + s + "'");
}

Json arch_json(const Architecture& a) {
    return {{"hidden_width", a.hidden_width}, {"encoder_layers", a.encoder_layers},
            {"decoder_layers", a.decoder_layers}, {"gain_layers", a.gain_layers}};
}

Architecture arch_from(const Json& j, Architecture a) {
    std::set<std::string> seen;
    take(j, "hidden_width", a.hidden_width, seen);
    take(j, "encoder_layers", a.encoder_layers, seen);
    take(j, "decoder_layers", a.decoder_layers, seen);
    take(j, "gain_layers", a.gain_layers, seen);
    reject_unknown(j, seen, "architecture");
    return a;
}

Json store_json(const nn::ParameterStore& s) {
    Json out = Json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        Json p = matrix_json(s.value(i));
        p["name"] = s.name(i);
        out.push_back(std::move(p));
    }
    return out;
}

void load_store(const Json& j, nn::ParameterStore& s, const std::string& net) {
    if (!j.is_array() || j.size() != s.size())
        throw std::invalid_argument(net + ": expected " + std::to_string(s.size()) + " parameter tensors");
    for (std::size_t i = 0; i < s.size(); ++i) {
        const std::string name = j[i].at("name").get<std::string>();
        if (name != s.name(i)) throw std::invalid_argument(net + ": expected " + s.name(i) + ", found " + name);
        Matrix m = json_matrix(j[i], net + "." + name);
        if (m.rows() != s.value(i).rows() || m.cols() != s.value(i).cols())
            throw std::invalid_argument(net + "." + name + " has the wrong shape");
        if (!m.allFinite()) throw std::invalid_argument(net + "." + name + " contains non-finite values");
        s.value(i) = std::move(m);
    }
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

// ---------------------------------------------------------------------------

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_json(const Json& j, const fs::path& path) { open_out(path) << j.dump(2) << "\n"; }

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Datasets

Json dataset_to_json(const MotionDataset& ds) {
    Json trajs = Json::array();
    for (const Matrix& t : ds.trajectories) {
        Json rows = Json::array();
        for (Eigen::Index r = 0; r < t.rows(); ++r) rows.push_back(vec_json(t.row(r).transpose()));
        trajs.push_back(std::move(rows));
    }
    Json j{{"name", ds.name}, {"dt", ds.dt}, {"dim", ds.dim}, {"order", ds.order}, {"trajectories", trajs}};
    if (ds.goal) j["goal"] = vec_json(*ds.goal);
    return j;
}

MotionDataset dataset_from_json(const Json& j) {
    if (!j.is_object()) throw InputError("dataset must be a JSON object");
    MotionDataset ds;
    try {
        ds.name = j.value("name", std::string());
        ds.dt = j.at("dt").get<double>();
        ds.dim = j.at("dim").get<int>();
        ds.order = j.value("order", 1);
        for (const auto& t : j.at("trajectories")) {
            if (!t.is_array() || t.empty()) throw InputError("each trajectory must be a non-empty array of points");
            const std::size_t width = t[0].size();
            Matrix m(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(width));
            for (std::size_t r = 0; r < t.size(); ++r) {
                if (t[r].size() != width) throw InputError("trajectory points have inconsistent widths");
                m.row(static_cast<Eigen::Index>(r)) = json_vec(t[r], "trajectory point").transpose();
            }
            ds.trajectories.push_back(std::move(m));
        }
        if (j.contains("goal") && !j.at("goal").is_null()) ds.goal = json_vec(j.at("goal"), "goal");
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed dataset: ") + e.what());
    }
    ds.validate();
    return ds;
}

Matrix read_csv_matrix(const fs::path& path, std::vector<std::string>* header) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InputError(path.string() + " is empty");
    std::vector<std::string> head;
    for (auto& h : split(line, ',')) head.push_back(trim(h));
    std::vector<double> values;
    long rows = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != head.size())
            throw InputError(path.string() + ": row " + std::to_string(rows + 2) + " has " +
                             std::to_string(cells.size()) + " columns, header has " + std::to_string(head.size()));
        for (const auto& c : cells) {
            try {
                std::size_t used = 0;
                const std::string t = trim(c);
                values.push_back(std::stod(t, &used));
                if (used != t.size()) throw std::invalid_argument(t);
            } catch (const std::exception&) {
                throw InputError(path.string() + ": non-numeric cell '" + c + "'");
            }
        }
        ++rows;
    }
    if (header) *header = head;
    Matrix m(rows, static_cast<Eigen::Index>(head.size()));
    for (long r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < head.size(); ++c)
            m(r, static_cast<Eigen::Index>(c)) = values[static_cast<std::size_t>(r) * head.size() + c];
    return m;
}

MotionDataset load_dataset(const fs::path& path, const CsvDatasetOptions& csv) {
    if (!fs::exists(path)) throw InputError("dataset not found: " + path.string());
    if (!fs::is_directory(path)) return dataset_from_json(read_json(path));

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InputError("no .csv files in " + path.string());

    MotionDataset ds;
    ds.name = csv.name.empty() ? fs::absolute(path).lexically_normal().filename().string() : csv.name;
    if (ds.name.empty()) ds.name = fs::absolute(path).lexically_normal().parent_path().filename().string();
    ds.dt = csv.dt;
    ds.order = csv.order;
    ds.goal = csv.goal;
    for (const auto& f : files) {
        std::vector<std::string> header;
        Matrix m = read_csv_matrix(f, &header);
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] != "x" + std::to_string(c))
                throw InputError(f.string() + ": expected header x0,x1,...");
        ds.trajectories.push_back(std::move(m));
    }
    const int width = static_cast<int>(ds.trajectories.front().cols());
    ds.dim = ds.order == 2 ? 2 * width : width;
    ds.validate();
    return ds;
}

void save_dataset_json(const MotionDataset& ds, const fs::path& path) {
    ds.validate();
    write_json(dataset_to_json(ds), path);
}

void save_dataset_csv_dir(const MotionDataset& ds, const fs::path& dir) {
    ds.validate();
    fs::create_directories(dir);
    for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof name, "traj_%03zu.csv", i);
        auto out = open_out(dir / name);
        const Matrix& t = ds.trajectories[i];
        for (Eigen::Index c = 0; c < t.cols(); ++c) out << (c ? "," : "") << "x" << c;
        out << "\n";
        for (Eigen::Index r = 0; r < t.rows(); ++r) {
            for (Eigen::Index c = 0; c < t.cols(); ++c) out << (c ? "," : "") << num(t(r, c));
            out << "\n";
        }
    }
}

std::string dataset_fingerprint(const MotionDataset& ds) { return fnv1a_hex(dataset_to_json(ds).dump()); }

// ---------------------------------------------------------------------------
// Configs

Json train_config_to_json(const TrainConfig& c) {
    return {{"lambda_stable", c.lambda_stable},
            {"margin", c.margin},
            {"imitation_window", c.imitation_window},
            {"stability_window", c.stability_window},
            {"imitation_batch", c.imitation_batch},
            {"stability_batch", c.stability_batch},
            {"alpha_max", c.alpha_max},
            {"iterations", c.iterations},
            {"learning_rate", c.learning_rate},
            {"final_lr_fraction", c.final_lr_fraction},
            {"weight_decay", c.weight_decay},
            {"loss_variant", to_string(c.loss_variant)},
            {"gain_mode", gain_mode_name(c.gain_mode)},
            {"fixed_gain", c.fixed_gain},
            {"architecture", arch_json(c.arch)},
            {"padding", c.padding},
            {"log_every", c.log_every},
            {"seed", c.seed}};
}

TrainConfig train_config_from_json(const Json& j, const TrainConfig& base) {
    if (!j.is_object()) throw InputError("training config must be a JSON object");
    TrainConfig c = base;
    std::set<std::string> seen;
    try {
        take(j, "lambda_stable", c.lambda_stable, seen);
        take(j, "margin", c.margin, seen);
        take(j, "imitation_window", c.imitation_window, seen);
        take(j, "stability_window", c.stability_window, seen);
        take(j, "imitation_batch", c.imitation_batch, seen);
        take(j, "stability_batch", c.stability_batch, seen);
        take(j, "alpha_max", c.alpha_max, seen);
        take(j, "iterations", c.iterations, seen);
        take(j, "learning_rate", c.learning_rate, seen);
        take(j, "final_lr_fraction", c.final_lr_fraction, seen);
        take(j, "weight_decay", c.weight_decay, seen);
        take(j, "fixed_gain", c.fixed_gain, seen);
        take(j, "padding", c.padding, seen);
        take(j, "log_every", c.log_every, seen);
        take(j, "seed", c.seed, seen);
        seen.insert("loss_variant");
        if (j.contains("loss_variant")) c.loss_variant = loss_variant_from_string(j.at("loss_variant").get<std::string>());
        seen.insert("gain_mode");
        if (j.contains("gain_mode")) c.gain_mode = gain_mode_from(j.at("gain_mode").get<std::string>());
        seen.insert("architecture");
        if (j.contains("architecture")) c.arch = arch_from(j.at("architecture"), c.arch);
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed training config: ") + e.what());
    }
    reject_unknown(j, seen, "training config");
    return c;
}

Json model_config_to_json(const ModelConfig& c) {
    return {{"order", c.order},       {"dim", c.dim},
            {"code_dim", c.code_dim}, {"dt", c.dt},
            {"latent_dt", c.latent_dt}, {"alpha_max", c.alpha_max},
            {"gain_mode", gain_mode_name(c.gain_mode)}, {"fixed_gain", c.fixed_gain},
            {"architecture", arch_json(c.arch)}, {"seed", c.seed}};
}

ModelConfig model_config_from_json(const Json& j) {
    ModelConfig c;
    std::set<std::string> seen;
    take(j, "order", c.order, seen);
    take(j, "dim", c.dim, seen);
    take(j, "code_dim", c.code_dim, seen);
    take(j, "dt", c.dt, seen);
    take(j, "latent_dt", c.latent_dt, seen);
    take(j, "alpha_max", c.alpha_max, seen);
    take(j, "fixed_gain", c.fixed_gain, seen);
    take(j, "seed", c.seed, seen);
    seen.insert("gain_mode");
    if (j.contains("gain_mode")) c.gain_mode = gain_mode_from(j.at("gain_mode").get<std::string>());
    seen.insert("architecture");
    if (j.contains("architecture")) c.arch = arch_from(j.at("architecture"), c.arch);
    reject_unknown(j, seen, "model config");
    c.validate();
    return c;
}

Json eval_config_to_json(const EvalConfig& c) {
    return {{"steps", c.stability.steps},
            {"starts", c.stability.starts},
            {"epsilon", c.stability.epsilon},
            {"seed", c.stability.seed},
            {"epsilon_span_fraction", c.epsilon_span_fraction},
            {"mismatch_starts", c.mismatch.starts},
            {"mismatch_horizon", c.mismatch.horizon},
            {"mismatch_points", c.mismatch.points},
            {"gamma_stable", c.gamma_stable},
            {"gamma_goal", c.gamma_goal}};
}

EvalConfig eval_config_from_json(const Json& j, const EvalConfig& base) {
    if (!j.is_object()) throw InputError("evaluation config must be a JSON object");
    EvalConfig c = base;
    std::set<std::string> seen;
    try {
        take(j, "steps", c.stability.steps, seen);
        take(j, "starts", c.stability.starts, seen);
        take(j, "epsilon", c.stability.epsilon, seen);
        take(j, "seed", c.stability.seed, seen);
        take(j, "epsilon_span_fraction", c.epsilon_span_fraction, seen);
        take(j, "mismatch_starts", c.mismatch.starts, seen);
        take(j, "mismatch_horizon", c.mismatch.horizon, seen);
        take(j, "mismatch_points", c.mismatch.points, seen);
        take(j, "gamma_stable", c.gamma_stable, seen);
        take(j, "gamma_goal", c.gamma_goal, seen);
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed evaluation config: ") + e.what());
    }
    reject_unknown(j, seen, "evaluation config");
    c.mismatch.seed = c.stability.seed;
    return c;
}

SearchSpace search_space_from_json(const Json& j) {
    SearchSpace space;
    try {
        const Json& params = j.is_array() ? j : j.at("params");
        for (const auto& p : params) {
            ParamRange r;
            r.name = p.at("name").get<std::string>();
            r.low = p.at("low").get<double>();
            r.high = p.at("high").get<double>();
            const std::string scale = p.value("scale", std::string("linear"));
            if (scale == "log") r.scale = ParamScale::log;
            else if (scale != "linear") throw std::invalid_argument("unknown scale '" + scale + "' for " + r.name);
            r.integer = p.value("integer", false);
            space.params.push_back(r);
        }
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed search space: ") + e.what());
    }
    space.validate();
    return space;
}

// ---------------------------------------------------------------------------
// Checkpoints

Json checkpoint_to_json(const CondorModel& model, long step, const TrainConfig* train_config) {
    Json j{{"format", "condor-checkpoint"},
           {"version", 1},
           {"step", step},
           {"seed", model.config.seed},
           {"model", model_config_to_json(model.config)},
           {"workspace", {{"lower", vec_json(model.workspace.lower())}, {"upper", vec_json(model.workspace.upper())}}},
           {"goal", vec_json(model.workspace.denormalize(model.goal))},
           {"parameters",
            {{"encoder", store_json(model.encoder)},
             {"decoder", store_json(model.decoder)},
             {"gain", store_json(model.gain)}}}};
    if (train_config) j["train_config"] = train_config_to_json(*train_config);
    return j;
}

Checkpoint checkpoint_from_json(const Json& j) {
    if (!j.is_object() || j.value("format", std::string()) != "condor-checkpoint")
        throw InputError("not a checkpoint file");
    try {
        const ModelConfig cfg = model_config_from_json(j.at("model"));
        const Workspace ws(json_vec(j.at("workspace").at("lower"), "workspace.lower"),
                           json_vec(j.at("workspace").at("upper"), "workspace.upper"));
        const Vector goal = json_vec(j.at("goal"), "goal");
        if (ws.dim() != cfg.dim || goal.size() != cfg.dim)
            throw std::invalid_argument("checkpoint workspace/goal dimension does not match the model");
        Checkpoint ck{CondorModel::create(cfg, ws, goal), j.value("step", 0L), std::nullopt};
        const Json& params = j.at("parameters");
        load_store(params.at("encoder"), ck.model.encoder, "encoder");
        load_store(params.at("decoder"), ck.model.decoder, "decoder");
        load_store(params.value("gain", Json::array()), ck.model.gain, "gain");
        ck.model.check();
        if (j.contains("train_config")) ck.train_config = train_config_from_json(j.at("train_config"));
        return ck;
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const fs::path& path, const CondorModel& model, long step, const TrainConfig* train_config) {
    write_json(checkpoint_to_json(model, step, train_config), path);
}

Checkpoint load_checkpoint(const fs::path& path) {
    if (!fs::exists(path)) throw InputError("checkpoint not found: " + path.string());
    return checkpoint_from_json(read_json(path));
}

// ---------------------------------------------------------------------------
// Tables

void write_history_csv(const std::vector<HistoryRow>& history, const fs::path& path) {
    auto out = open_out(path);
    out << "iter,loss_il,loss_stable,loss_total\n";
    for (const auto& h : history)
        out << h.iteration << "," << num(h.loss_il) << "," << num(h.loss_stable) << "," << num(h.loss_total) << "\n";
}

void write_trajectory_csv(const Matrix& states, double dt, const fs::path& path) {
    auto out = open_out(path);
    out << "t";
    for (Eigen::Index c = 0; c < states.cols(); ++c) out << ",x" << c;
    out << "\n";
    for (Eigen::Index r = 0; r < states.rows(); ++r) {
        out << num(static_cast<double>(r) * dt);
        for (Eigen::Index c = 0; c < states.cols(); ++c) out << "," << num(states(r, c));
        out << "\n";
    }
}

Matrix vector_field_grid(const CondorModel& model, int grid, const Vector& code) {
    if (model.dim() != 2 || model.config.order != 1)
        throw std::invalid_argument("vector-field export requires n=2, order 1");
    if (grid < 1) throw std::invalid_argument("vector-field grid must be >= 1");
    Matrix z(grid * grid, 2);
    for (int i = 0; i < grid; ++i) {
        for (int k = 0; k < grid; ++k) {
            const double a = grid == 1 ? 0.0 : -1.0 + 2.0 * i / (grid - 1);
            const double b = grid == 1 ? 0.0 : -1.0 + 2.0 * k / (grid - 1);
            z.row(i * grid + k) << a, b;
        }
    }
    const Matrix codes = expand_codes(model, code.size() ? Matrix(code.transpose()) : Matrix(), z.rows());
    const Matrix dz = task_derivative(model, z, codes);
    Matrix out(z.rows(), 4);
    out.leftCols(2) = model.workspace.denormalize_rows(z);
    // Rates scale with the half-span, without the offset.
    out.rightCols(2) = dz.array().rowwise() * model.workspace.half_span().transpose().array();
    return out;
}

void write_vector_field_csv(const Matrix& field, const fs::path& path) {
    auto out = open_out(path);
    out << "x0,x1,dx0,dx1\n";
    for (Eigen::Index r = 0; r < field.rows(); ++r)
        out << num(field(r, 0)) << "," << num(field(r, 1)) << "," << num(field(r, 2)) << "," << num(field(r, 3))
            << "\n";
}

void write_vector_field_svg(const Matrix& field, const Workspace& ws, const fs::path& path,
                            const std::vector<Matrix>& overlays) {
    constexpr double size = 600.0, pad = 20.0;
    const double sx = (size - 2 * pad) / ws.span()[0], sy = (size - 2 * pad) / ws.span()[1];
    auto px = [&](double x) { return pad + (x - ws.lower()[0]) * sx; };
    auto py = [&](double y) { return size - pad - (y - ws.lower()[1]) * sy; };
    const int grid = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(field.rows())))));
    const double cell = (size - 2 * pad) / grid;
    double longest = 0.0;
    for (Eigen::Index r = 0; r < field.rows(); ++r)
        longest = std::max(longest, std::hypot(field(r, 2) * sx, field(r, 3) * sy));
    const double k = longest > 0.0 ? 0.9 * cell / longest : 0.0;

    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<g stroke=\"#345\" stroke-width=\"1\">\n";
    for (Eigen::Index r = 0; r < field.rows(); ++r) {
        const double x0 = px(field(r, 0)), y0 = py(field(r, 1));
        const double dx = field(r, 2) * sx * k, dy = -field(r, 3) * sy * k;
        const double x1 = x0 + dx, y1 = y0 + dy;
        out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y1 << "\"/>";
        const double len = std::hypot(dx, dy);
        if (len > 1e-9) {
            const double ux = dx / len, uy = dy / len, h = std::min(4.0, 0.4 * len);
            out << "<polyline fill=\"none\" points=\"" << x1 - h * (ux - 0.5 * uy) << "," << y1 - h * (uy + 0.5 * ux)
                << " " << x1 << "," << y1 << " " << x1 - h * (ux + 0.5 * uy) << "," << y1 - h * (uy - 0.5 * ux)
                << "\"/>";
        }
        out << "\n";
    }
    out << "</g>\n";
    for (const Matrix& t : overlays) {
        out << "<polyline fill=\"none\" stroke=\"#c33\" stroke-width=\"1.5\" points=\"";
        for (Eigen::Index r = 0; r < t.rows(); ++r) out << px(t(r, 0)) << "," << py(t(r, 1)) << " ";
        out << "\"/>\n";
    }
    out << "</svg>\n";
}

Json eval_report_to_json(const EvalReport& r) {
    Json demos = Json::array();
    for (const auto& d : r.accuracy.per_demo)
        demos.push_back({{"rmse", d.rmse}, {"dtwd", d.dtwd}, {"frechet", d.frechet}, {"final_distance", d.final_distance}});
    return {{"unsuccessful_fraction", r.unsuccessful_fraction},
            {"sweep_failures", r.sweep_failures},
            {"sweep_trials", r.sweep_trials},
            {"epsilon", r.epsilon},
            {"rmse", r.accuracy.rmse},
            {"dtwd", r.accuracy.dtwd},
            {"frechet", r.accuracy.frechet},
            {"goal_precision", r.accuracy.goal_precision},
            {"latent_mismatch", r.latent_mismatch},
            {"hyper_objective", r.hyper_objective},
            {"per_demo", demos},
            {"mismatch_curve",
             {{"fraction", r.mismatch_curve.fractions}, {"mean", r.mismatch_curve.mean}, {"std", r.mismatch_curve.stddev}}}};
}

void write_eval_report_csv(const EvalReport& r, const fs::path& path) {
    auto out = open_out(path);
    out << "metric,value\n"
        << "unsuccessful_fraction," << num(r.unsuccessful_fraction) << "\n"
        << "sweep_failures," << r.sweep_failures << "\n"
        << "sweep_trials," << r.sweep_trials << "\n"
        << "epsilon," << num(r.epsilon) << "\n"
        << "rmse," << num(r.accuracy.rmse) << "\n"
        << "dtwd," << num(r.accuracy.dtwd) << "\n"
        << "frechet," << num(r.accuracy.frechet) << "\n"
        << "goal_precision," << num(r.accuracy.goal_precision) << "\n"
        << "latent_mismatch," << num(r.latent_mismatch) << "\n"
        << "hyper_objective," << num(r.hyper_objective) << "\n";
}

void write_mismatch_csv(const MismatchCurve& c, const fs::path& path) {
    auto out = open_out(path);
    out << "fraction,mean,std\n";
    for (std::size_t k = 0; k < c.fractions.size(); ++k)
        out << num(c.fractions[k]) << "," << num(c.mean[k]) << "," << num(c.stddev[k]) << "\n";
}

// ---------------------------------------------------------------------------
// Manifest

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Json manifest_to_json(const RunManifest& m) {
    return {{"command", m.command},
            {"arguments", m.arguments},
            {"config_hash", m.config_hash},
            {"seed", m.seed},
            {"dataset_fingerprint", m.dataset_fingerprint},
            {"checkpoint_path", m.checkpoint_path},
            {"outputs", m.outputs},
            {"started_at", m.started_at},
            {"finished_at", m.finished_at},
            {"status", m.status}};
}

void write_manifest(const RunManifest& m, const fs::path& path) { write_json(manifest_to_json(m), path); }

}  // namespace condor::io
