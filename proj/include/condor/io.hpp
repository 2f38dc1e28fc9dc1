#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "condor/dynamics.hpp"
#include "condor/evaluation.hpp"
#include "condor/geometry.hpp"
#include "condor/learning.hpp"

namespace condor::io {

namespace fs = std::filesystem;
using Json = nlohmann::json;

/// Unreadable or malformed input (missing file, bad JSON, bad CSV).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Datasets

/// Metadata for a directory of per-trajectory CSV files, which carry positions only.
struct CsvDatasetOptions {
    std::string name;  ///< defaults to the directory name
    double dt = 0.01;
    int order = 1;
    std::optional<Vector> goal;
};

Json dataset_to_json(const MotionDataset& ds);
MotionDataset dataset_from_json(const Json& j);

/// Loads a JSON dataset file or a directory of CSV files (sorted by file name).
MotionDataset load_dataset(const fs::path& path, const CsvDatasetOptions& csv = {});
void save_dataset_json(const MotionDataset& ds, const fs::path& path);
/// One CSV per trajectory, header "x0,x1,...", named traj_000.csv, ...
void save_dataset_csv_dir(const MotionDataset& ds, const fs::path& dir);

/// Stable hash of the dataset contents.
std::string dataset_fingerprint(const MotionDataset& ds);

// ---------------------------------------------------------------------------
// Configs

Json train_config_to_json(const TrainConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const Json& j, const TrainConfig& base = {});
Json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const Json& j);
Json eval_config_to_json(const EvalConfig& cfg);
EvalConfig eval_config_from_json(const Json& j, const EvalConfig& base = {});
SearchSpace search_space_from_json(const Json& j);

Json read_json(const fs::path& path);
void write_json(const Json& j, const fs::path& path);

/// 64-bit FNV-1a of `text` as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
    CondorModel model;
    long step = 0;
    std::optional<TrainConfig> train_config;
};

Json checkpoint_to_json(const CondorModel& model, long step, const TrainConfig* train_config = nullptr);
/// Rebuilds the model from its config and validates every parameter shape.
Checkpoint checkpoint_from_json(const Json& j);
void save_checkpoint(const fs::path& path, const CondorModel& model, long step,
                     const TrainConfig* train_config = nullptr);
Checkpoint load_checkpoint(const fs::path& path);

// ---------------------------------------------------------------------------
// Tables

/// "iter,loss_il,loss_stable,loss_total"
void write_history_csv(const std::vector<HistoryRow>& history, const fs::path& path);
/// "t,x0,...": one row per state, t in seconds.
void write_trajectory_csv(const Matrix& states, double dt, const fs::path& path);

/// Rows (x0, x1, dx0, dx1) in original units over a G x G grid spanning the workspace.
Matrix vector_field_grid(const CondorModel& model, int grid, const Vector& code = Vector());
void write_vector_field_csv(const Matrix& field, const fs::path& path);
void write_vector_field_svg(const Matrix& field, const Workspace& workspace, const fs::path& path,
                            const std::vector<Matrix>& overlays = {});

Json eval_report_to_json(const EvalReport& report);
/// Single-row summary "metric,value" table.
void write_eval_report_csv(const EvalReport& report, const fs::path& path);
/// "fraction,mean,std"
void write_mismatch_csv(const MismatchCurve& curve, const fs::path& path);

/// Reads a numeric CSV with a header row.
Matrix read_csv_matrix(const fs::path& path, std::vector<std::string>* header = nullptr);

// ---------------------------------------------------------------------------
// Run manifest

struct RunManifest {
    std::string command;
    std::vector<std::string> arguments;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string dataset_fingerprint;
    std::string checkpoint_path;
    std::vector<std::string> outputs;
    std::string started_at;
    std::string finished_at;
    std::string status = "ok";
};

Json manifest_to_json(const RunManifest& m);
void write_manifest(const RunManifest& m, const fs::path& path);
/// Current UTC time, ISO 8601.
std::string utc_timestamp();

}  // namespace condor::io
