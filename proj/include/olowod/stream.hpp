#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "olowod/protocol.hpp"

namespace olowod {

// One labeled sample on the wire (JSON-Lines).
struct StreamRecord {
    std::string image_id;
    int task_id = 0;
    bool test_split = false;
    int category_id = 0;
    FeatureVector feature;
    std::optional<std::vector<double>> raw;       // flattened (c,h,w) tensor
    std::optional<std::array<int, 3>> raw_shape;
};

// The full run configuration. Loading fills absent keys with these defaults;
// the effective (fully resolved) document is echoed next to every report.
struct RunConfig {
    int feature_dim = 16;
    int tasks = 4;
    int n_per_task = 20;
    int epochs_base = 5;
    int exemplars_per_class = 50;
    double gamma = 0.5;
    double flp_frequency = 0.01;
    double dlp_frequency = 0.01;
    double noise_scale = 1.0;
    std::optional<std::pair<double, double>> clamp;
    int group_size = 80;
    int max_groups = 20;
    int bins = 100;
    double unknown_threshold = 0.5;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    std::string selection_strategy = "prototype";  // or "random"
    bool flp_on_replay = false;

    // synthetic stream geometry
    int train_records_per_class = 100;
    int test_records_per_class = 20;
    double cluster_separation = 6.0;
    double cluster_spread = 1.0;

    TaskSchedule make_schedule() const;
    FlpConfig make_flp() const;
    DlpConfig make_dlp() const;
    ProtocolOptions make_options() const;
};

// Shortest representation that parses back to the identical double.
std::string double_repr(double x);

RunConfig load_config(const std::string& path);
RunConfig config_from_json_string(const std::string& text);
std::string config_to_json_string(const RunConfig& cfg);
void validate_config(const RunConfig& cfg);

std::string stream_file_name(int task_id);  // task_<t>_train.jsonl
inline constexpr const char* kTestFileName = "test.jsonl";

// Writes one train file per task plus the shared test file covering every
// category (so later tasks' categories act as unknowns for earlier ones).
// Deterministic per cfg.seed.
void generate_stream(const RunConfig& cfg, const std::string& out_dir);

// Parses and validates records in file order. expected_dim > 0 enforces the
// feature length; errors name the file and line.
std::vector<StreamRecord> load_stream_file(const std::string& path, int expected_dim);

// Loads all task streams + test stream from a directory and assigns stable
// numeric sample ids (task_id * 1e6 + line index).
RunInputs load_run_inputs(const RunConfig& cfg, const std::string& data_dir);

std::string record_to_json_line(const StreamRecord& r);
StreamRecord record_from_json_line(const std::string& line);

// Report emission: summary.csv, task_<t>.json, predictions_task_<t>.jsonl and
// effective_config.json under out_dir.
std::string summary_csv(const RunResult& result);
std::string task_report_json(const TaskOutcome& outcome, int task_id);
std::string prediction_to_json_line(const EvalRecord& r);
EvalRecord prediction_from_json_line(const std::string& line);
void write_reports(const RunConfig& cfg, const RunResult& result, const std::string& out_dir);

// Exemplar selections as a JSON document (select subcommand output).
std::string selections_to_json(const std::vector<ExemplarSelection>& selections,
                               const std::vector<std::string>& id_names);

std::string fit_report_to_json(const FitReport& report);

}  // namespace olowod
