#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "olowod/error.hpp"
#include "olowod/stream.hpp"

namespace {

using namespace olowod;

// precedence: --seed flag > OLOWOD_SEED env > config value
void apply_seed_override(RunConfig& cfg, const std::optional<std::uint64_t>& flag_seed) {
    if (flag_seed) {
        cfg.seed = *flag_seed;
        return;
    }
    if (const char* env = std::getenv("OLOWOD_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw ParseError("OLOWOD_SEED is not a valid integer");
        }
    }
}

int cmd_gen(const std::string& config_path, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed) {
    RunConfig cfg = load_config(config_path);
    apply_seed_override(cfg, seed);
    generate_stream(cfg, out_dir);
    std::cout << "wrote " << cfg.tasks << " task stream(s) and " << kTestFileName << " to "
              << out_dir << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& data_dir,
            const std::string& out_dir, const std::optional<std::uint64_t>& seed) {
    RunConfig cfg = load_config(config_path);
    apply_seed_override(cfg, seed);
    const TaskSchedule schedule = cfg.make_schedule();
    RunInputs inputs = load_run_inputs(cfg, data_dir);

    ModelState model = ModelState::init(cfg.feature_dim, {}, cfg.learning_rate,
                                        cfg.unknown_threshold,
                                        derive_seed(cfg.seed, seed_tag::head_init, 0));
    PrototypeMatrix memory;
    FeatureStore store(cfg.group_size, cfg.max_groups);
    const RunResult result = run_protocol(model, inputs, memory, store, cfg.make_flp(),
                                          cfg.make_dlp(), schedule, cfg.make_options());
    write_reports(cfg, result, out_dir);

    std::ofstream ckpt(std::filesystem::path(out_dir) / "model.json");
    ckpt << model.to_json_string() << "\n";

    for (std::size_t i = 0; i < result.tasks.size(); ++i) {
        const MetricsReport& m = result.tasks[i].metrics;
        std::cout << "task " << (i + 1)
                  << ": map_both=" << (m.map_both ? double_repr(*m.map_both) : "-")
                  << " wi=" << (m.wi ? double_repr(*m.wi) : "-") << " a_ose=" << m.a_ose
                  << " ur=" << (m.ur ? double_repr(*m.ur) : "-") << "\n";
    }
    std::cout << "reports written to " << out_dir << "\n";
    return 0;
}

std::vector<double> pooled_from_features_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open features file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": invalid JSON: " + e.what());
    }
    std::vector<double> values;
    if (j.is_array()) {
        // flat list of scalars
        values = j.get<std::vector<double>>();
    } else if (j.is_object() && j.contains("categories")) {
        // feature store dump: {"categories": [{"category_id":..,"groups":[[[...]..]..]},..]}
        for (const auto& cat : j.at("categories"))
            for (const auto& group : cat.at("groups"))
                for (const auto& feature : group)
                    for (const auto& v : feature) values.push_back(v.get<double>());
    } else {
        throw ParseError(path + ": expected a JSON array of numbers or a store dump");
    }
    return values;
}

int cmd_fit(const std::string& features_path, int bins, const std::string& out_path) {
    const std::vector<double> values = pooled_from_features_file(features_path);
    const FitReport report = fit_all(values, bins);
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path);
    out << fit_report_to_json(report);
    const FitResult* best = report.best();
    std::cout << "fitted " << report.results.size() << " families over " << values.size()
              << " values; best: " << (best ? family_name(best->family) : "none") << "\n";
    return 0;
}

int cmd_select(const std::string& features_path, int k, const std::string& out_path) {
    const std::vector<StreamRecord> records = load_stream_file(features_path, 0);
    if (records.empty()) throw ParseError(features_path + ": no records");

    std::vector<std::string> id_names(records.size());
    std::map<int, std::vector<FeatureVector>> by_category;
    std::map<int, std::vector<std::pair<std::int64_t, FeatureVector>>> samples;
    for (std::size_t i = 0; i < records.size(); ++i) {
        id_names[i] = records[i].image_id;
        by_category[records[i].category_id].push_back(records[i].feature);
        samples[records[i].category_id].emplace_back(static_cast<std::int64_t>(i),
                                                     records[i].feature);
    }
    const PrototypeMatrix protos = build_prototypes(by_category);
    std::vector<ExemplarSelection> selections;
    for (const auto& [category, list] : samples)
        selections.push_back(select_exemplars(list, protos.prototype_for(category),
                                              static_cast<std::size_t>(k), category));
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path);
    out << selections_to_json(selections, id_names);
    std::cout << "selected exemplars for " << selections.size() << " categories\n";
    return 0;
}

int cmd_metrics(const std::string& config_path, int task, const std::string& predictions_path,
                const std::string& out_path) {
    RunConfig cfg = load_config(config_path);
    const TaskSchedule schedule = cfg.make_schedule();
    if (task < 1 || task > schedule.num_tasks())
        throw ContractViolation("task index out of schedule range");

    std::ifstream in(predictions_path);
    if (!in) throw ParseError("cannot open predictions file: " + predictions_path);
    const std::vector<int> known = schedule.known_after(task);
    const std::set<int> known_set(known.begin(), known.end());
    std::vector<EvalRecord> records;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            EvalRecord r = prediction_from_json_line(line);
            // status comes from the schedule, not from the stored flag
            r.unknown_truth = known_set.count(r.true_category) == 0;
            records.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(predictions_path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }

    ClassSplit split;
    split.previous = schedule.previous_of(task);
    split.current = schedule.task(task).categories;
    TaskOutcome outcome;
    outcome.metrics = build_report(records, split);
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path);
    out << task_report_json(outcome, task);
    std::cout << "metrics recomputed for task " << task << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"online open-world continual learning simulator"};
    app.require_subcommand(1);

    std::string config_path, data_dir, out_path, features_path, predictions_path;
    std::optional<std::uint64_t> seed_flag;
    int bins = 100, k = 50, task = 1;

    CLI::App* gen = app.add_subcommand("gen", "generate synthetic stream files");
    gen->add_option("--config", config_path, "run config JSON")->required();
    gen->add_option("--out", out_path, "output directory")->required();
    gen->add_option("--seed", seed_flag, "override config seed");

    CLI::App* run = app.add_subcommand("run", "run the full task protocol");
    run->add_option("--config", config_path, "run config JSON")->required();
    run->add_option("--data", data_dir, "stream directory from gen")->required();
    run->add_option("--out", out_path, "report directory")->required();
    run->add_option("--seed", seed_flag, "override config seed");

    CLI::App* fit = app.add_subcommand("fit", "fit distribution families to stored features");
    fit->add_option("--features", features_path, "store dump or JSON number array")->required();
    fit->add_option("--bins", bins, "histogram bins")->default_val(100);
    fit->add_option("--out", out_path, "fit report JSON")->required();

    CLI::App* select = app.add_subcommand("select", "standalone exemplar selection");
    select->add_option("--features", features_path, "JSONL feature records")->required();
    select->add_option("--k", k, "exemplars per category")->default_val(50);
    select->add_option("--out", out_path, "selection JSON")->required();

    CLI::App* metrics = app.add_subcommand("metrics", "recompute reports from predictions");
    metrics->add_option("--config", config_path, "run config JSON")->required();
    metrics->add_option("--task", task, "task index (1-based)")->required();
    metrics->add_option("--predictions", predictions_path, "predictions JSONL")->required();
    metrics->add_option("--out", out_path, "task report JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(config_path, out_path, seed_flag);
        if (run->parsed()) return cmd_run(config_path, data_dir, out_path, seed_flag);
        if (fit->parsed()) return cmd_fit(features_path, bins, out_path);
        if (select->parsed()) return cmd_select(features_path, k, out_path);
        if (metrics->parsed()) return cmd_metrics(config_path, task, predictions_path, out_path);
    } catch (const olowod::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
