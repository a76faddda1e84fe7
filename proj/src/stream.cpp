#include "olowod/stream.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "olowod/error.hpp"
#include "olowod/rng.hpp"

namespace olowod {

using nlohmann::json;

std::string double_repr(double x) { return json(x).dump(); }

TaskSchedule RunConfig::make_schedule() const { return TaskSchedule::build(tasks, n_per_task); }

FlpConfig RunConfig::make_flp() const { return FlpConfig{gamma, flp_frequency}; }

DlpConfig RunConfig::make_dlp() const { return DlpConfig{dlp_frequency, noise_scale, clamp}; }

ProtocolOptions RunConfig::make_options() const {
    ProtocolOptions opt;
    opt.exemplars_per_class = exemplars_per_class;
    opt.epochs_base = epochs_base;
    opt.bins = bins;
    opt.seed = seed;
    opt.prototype_selection = selection_strategy == "prototype";
    opt.flp_on_replay = flp_on_replay;
    return opt;
}

void validate_config(const RunConfig& cfg) {
    auto fail = [](const std::string& what) { throw ParseError("config: " + what); };
    if (cfg.feature_dim < 1) fail("feature_dim must be >= 1");
    if (cfg.tasks < 1) fail("tasks must be >= 1");
    if (cfg.n_per_task < 1) fail("n_per_task must be >= 1");
    if (cfg.epochs_base < 1) fail("epochs_base must be >= 1");
    if (cfg.exemplars_per_class < 1) fail("exemplars_per_class must be >= 1");
    if (cfg.gamma < 0.0 || cfg.gamma > 1.0) fail("gamma outside [0,1]");
    if (cfg.flp_frequency < 0.0 || cfg.flp_frequency > 1.0) fail("flp_frequency outside [0,1]");
    if (cfg.dlp_frequency < 0.0 || cfg.dlp_frequency > 1.0) fail("dlp_frequency outside [0,1]");
    if (!(cfg.noise_scale > 0.0)) fail("noise_scale must be > 0");
    if (cfg.clamp && !(cfg.clamp->first < cfg.clamp->second)) fail("clamp range must have lo < hi");
    if (cfg.group_size < 1) fail("group_size must be >= 1");
    if (cfg.max_groups < 1) fail("max_groups must be >= 1");
    if (cfg.bins < 10) fail("bins must be >= 10");
    if (cfg.unknown_threshold < 0.0 || cfg.unknown_threshold > 1.0)
        fail("unknown_threshold outside [0,1]");
    if (!(cfg.learning_rate >= 0.0)) fail("learning_rate must be >= 0");
    if (cfg.selection_strategy != "prototype" && cfg.selection_strategy != "random")
        fail("selection_strategy must be 'prototype' or 'random'");
    if (cfg.train_records_per_class < 1) fail("train_records_per_class must be >= 1");
    if (cfg.test_records_per_class < 1) fail("test_records_per_class must be >= 1");
    if (!(cfg.cluster_spread > 0.0)) fail("cluster_spread must be > 0");
    if (!(cfg.cluster_separation >= 0.0)) fail("cluster_separation must be >= 0");
}

std::string config_to_json_string(const RunConfig& cfg) {
    json j;
    j["feature_dim"] = cfg.feature_dim;
    j["tasks"] = cfg.tasks;
    j["n_per_task"] = cfg.n_per_task;
    j["epochs_base"] = cfg.epochs_base;
    j["exemplars_per_class"] = cfg.exemplars_per_class;
    j["gamma"] = cfg.gamma;
    j["flp_frequency"] = cfg.flp_frequency;
    j["dlp_frequency"] = cfg.dlp_frequency;
    j["noise_scale"] = cfg.noise_scale;
    j["clamp"] = cfg.clamp ? json::array({cfg.clamp->first, cfg.clamp->second}) : json(nullptr);
    j["group_size"] = cfg.group_size;
    j["max_groups"] = cfg.max_groups;
    j["bins"] = cfg.bins;
    j["unknown_threshold"] = cfg.unknown_threshold;
    j["learning_rate"] = cfg.learning_rate;
    j["seed"] = cfg.seed;
    j["selection_strategy"] = cfg.selection_strategy;
    j["flp_on_replay"] = cfg.flp_on_replay;
    j["train_records_per_class"] = cfg.train_records_per_class;
    j["test_records_per_class"] = cfg.test_records_per_class;
    j["cluster_separation"] = cfg.cluster_separation;
    j["cluster_spread"] = cfg.cluster_spread;
    return j.dump(2) + "\n";
}

RunConfig config_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig cfg;
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("feature_dim", cfg.feature_dim);
        get("tasks", cfg.tasks);
        get("n_per_task", cfg.n_per_task);
        get("epochs_base", cfg.epochs_base);
        get("exemplars_per_class", cfg.exemplars_per_class);
        get("gamma", cfg.gamma);
        get("flp_frequency", cfg.flp_frequency);
        get("dlp_frequency", cfg.dlp_frequency);
        get("noise_scale", cfg.noise_scale);
        if (j.contains("clamp") && !j.at("clamp").is_null()) {
            const auto& c = j.at("clamp");
            cfg.clamp = std::make_pair(c.at(0).get<double>(), c.at(1).get<double>());
        }
        get("group_size", cfg.group_size);
        get("max_groups", cfg.max_groups);
        get("bins", cfg.bins);
        get("unknown_threshold", cfg.unknown_threshold);
        get("learning_rate", cfg.learning_rate);
        get("seed", cfg.seed);
        get("selection_strategy", cfg.selection_strategy);
        get("flp_on_replay", cfg.flp_on_replay);
        get("train_records_per_class", cfg.train_records_per_class);
        get("test_records_per_class", cfg.test_records_per_class);
        get("cluster_separation", cfg.cluster_separation);
        get("cluster_spread", cfg.cluster_spread);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: bad field: ") + e.what());
    }
    validate_config(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return config_from_json_string(buf.str());
}

std::string stream_file_name(int task_id) {
    return "task_" + std::to_string(task_id) + "_train.jsonl";
}

std::string record_to_json_line(const StreamRecord& r) {
    json j;
    j["image_id"] = r.image_id;
    j["task_id"] = r.task_id;
    j["split"] = r.test_split ? "test" : "train";
    j["category_id"] = r.category_id;
    j["feature"] = r.feature;
    if (r.raw) j["raw"] = *r.raw;
    if (r.raw_shape) j["raw_shape"] = *r.raw_shape;
    return j.dump();
}

StreamRecord record_from_json_line(const std::string& line) {
    json j = json::parse(line);
    StreamRecord r;
    r.image_id = j.at("image_id").get<std::string>();
    r.task_id = j.at("task_id").get<int>();
    const std::string split = j.at("split").get<std::string>();
    if (split != "train" && split != "test")
        throw ParseError("split must be 'train' or 'test'");
    r.test_split = split == "test";
    r.category_id = j.at("category_id").get<int>();
    r.feature = j.at("feature").get<FeatureVector>();
    if (j.contains("raw")) r.raw = j.at("raw").get<std::vector<double>>();
    if (j.contains("raw_shape")) {
        auto v = j.at("raw_shape").get<std::vector<int>>();
        if (v.size() != 3) throw ParseError("raw_shape must have 3 entries");
        r.raw_shape = std::array<int, 3>{v[0], v[1], v[2]};
    }
    return r;
}

namespace {

void validate_record(const StreamRecord& r, int expected_dim) {
    if (expected_dim > 0 && static_cast<int>(r.feature.size()) != expected_dim)
        throw ParseError("feature length " + std::to_string(r.feature.size()) +
                         " does not match configured dim " + std::to_string(expected_dim));
    if (r.feature.empty()) throw ParseError("empty feature");
    for (double v : r.feature)
        if (!std::isfinite(v)) throw ParseError("non-finite feature entry");
    if (r.raw_shape) {
        if (!r.raw) throw ParseError("raw_shape present without raw values");
        const long long expect = 1LL * (*r.raw_shape)[0] * (*r.raw_shape)[1] * (*r.raw_shape)[2];
        if (expect < 1 || static_cast<long long>(r.raw->size()) != expect)
            throw ParseError("raw length does not match raw_shape");
    } else if (r.raw) {
        throw ParseError("raw present without raw_shape");
    }
}

FeatureVector draw_class_mean(const RunConfig& cfg, int category) {
    Rng rng(derive_seed(cfg.seed, seed_tag::geometry, static_cast<std::uint64_t>(category)));
    FeatureVector mean(static_cast<std::size_t>(cfg.feature_dim));
    double norm = 0.0;
    for (double& x : mean) {
        x = rng.normal();
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : mean) x = cfg.cluster_separation * x / norm;
    return mean;
}

std::string make_image_id(int task, int category, int index, bool test) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_t%02d_c%04d_%06d", test ? "test" : "train", task,
                  category, index);
    return buf;
}

}  // namespace

void generate_stream(const RunConfig& cfg, const std::string& out_dir) {
    validate_config(cfg);
    std::filesystem::create_directories(out_dir);
    const TaskSchedule schedule = cfg.make_schedule();

    auto open_out = [&](const std::string& name) {
        std::ofstream out(std::filesystem::path(out_dir) / name);
        if (!out) throw Error("cannot write stream file: " + name);
        return out;
    };

    for (int t = 1; t <= schedule.num_tasks(); ++t) {
        std::ofstream out = open_out(stream_file_name(t));
        for (int c : schedule.task(t).categories) {
            const FeatureVector mean = draw_class_mean(cfg, c);
            Rng rng(derive_seed(cfg.seed, seed_tag::records,
                                (static_cast<std::uint64_t>(t) << 32) |
                                    static_cast<std::uint64_t>(c)));
            for (int i = 0; i < cfg.train_records_per_class; ++i) {
                StreamRecord r;
                r.image_id = make_image_id(t, c, i, false);
                r.task_id = t;
                r.test_split = false;
                r.category_id = c;
                r.feature.resize(mean.size());
                for (std::size_t k = 0; k < mean.size(); ++k)
                    r.feature[k] = mean[k] + cfg.cluster_spread * rng.normal();
                out << record_to_json_line(r) << '\n';
            }
        }
    }

    std::ofstream out = open_out(kTestFileName);
    for (int t = 1; t <= schedule.num_tasks(); ++t) {
        for (int c : schedule.task(t).categories) {
            const FeatureVector mean = draw_class_mean(cfg, c);
            Rng rng(derive_seed(cfg.seed, seed_tag::records,
                                (1ULL << 48) | (static_cast<std::uint64_t>(t) << 32) |
                                    static_cast<std::uint64_t>(c)));
            for (int i = 0; i < cfg.test_records_per_class; ++i) {
                StreamRecord r;
                r.image_id = make_image_id(t, c, i, true);
                r.task_id = t;
                r.test_split = true;
                r.category_id = c;
                r.feature.resize(mean.size());
                for (std::size_t k = 0; k < mean.size(); ++k)
                    r.feature[k] = mean[k] + cfg.cluster_spread * rng.normal();
                out << record_to_json_line(r) << '\n';
            }
        }
    }
}

std::vector<StreamRecord> load_stream_file(const std::string& path, int expected_dim) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open stream file: " + path);
    std::vector<StreamRecord> records;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            StreamRecord r = record_from_json_line(line);
            validate_record(r, expected_dim);
            records.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

RunInputs load_run_inputs(const RunConfig& cfg, const std::string& data_dir) {
    const TaskSchedule schedule = cfg.make_schedule();
    RunInputs inputs;
    for (int t = 1; t <= schedule.num_tasks(); ++t) {
        const std::string path =
            (std::filesystem::path(data_dir) / stream_file_name(t)).string();
        std::vector<TrainRecord> task_records;
        std::int64_t index = 0;
        for (const StreamRecord& r : load_stream_file(path, cfg.feature_dim)) {
            TrainRecord tr;
            tr.id = static_cast<std::int64_t>(t) * 1'000'000 + index++;
            tr.category = r.category_id;
            tr.feature = r.feature;
            task_records.push_back(std::move(tr));
        }
        inputs.task_streams.push_back(std::move(task_records));
    }
    const std::string test_path = (std::filesystem::path(data_dir) / kTestFileName).string();
    std::int64_t index = 0;
    for (const StreamRecord& r : load_stream_file(test_path, cfg.feature_dim)) {
        TrainRecord tr;
        tr.id = index++;
        tr.category = r.category_id;
        tr.feature = r.feature;
        inputs.test_records.push_back(std::move(tr));
    }
    return inputs;
}

namespace {

std::string opt_cell(const std::optional<double>& v) {
    return v ? double_repr(*v) : std::string();
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json params_to_json(FamilyId family, const DistParams& p) {
    json j;
    switch (family) {
        case FamilyId::alpha: j["a"] = p.shape_a; break;
        case FamilyId::beta:
            j["a"] = p.shape_a;
            j["b"] = p.shape_b;
            break;
        case FamilyId::gamma: j["shape"] = p.shape_a; break;
        case FamilyId::pareto: j["b"] = p.shape_a; break;
        default: break;
    }
    j["loc"] = p.loc;
    j["scale"] = p.scale;
    return j;
}

}  // namespace

std::string summary_csv(const RunResult& result) {
    std::ostringstream out;
    out << "task_id,map_previous,map_current,map_both,wi,a_ose,ur\n";
    for (std::size_t i = 0; i < result.tasks.size(); ++i) {
        const MetricsReport& m = result.tasks[i].metrics;
        out << (i + 1) << ',' << opt_cell(m.map_previous) << ',' << opt_cell(m.map_current)
            << ',' << opt_cell(m.map_both) << ',' << opt_cell(m.wi) << ',' << m.a_ose << ','
            << opt_cell(m.ur) << '\n';
    }
    return out.str();
}

std::string task_report_json(const TaskOutcome& outcome, int task_id) {
    const MetricsReport& m = outcome.metrics;
    json j;
    j["task_id"] = task_id;
    j["map_previous"] = opt_json(m.map_previous);
    j["map_current"] = opt_json(m.map_current);
    j["map_both"] = opt_json(m.map_both);
    j["wi"] = opt_json(m.wi);
    j["a_ose"] = m.a_ose;
    j["ur"] = opt_json(m.ur);
    json per_class = json::object();
    for (const auto& [c, ap] : m.per_class_ap) per_class[std::to_string(c)] = ap;
    j["per_class_ap"] = std::move(per_class);
    j["undefined_ap_classes"] = m.undefined_ap_classes;
    json exemplars = json::object();
    for (const auto& [c, n] : outcome.exemplar_counts) exemplars[std::to_string(c)] = n;
    j["exemplar_counts"] = std::move(exemplars);
    j["adversarial_records"] = outcome.adversarial_records;
    j["flp_applied"] = outcome.flp_applied;
    j["flp_skipped_zero_norm"] = outcome.flp_skipped_zero_norm;
    if (outcome.dlp_fit) {
        j["dlp_fit"] = {{"family", family_name(outcome.dlp_fit->family)},
                        {"params", params_to_json(outcome.dlp_fit->family, outcome.dlp_fit->params)},
                        {"sse", outcome.dlp_fit->sse},
                        {"converged", outcome.dlp_fit->converged}};
    } else {
        j["dlp_fit"] = nullptr;
    }
    return j.dump(2) + "\n";
}

std::string prediction_to_json_line(const EvalRecord& r) {
    json scores = json::object();
    for (const auto& [c, s] : r.prediction.per_class_scores) scores[std::to_string(c)] = s;
    json j;
    j["sample_id"] = r.sample_id;
    j["true_category"] = r.true_category;
    j["unknown_truth"] = r.unknown_truth;
    j["label"] = r.prediction.label;
    j["score"] = r.prediction.score;
    j["per_class_scores"] = std::move(scores);
    return j.dump();
}

EvalRecord prediction_from_json_line(const std::string& line) {
    json j = json::parse(line);
    EvalRecord r;
    r.sample_id = j.at("sample_id").get<std::int64_t>();
    r.true_category = j.at("true_category").get<int>();
    r.unknown_truth = j.at("unknown_truth").get<bool>();
    r.prediction.label = j.at("label").get<int>();
    r.prediction.score = j.at("score").get<double>();
    for (const auto& [key, value] : j.at("per_class_scores").items())
        r.prediction.per_class_scores.emplace_back(std::stoi(key), value.get<double>());
    std::sort(r.prediction.per_class_scores.begin(), r.prediction.per_class_scores.end());
    return r;
}

void write_reports(const RunConfig& cfg, const RunResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto write_file = [&](const std::string& name, const std::string& content) {
        std::ofstream out(std::filesystem::path(out_dir) / name);
        if (!out) throw Error("cannot write report file: " + name);
        out << content;
    };
    write_file("effective_config.json", config_to_json_string(cfg));
    write_file("summary.csv", summary_csv(result));
    for (std::size_t i = 0; i < result.tasks.size(); ++i) {
        const int t = static_cast<int>(i) + 1;
        write_file("task_" + std::to_string(t) + ".json",
                   task_report_json(result.tasks[i], t));
        std::ostringstream preds;
        for (const EvalRecord& r : result.tasks[i].predictions)
            preds << prediction_to_json_line(r) << '\n';
        write_file("predictions_task_" + std::to_string(t) + ".jsonl", preds.str());
    }
}

std::string selections_to_json(const std::vector<ExemplarSelection>& selections,
                               const std::vector<std::string>& id_names) {
    json arr = json::array();
    for (const ExemplarSelection& sel : selections) {
        json ids = json::array();
        for (std::int64_t id : sel.ranked_ids) {
            if (id >= 0 && static_cast<std::size_t>(id) < id_names.size())
                ids.push_back(id_names[static_cast<std::size_t>(id)]);
            else
                ids.push_back(id);
        }
        arr.push_back({{"category_id", sel.category_id},
                       {"exemplars", std::move(ids)},
                       {"distances", sel.distances}});
    }
    return arr.dump(2) + "\n";
}

std::string fit_report_to_json(const FitReport& report) {
    json results = json::array();
    for (const FitResult& r : report.results) {
        json entry;
        entry["family"] = family_name(r.family);
        entry["params"] = params_to_json(r.family, r.params);
        entry["sse"] = std::isfinite(r.sse) ? json(r.sse) : json(nullptr);
        entry["converged"] = r.converged;
        results.push_back(std::move(entry));
    }
    json j;
    j["bins"] = report.bins;
    j["sample_count"] = report.sample_count;
    j["results"] = std::move(results);
    return j.dump(2) + "\n";
}

}  // namespace olowod
