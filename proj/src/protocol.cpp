#include "olowod/protocol.hpp"

#include <algorithm>

#include "olowod/error.hpp"
#include "olowod/rng.hpp"

namespace olowod {

TaskSchedule TaskSchedule::build(int num_tasks, int n_per_task) {
    if (num_tasks < 1 || n_per_task < 1)
        throw ContractViolation("TaskSchedule: num_tasks and n_per_task must be >= 1");
    std::vector<std::vector<int>> per_task(static_cast<std::size_t>(num_tasks));
    int next = 1;
    for (auto& cats : per_task)
        for (int i = 0; i < n_per_task; ++i) cats.push_back(next++);
    TaskSchedule s = from_categories(per_task);
    s.n_per_task_ = n_per_task;
    return s;
}

TaskSchedule TaskSchedule::from_categories(const std::vector<std::vector<int>>& per_task) {
    if (per_task.empty())
        throw ContractViolation("TaskSchedule: no tasks");
    TaskSchedule s;
    std::set<int> seen;
    for (std::size_t i = 0; i < per_task.size(); ++i) {
        TaskSpec spec;
        spec.task_id = static_cast<int>(i) + 1;
        spec.online = i > 0;
        spec.categories = per_task[i];
        std::sort(spec.categories.begin(), spec.categories.end());
        if (spec.categories.empty())
            throw ContractViolation("TaskSchedule: empty category set");
        for (int c : spec.categories) {
            if (!seen.insert(c).second)
                throw ContractViolation("TaskSchedule: category in more than one task: " +
                                        std::to_string(c));
            s.all_.push_back(c);
        }
        s.tasks_.push_back(std::move(spec));
    }
    std::sort(s.all_.begin(), s.all_.end());
    s.n_per_task_ = static_cast<int>(per_task.front().size());
    return s;
}

int TaskSchedule::total_categories() const { return static_cast<int>(all_.size()); }

const TaskSpec& TaskSchedule::task(int t) const {
    if (t < 1 || t > num_tasks())
        throw ContractViolation("TaskSchedule: task index out of range");
    return tasks_[static_cast<std::size_t>(t - 1)];
}

std::vector<int> TaskSchedule::previous_of(int t) const {
    std::vector<int> out;
    for (int i = 1; i < t; ++i) {
        const auto& c = task(i).categories;
        out.insert(out.end(), c.begin(), c.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> TaskSchedule::known_after(int t) const {
    std::vector<int> out = previous_of(t);
    const auto& c = task(t).categories;
    out.insert(out.end(), c.begin(), c.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> TaskSchedule::unknown_after(int t) const {
    const std::vector<int> known = known_after(t);
    std::vector<int> out;
    std::set_difference(all_.begin(), all_.end(), known.begin(), known.end(),
                        std::back_inserter(out));
    return out;
}

int RunLedger::note_stream_update(std::int64_t id, bool online_task) {
    const int count = ++stream_update_counts[id];
    if (online_task && count > 1)
        throw ProtocolViolation("online record updated more than once: id " + std::to_string(id));
    return count;
}

int RunLedger::max_stream_updates() const {
    int m = 0;
    for (const auto& [id, c] : stream_update_counts) {
        (void)id;
        m = std::max(m, c);
    }
    return m;
}

void replay_finetune(ModelState& model, std::vector<TrainRecord> exemplars, std::uint64_t seed,
                     RunLedger* ledger) {
    if (exemplars.empty()) return;
    Rng rng(seed);
    rng.shuffle(exemplars);
    std::map<std::int64_t, int> session_counts;
    for (const TrainRecord& r : exemplars) {
        model.train_step(r.feature, r.category);
        const int c = ++session_counts[r.id];
        if (c > 1)
            throw ProtocolViolation("replay exemplar updated twice in one fine-tune pass");
        if (ledger) ledger->last_replay_session_max = std::max(ledger->last_replay_session_max, c);
    }
}

namespace {

void validate_inputs(const RunInputs& in, const TaskSchedule& schedule) {
    if (in.task_streams.size() != static_cast<std::size_t>(schedule.num_tasks()))
        throw ContractViolation("run_protocol: stream count does not match schedule");
    std::set<std::int64_t> seen_ids;
    for (int t = 1; t <= schedule.num_tasks(); ++t) {
        const auto& cats = schedule.task(t).categories;
        std::set<int> cat_set(cats.begin(), cats.end());
        std::set<int> present;
        for (const TrainRecord& r : in.task_streams[static_cast<std::size_t>(t - 1)]) {
            if (!cat_set.count(r.category))
                throw ContractViolation("run_protocol: record category not in its task");
            if (!seen_ids.insert(r.id).second)
                throw ContractViolation("run_protocol: duplicate record id");
            if (r.id >= kAdversarialIdOffset)
                throw ContractViolation("run_protocol: record id collides with adversarial range");
            present.insert(r.category);
        }
        if (present.size() != cat_set.size())
            throw ContractViolation("run_protocol: task " + std::to_string(t) +
                                    " has categories with no training records");
    }
    if (in.test_records.empty())
        throw ContractViolation("run_protocol: empty test stream");
}

}  // namespace

RunResult run_protocol(ModelState& model, const RunInputs& inputs, PrototypeMatrix& memory,
                       FeatureStore& store, const FlpConfig& flp_cfg, const DlpConfig& dlp_cfg,
                       const TaskSchedule& schedule, const ProtocolOptions& opt) {
    validate_inputs(inputs, schedule);

    RunResult result;
    std::vector<TrainRecord> exemplar_pool;  // all selected exemplars so far

    for (int t = 1; t <= schedule.num_tasks(); ++t) {
        const TaskSpec& spec = schedule.task(t);
        TaskOutcome outcome;

        model.add_classes(spec.categories, derive_seed(opt.seed, seed_tag::head_init, t));

        std::vector<TrainRecord> stream = inputs.task_streams[static_cast<std::size_t>(t - 1)];
        {
            Rng shuffle_rng(derive_seed(opt.seed, seed_tag::shuffle, t));
            shuffle_rng.shuffle(stream);
        }

        // (1) data-level perturbations: interleave adversarial copies of a
        // seeded subset, with noise drawn from the best-fitted distribution of
        // the stored old-category features (never for the first task).
        std::vector<TrainRecord> train_seq;
        if (spec.online && dlp_cfg.frequency > 0.0 && !store.empty()) {
            const FitReport report = fit_all(store.pooled_values(), opt.bins);
            const FitResult* best = report.best();
            if (best != nullptr) {
                outcome.dlp_fit = *best;
                const std::vector<bool> flags = select_perturb_subset(
                    stream.size(), dlp_cfg.frequency, derive_seed(opt.seed, seed_tag::dlp_flags, t));
                const int dim = model.feature_dim();
                for (std::size_t i = 0; i < stream.size(); ++i) {
                    train_seq.push_back(stream[i]);
                    if (!flags[i]) continue;
                    FeatureMap raw = FeatureMap::zeros(dim, 1, 1);
                    raw.values = stream[i].feature;
                    const FeatureMap noise =
                        sample_noise(*best, dim, 1, 1,
                                     derive_seed(opt.seed, seed_tag::dlp_noise,
                                                 (static_cast<std::uint64_t>(t) << 32) | i));
                    const FeatureMap adv = make_adversarial(raw, noise, dlp_cfg);
                    TrainRecord copy;
                    copy.id = stream[i].id + kAdversarialIdOffset;
                    copy.category = stream[i].category;
                    copy.feature = adv.values;
                    train_seq.push_back(std::move(copy));
                    outcome.adversarial_records += 1;
                    result.ledger.dlp_adversarial_records += 1;
                }
            } else {
                train_seq = stream;
            }
        } else {
            train_seq = stream;
        }

        // (2) training: multi-epoch offline pass for the base task, a single
        // sequential pass afterwards; FLP applies per training record.
        const int epochs = spec.online ? 1 : std::max(1, opt.epochs_base);
        Rng coin_rng(derive_seed(opt.seed, seed_tag::flp_coin, t));
        for (int epoch = 0; epoch < epochs; ++epoch) {
            std::vector<TrainRecord> order = train_seq;
            if (!spec.online && epoch > 0) {
                Rng epoch_rng(derive_seed(opt.seed, seed_tag::shuffle,
                                          (static_cast<std::uint64_t>(t) << 32) | epoch));
                epoch_rng.shuffle(order);
            }
            for (const TrainRecord& r : order) {
                FlpOutcome flp_out = FlpOutcome::skipped_no_prototypes;
                const FeatureVector f =
                    apply_flp(r.feature, memory, flp_cfg, coin_rng.next_unit(), &flp_out);
                if (flp_out == FlpOutcome::applied) {
                    result.ledger.flp_applied += 1;
                    outcome.flp_applied += 1;
                }
                if (flp_out == FlpOutcome::skipped_zero_norm) {
                    result.ledger.flp_skipped_zero_norm += 1;
                    outcome.flp_skipped_zero_norm += 1;
                }
                result.ledger.note_stream_update(r.id, spec.online);
                model.train_step(f, r.category);
            }
        }

        // (3) inference-only extraction pass over the original records:
        // per-category prototypes plus the feature store fill.
        std::map<int, std::vector<FeatureVector>> by_category;
        for (const TrainRecord& r : inputs.task_streams[static_cast<std::size_t>(t - 1)]) {
            by_category[r.category].push_back(r.feature);
            store.push(r.category, r.feature);
        }
        const PrototypeMatrix task_protos = build_prototypes(by_category);
        memory = append_prototypes(memory, task_protos);

        // (4) exemplar selection for the current task's categories
        for (int c : spec.categories) {
            std::vector<std::pair<std::int64_t, FeatureVector>> samples;
            for (const TrainRecord& r : inputs.task_streams[static_cast<std::size_t>(t - 1)])
                if (r.category == c) samples.emplace_back(r.id, r.feature);

            std::vector<std::int64_t> chosen;
            if (opt.prototype_selection) {
                const ExemplarSelection sel = select_exemplars(
                    samples, memory.prototype_for(c),
                    static_cast<std::size_t>(opt.exemplars_per_class), c);
                chosen = sel.ranked_ids;
            } else {
                std::vector<std::size_t> idx(samples.size());
                for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
                Rng pick_rng(derive_seed(opt.seed, seed_tag::random_select,
                                         (static_cast<std::uint64_t>(t) << 32) |
                                             static_cast<std::uint64_t>(c)));
                pick_rng.shuffle(idx);
                const std::size_t n =
                    std::min(static_cast<std::size_t>(opt.exemplars_per_class), idx.size());
                for (std::size_t i = 0; i < n; ++i) chosen.push_back(samples[idx[i]].first);
            }
            outcome.exemplar_counts[c] = chosen.size();
            std::set<std::int64_t> chosen_set(chosen.begin(), chosen.end());
            for (const TrainRecord& r : inputs.task_streams[static_cast<std::size_t>(t - 1)])
                if (chosen_set.count(r.id)) exemplar_pool.push_back(r);
        }

        // (5) replay fine-tune over exemplars of all tasks so far
        if (spec.online && !exemplar_pool.empty()) {
            result.ledger.last_replay_session_max = 0;
            replay_finetune(model, exemplar_pool, derive_seed(opt.seed, seed_tag::replay, t),
                            &result.ledger);
        }

        // ledger assertion at task end
        if (spec.online) {
            for (const TrainRecord& r : train_seq) {
                auto it = result.ledger.stream_update_counts.find(r.id);
                if (it != result.ledger.stream_update_counts.end() && it->second > 1)
                    throw ProtocolViolation("online constraint violated at end of task " +
                                            std::to_string(t));
            }
        }

        // (6) evaluation on the shared test stream with K/U labels from the schedule
        const std::vector<int> known = schedule.known_after(t);
        const std::set<int> known_set(known.begin(), known.end());
        std::vector<EvalRecord> eval;
        eval.reserve(inputs.test_records.size());
        for (const TrainRecord& r : inputs.test_records) {
            EvalRecord e;
            e.sample_id = r.id;
            e.true_category = r.category;
            e.unknown_truth = known_set.count(r.category) == 0;
            e.prediction = model.predict(r.feature);
            eval.push_back(std::move(e));
        }
        ClassSplit split;
        split.previous = schedule.previous_of(t);
        split.current = spec.categories;
        outcome.metrics = build_report(eval, split);
        outcome.predictions = std::move(eval);

        result.tasks.push_back(std::move(outcome));
    }
    return result;
}

}  // namespace olowod
