#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "olowod/distfit.hpp"
#include "olowod/flp.hpp"
#include "olowod/metrics.hpp"
#include "olowod/model.hpp"
#include "olowod/prototype.hpp"
#include "olowod/store.hpp"

namespace olowod {

struct TaskSpec {
    int task_id = 0;               // 1-based
    std::vector<int> categories;   // sorted, disjoint across tasks
    bool online = false;           // task 1 trains offline, the rest online
};

// The task sequence: disjoint category sets, known set growing as tasks
// complete, everything not yet trained counting as unknown.
class TaskSchedule {
  public:
    static TaskSchedule build(int num_tasks, int n_per_task);
    static TaskSchedule from_categories(const std::vector<std::vector<int>>& per_task);

    int num_tasks() const { return static_cast<int>(tasks_.size()); }
    int n_per_task() const { return n_per_task_; }
    int total_categories() const;
    const TaskSpec& task(int t) const;             // 1-based
    std::vector<int> previous_of(int t) const;     // union of categories before t
    std::vector<int> known_after(int t) const;     // union up to and including t
    std::vector<int> unknown_after(int t) const;   // complement of known_after
    const std::vector<int>& all_categories() const { return all_; }

  private:
    std::vector<TaskSpec> tasks_;
    std::vector<int> all_;
    int n_per_task_ = 0;
};

// Update bookkeeping that enforces the one-gradient-update-per-record rule
// for online tasks.
struct RunLedger {
    std::map<std::int64_t, int> stream_update_counts;
    int last_replay_session_max = 0;
    long flp_applied = 0;
    long flp_skipped_zero_norm = 0;
    long dlp_adversarial_records = 0;

    // Throws ProtocolViolation when an online record would get a second update.
    int note_stream_update(std::int64_t id, bool online_task);
    int max_stream_updates() const;
};

struct TrainRecord {
    std::int64_t id = 0;
    int category = 0;
    FeatureVector feature;
};

struct RunInputs {
    std::vector<std::vector<TrainRecord>> task_streams;  // index 0 holds task 1
    std::vector<TrainRecord> test_records;               // shared across tasks
};

struct ProtocolOptions {
    int exemplars_per_class = 50;
    int epochs_base = 5;
    int bins = 100;
    std::uint64_t seed = 0;
    bool prototype_selection = true;  // false: random exemplar pick (baseline)
    bool flp_on_replay = false;
};

struct TaskOutcome {
    MetricsReport metrics;
    std::vector<EvalRecord> predictions;  // one per shared-test record
    std::map<int, std::size_t> exemplar_counts;
    std::optional<FitResult> dlp_fit;  // best fit backing this task's noise
    long adversarial_records = 0;
    long flp_applied = 0;
    long flp_skipped_zero_norm = 0;
};

struct RunResult {
    std::vector<TaskOutcome> tasks;
    RunLedger ledger;
};

// Sub-stream tags for deriving per-purpose seeds from the run seed.
namespace seed_tag {
inline constexpr std::uint64_t shuffle = 1;
inline constexpr std::uint64_t head_init = 2;
inline constexpr std::uint64_t flp_coin = 3;
inline constexpr std::uint64_t dlp_flags = 4;
inline constexpr std::uint64_t dlp_noise = 5;
inline constexpr std::uint64_t replay = 6;
inline constexpr std::uint64_t random_select = 7;
inline constexpr std::uint64_t geometry = 8;
inline constexpr std::uint64_t records = 9;
}  // namespace seed_tag

// Ids of DLP copies are offset so they never collide with stream record ids.
inline constexpr std::int64_t kAdversarialIdOffset = 1'000'000'000;

// One seeded single pass of updates over the exemplar set (shuffled copy).
void replay_finetune(ModelState& model, std::vector<TrainRecord> exemplars, std::uint64_t seed,
                     RunLedger* ledger = nullptr);

// Runs the full per-task pipeline over every task in order:
// DLP interleave (t>1) -> train (offline for t=1, one pass otherwise, FLP per
// record) -> prototype extraction and store fill -> exemplar selection ->
// replay fine-tune (t>1) -> evaluation against the shared test set.
RunResult run_protocol(ModelState& model, const RunInputs& inputs, PrototypeMatrix& memory,
                       FeatureStore& store, const FlpConfig& flp_cfg, const DlpConfig& dlp_cfg,
                       const TaskSchedule& schedule, const ProtocolOptions& opt);

}  // namespace olowod
