#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "jiqlab/policy.hpp"
#include "jiqlab/rng.hpp"
#include "jiqlab/scenario.hpp"
#include "jiqlab/tail_curve.hpp"

namespace jiqlab {

// Cumulative counters for one subset of servers. Work is in service-time units,
// counts are raw; divide by n for fluid scaling.
struct SubsetLedger {
    int tag = 0;
    std::size_t size = 0;
    double work_arrived = 0.0;    // W_a
    double work_completed = 0.0;  // finished jobs; W_d adds in-service progress
    std::int64_t rho_a = 0;       // arrivals into an idle server
    std::int64_t rho_d = 0;       // departures leaving the server idle
    std::int64_t arrivals = 0;    // admitted arrivals
    std::int64_t blocked = 0;     // arrivals routed here and refused by a full buffer
    double busy_time = 0.0;       // integral of the busy-server count over time
    double initial_work = 0.0;
    std::int64_t initial_busy = 0;
};

struct AccountingLedger {
    std::vector<SubsetLedger> subsets;
    std::int64_t arrivals_total = 0;  // including blocked
    std::int64_t blocked_total = 0;
    // mark_hist[k] counts arrivals whose service exceeded exactly k grid levels.
    std::vector<std::int64_t> mark_hist;

    // Number of arrivals with service > grid[k], for each k.
    std::vector<std::int64_t> arrival_marks() const;
};

// The ledger identities evaluated at one instant, per subset.
struct SubsetCheck {
    double workload = 0.0;       // sum of current workloads
    double work_arrived = 0.0;
    double work_processed = 0.0;  // W_d, including partial service of heads
    double busy_time = 0.0;
    double initial_work = 0.0;
    std::int64_t busy = 0;
    std::int64_t rho_a = 0;
    std::int64_t rho_d = 0;
    std::int64_t initial_busy = 0;
    std::int64_t arrivals = 0;
};

struct LedgerCheckpoint {
    double time = 0.0;
    std::uint64_t events = 0;
    std::vector<SubsetCheck> subsets;
};

enum class EventType : std::uint8_t { arrival, departure };

struct EventRecord {
    EventType type = EventType::arrival;
    double time = 0.0;
    ServerId server = 0;
    double size = 0.0;  // arrivals: sampled service requirement
    bool destination_was_idle = false;
    bool blocked = false;
};

struct ArrivalRecord {
    double time = 0.0;
    ServerId destination = 0;
    bool destination_was_idle = false;
    bool blocked = false;
};

struct SamplePlan {
    double interval = 1.0;             // 0 disables periodic snapshots
    std::vector<double> times;         // extra snapshot instants
    std::uint64_t arrival_stride = 0;  // snapshot before every k-th arrival; 0 = off
    bool record_arrivals = true;
    bool check_conservation = true;
    std::size_t tracked_servers = 2;
};

struct Snapshot {
    double time = 0.0;
    std::vector<double> values;                 // x^n_w on the grid
    std::vector<std::vector<double>> subsets;   // per subset, scaled by total n
    std::vector<double> tracked;                // workloads of servers 0..m-1
};

struct Trace {
    std::string scenario_id;
    std::size_t n = 0;
    double lambda = 0.0;
    bool poisson = true;
    IdleSelection idle_selection = IdleSelection::uniform;
    WorkloadGrid grid;
    std::vector<int> subset_tags;
    double start_time = 0.0;
    double end_time = 0.0;
    std::uint64_t events = 0;
    std::vector<Snapshot> snapshots;
    std::vector<ArrivalRecord> arrivals;
    std::vector<LedgerCheckpoint> checkpoints;
    AccountingLedger final_ledger;

    TailCurve curve(std::size_t snapshot_index) const;
};

// Result of checking the ledger identities over a trace.
struct ConservationReport {
    std::size_t checkpoints = 0;
    std::size_t work_violations = 0;        // W != W0 + W_a - W_d
    std::size_t busy_violations = 0;        // busy != busy0 + rho_a - rho_d (exact)
    std::size_t depletion_violations = 0;   // W_d != busy-time integral
    std::size_t quiet_segments = 0;         // subset segments with no arrivals
    std::size_t quiet_violations = 0;       // quiet segment: -dW != d(busy-time)
    double max_work_error = 0.0;            // scaled by 1/n
    double max_depletion_error = 0.0;
    double max_quiet_error = 0.0;

    bool ok() const {
        return work_violations == 0 && busy_violations == 0 && depletion_violations == 0 &&
               quiet_violations == 0;
    }
};

// Tolerance per checkpoint is 1e-9 * (events processed so far), on 1/n-scaled work.
ConservationReport check_conservation(const Trace& trace);

// The simulated n-server system: per-server FIFO queues of residual requirements,
// idle pool, event queue, and ledger.
class System {
public:
    // Throws ConfigError for an unusable configuration or initial condition.
    System(const ScenarioConfig& config, const InitialCondition& initial);
    explicit System(const ScenarioConfig& config) : System(config, config.initial) {}

    bool has_pending_events() const { return !events_.empty(); }
    double next_event_time() const;

    // Pops and processes the earliest event.
    EventRecord step();

    // Processes events until the clock reaches horizon, taking snapshots per plan.
    // Throws EventBudgetExceeded if the configured event budget runs out.
    Trace run(double horizon, const SamplePlan& plan);

    Snapshot snapshot(std::size_t tracked_servers = 0) const;
    TailCurve snapshot_curve() const;
    LedgerCheckpoint checkpoint() const;

    double clock() const { return clock_; }
    std::size_t n() const { return servers_.size(); }
    std::size_t busy_count() const { return n() - idle_.size(); }
    double workload(ServerId i) const;
    std::uint32_t queue_length(ServerId i) const { return lengths_[i]; }
    const IdlePool& idle_pool() const { return idle_; }
    const AccountingLedger& ledger() const { return ledger_; }
    std::uint64_t events_processed() const { return events_processed_; }
    const ScenarioConfig& config() const { return config_; }

    // Consistency of idle pool, queue lengths and busy counters; throws
    // InternalInconsistency on a mismatch. O(n); meant for tests.
    void audit() const;

private:
    struct Server {
        std::deque<double> queue;  // service requirements; front is in service
        double departure = 0.0;    // completion time of the head job
        double backlog = 0.0;      // sum of requirements behind the head
        std::uint32_t subset = 0;
    };

    struct Event {
        double time;
        std::uint64_t seq;
        ServerId server;
        EventType type;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            return a.time > b.time || (a.time == b.time && a.seq > b.seq);
        }
    };

    static constexpr ServerId kNoServer = std::numeric_limits<ServerId>::max();

    void advance_to(double t);
    void schedule(double time, ServerId server, EventType type);
    void schedule_next_arrival();
    EventRecord handle_arrival();
    EventRecord handle_departure(ServerId s);
    void start_service(ServerId s, double size);
    void make_idle(ServerId s);

    ScenarioConfig config_;
    Router router_;
    ScenarioStreams streams_;
    double system_rate_ = 0.0;  // lambda * n

    std::vector<Server> servers_;
    std::vector<std::uint32_t> lengths_;
    IdlePool idle_;
    std::optional<IdlePool> preferred_idle_;
    std::uint32_t preferred_subset_ = 0;
    std::vector<std::int64_t> busy_by_subset_;

    std::priority_queue<Event, std::vector<Event>, Later> events_;
    std::uint64_t seq_ = 0;
    double clock_ = 0.0;
    std::uint64_t events_processed_ = 0;
    AccountingLedger ledger_;
};

}  // namespace jiqlab
