#include "jiqlab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jiqlab/error.hpp"

namespace jiqlab {

std::vector<std::int64_t> AccountingLedger::arrival_marks() const {
    // mark_hist has K+1 bins; arrivals in bin j exceed grid levels 0..j-1.
    std::vector<std::int64_t> marks(mark_hist.empty() ? 0 : mark_hist.size() - 1, 0);
    std::int64_t above = 0;
    for (std::size_t k = marks.size(); k-- > 0;) {
        above += mark_hist[k + 1];
        marks[k] = above;
    }
    return marks;
}

TailCurve Trace::curve(std::size_t snapshot_index) const {
    return TailCurve{grid, snapshots.at(snapshot_index).values, {}, CurveKind::empirical};
}

System::System(const ScenarioConfig& config, const InitialCondition& initial)
    : config_(config),
      router_(config.policy, std::max<std::size_t>(config.n, 1)),
      streams_(config.seed),
      system_rate_(config.lambda * static_cast<double>(config.n)) {
    const std::size_t n = config_.n;
    if (n == 0) throw ConfigError("n: need at least one server");
    if (!(config_.lambda >= 0.0) || !std::isfinite(config_.lambda)) {
        throw ConfigError("lambda: must be finite and >= 0");
    }
    if (config_.grid.size() == 0) throw ConfigError("grid: not set");
    if (!initial.workloads.empty() && initial.workloads.size() != n) {
        throw ConfigError("initial: custom workload vector must have length n");
    }
    for (double w : initial.workloads) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ConfigError("initial: workloads must be finite and >= 0");
        }
    }
    try {
        validate_policy(config_.policy, n, config_.lambda);
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("policy: ") + e.what());
    }

    servers_.resize(n);
    lengths_.assign(n, 0);
    idle_ = IdlePool(n);

    std::vector<SubsetSpec> subsets = config_.subsets;
    if (subsets.empty()) subsets.push_back({0, n});
    std::size_t covered = 0;
    for (const auto& s : subsets) covered += s.size;
    if (covered != n) throw ConfigError("subsets: sizes must sum to n");

    ledger_.subsets.resize(subsets.size());
    busy_by_subset_.assign(subsets.size(), 0);
    ledger_.mark_hist.assign(config_.grid.size() + 1, 0);
    {
        std::size_t next = 0;
        for (std::uint32_t k = 0; k < subsets.size(); ++k) {
            ledger_.subsets[k].tag = subsets[k].tag;
            ledger_.subsets[k].size = subsets[k].size;
            for (std::size_t j = 0; j < subsets[k].size; ++j) servers_[next++].subset = k;
        }
    }
    if (config_.policy.preferred_tag) {
        const auto it = std::find_if(subsets.begin(), subsets.end(), [&](const SubsetSpec& s) {
            return s.tag == *config_.policy.preferred_tag;
        });
        if (it == subsets.end()) throw ConfigError("policy.preferred_tag: no subset with that tag");
        preferred_subset_ = static_cast<std::uint32_t>(it - subsets.begin());
        preferred_idle_.emplace(n);
    }

    for (ServerId i = 0; i < n; ++i) {
        const double w = initial.workloads.empty() ? 0.0 : initial.workloads[i];
        auto& sub = ledger_.subsets[servers_[i].subset];
        if (w > 0.0) {
            servers_[i].queue.push_back(w);
            servers_[i].departure = w;
            lengths_[i] = 1;
            ++busy_by_subset_[servers_[i].subset];
            sub.initial_work += w;
            ++sub.initial_busy;
            schedule(w, i, EventType::departure);
        } else {
            make_idle(i);
        }
    }
    schedule_next_arrival();
}

double System::next_event_time() const {
    return events_.empty() ? std::numeric_limits<double>::infinity() : events_.top().time;
}

void System::schedule(double time, ServerId server, EventType type) {
    events_.push(Event{time, seq_++, server, type});
}

void System::schedule_next_arrival() {
    if (system_rate_ <= 0.0) return;
    const double gap = config_.arrivals.base_law.sample(streams_.arrivals) / system_rate_;
    schedule(clock_ + gap, kNoServer, EventType::arrival);
}

void System::advance_to(double t) {
    const double dt = t - clock_;
    if (dt > 0.0) {
        for (std::size_t k = 0; k < busy_by_subset_.size(); ++k) {
            ledger_.subsets[k].busy_time += static_cast<double>(busy_by_subset_[k]) * dt;
        }
        clock_ = t;
    }
}

void System::make_idle(ServerId s) {
    idle_.insert(s);
    if (preferred_idle_ && servers_[s].subset == preferred_subset_) preferred_idle_->insert(s);
}

void System::start_service(ServerId s, double size) {
    idle_.remove(s);
    if (preferred_idle_ && servers_[s].subset == preferred_subset_) preferred_idle_->remove(s);
    Server& srv = servers_[s];
    srv.queue.push_back(size);
    srv.departure = clock_ + size;
    srv.backlog = 0.0;
    lengths_[s] = 1;
    ++busy_by_subset_[srv.subset];
    ++ledger_.subsets[srv.subset].rho_a;
    schedule(srv.departure, s, EventType::departure);
}

EventRecord System::handle_arrival() {
    EventRecord rec;
    rec.type = EventType::arrival;
    rec.time = clock_;
    rec.size = config_.dist.sample(streams_.service);
    ++ledger_.arrivals_total;
    ++ledger_.mark_hist[config_.grid.count_below(rec.size)];

    RoutingView view;
    view.n = servers_.size();
    view.idle = &idle_;
    view.preferred_idle = preferred_idle_ ? &*preferred_idle_ : nullptr;
    view.queue_lengths = lengths_;
    view.buffer_capacity = config_.buffer;
    const RouteDecision d = router_.route(view, streams_.routing);

    const bool jiq_family = config_.policy.kind == PolicyKind::jiq ||
                            config_.policy.kind == PolicyKind::jiq_biased;
    if (jiq_family && !idle_.empty() && !d.destination_was_idle) {
        throw InternalInconsistency("JIQ routed to a busy server while idle servers exist");
    }

    rec.server = d.destination;
    rec.destination_was_idle = d.destination_was_idle;
    rec.blocked = d.blocked;
    auto& sub = ledger_.subsets[servers_[d.destination].subset];
    if (d.blocked) {
        ++ledger_.blocked_total;
        ++sub.blocked;
    } else {
        ++sub.arrivals;
        sub.work_arrived += rec.size;
        if (d.destination_was_idle) {
            start_service(d.destination, rec.size);
        } else {
            Server& srv = servers_[d.destination];
            srv.queue.push_back(rec.size);
            srv.backlog += rec.size;
            ++lengths_[d.destination];
        }
    }
    schedule_next_arrival();
    return rec;
}

EventRecord System::handle_departure(ServerId s) {
    Server& srv = servers_[s];
    if (srv.queue.empty()) {
        throw InternalInconsistency("departure from empty server " + std::to_string(s));
    }
    EventRecord rec;
    rec.type = EventType::departure;
    rec.time = clock_;
    rec.server = s;
    rec.size = srv.queue.front();
    auto& sub = ledger_.subsets[srv.subset];
    sub.work_completed += srv.queue.front();
    srv.queue.pop_front();
    --lengths_[s];
    if (!srv.queue.empty()) {
        const double next = srv.queue.front();
        srv.backlog = srv.queue.size() == 1 ? 0.0 : srv.backlog - next;
        srv.departure = clock_ + next;
        schedule(srv.departure, s, EventType::departure);
    } else {
        srv.backlog = 0.0;
        --busy_by_subset_[srv.subset];
        ++sub.rho_d;
        make_idle(s);
    }
    return rec;
}

EventRecord System::step() {
    if (events_.empty()) {
        throw InternalInconsistency("step() called with no pending events");
    }
    const Event ev = events_.top();
    events_.pop();
    advance_to(ev.time);
    ++events_processed_;
    return ev.type == EventType::arrival ? handle_arrival() : handle_departure(ev.server);
}

double System::workload(ServerId i) const {
    const Server& srv = servers_[i];
    if (srv.queue.empty()) return 0.0;
    return (srv.departure - clock_) + srv.backlog;
}

Snapshot System::snapshot(std::size_t tracked_servers) const {
    const std::size_t k = config_.grid.size();
    const std::size_t parts = ledger_.subsets.size();
    std::vector<std::int64_t> hist(parts * (k + 1), 0);
    for (ServerId i = 0; i < servers_.size(); ++i) {
        if (lengths_[i] == 0) continue;
        ++hist[servers_[i].subset * (k + 1) + config_.grid.count_below(workload(i))];
    }
    Snapshot snap;
    snap.time = clock_;
    snap.values.assign(k, 0.0);
    const double inv_n = 1.0 / static_cast<double>(servers_.size());
    if (parts > 1) snap.subsets.assign(parts, std::vector<double>(k, 0.0));
    std::vector<std::int64_t> total(k, 0);
    for (std::size_t p = 0; p < parts; ++p) {
        std::int64_t above = 0;
        for (std::size_t j = k; j-- > 0;) {
            above += hist[p * (k + 1) + j + 1];
            total[j] += above;
            if (parts > 1) snap.subsets[p][j] = static_cast<double>(above) * inv_n;
        }
    }
    for (std::size_t j = 0; j < k; ++j) snap.values[j] = static_cast<double>(total[j]) * inv_n;
    const std::size_t m = std::min(tracked_servers, servers_.size());
    snap.tracked.resize(m);
    for (ServerId i = 0; i < m; ++i) snap.tracked[i] = workload(i);
    return snap;
}

TailCurve System::snapshot_curve() const {
    return TailCurve{config_.grid, snapshot(0).values, {}, CurveKind::empirical};
}

LedgerCheckpoint System::checkpoint() const {
    LedgerCheckpoint cp;
    cp.time = clock_;
    cp.events = events_processed_;
    cp.subsets.resize(ledger_.subsets.size());
    for (std::size_t k = 0; k < ledger_.subsets.size(); ++k) {
        const auto& s = ledger_.subsets[k];
        auto& c = cp.subsets[k];
        c.work_arrived = s.work_arrived;
        c.work_processed = s.work_completed;
        c.busy_time = s.busy_time;
        c.initial_work = s.initial_work;
        c.rho_a = s.rho_a;
        c.rho_d = s.rho_d;
        c.initial_busy = s.initial_busy;
        c.arrivals = s.arrivals;
    }
    for (ServerId i = 0; i < servers_.size(); ++i) {
        const Server& srv = servers_[i];
        if (srv.queue.empty()) continue;
        auto& c = cp.subsets[srv.subset];
        c.workload += workload(i);
        c.work_processed += srv.queue.front() - (srv.departure - clock_);
        ++c.busy;
    }
    return cp;
}

void System::audit() const {
    std::size_t idle = 0;
    std::vector<std::int64_t> busy(busy_by_subset_.size(), 0);
    for (ServerId i = 0; i < servers_.size(); ++i) {
        const bool empty = servers_[i].queue.empty();
        if (lengths_[i] != servers_[i].queue.size()) {
            throw InternalInconsistency("queue length cache out of sync at server " + std::to_string(i));
        }
        if (empty != idle_.contains(i)) {
            throw InternalInconsistency("idle pool out of sync at server " + std::to_string(i));
        }
        if (config_.buffer > 0 && lengths_[i] > config_.buffer) {
            throw InternalInconsistency("buffer overflow at server " + std::to_string(i));
        }
        if (empty) {
            ++idle;
        } else {
            ++busy[servers_[i].subset];
            for (double r : servers_[i].queue) {
                if (!(r > 0.0)) throw InternalInconsistency("non-positive residual requirement");
            }
        }
    }
    if (idle != idle_.size()) throw InternalInconsistency("idle pool size mismatch");
    if (busy != busy_by_subset_) throw InternalInconsistency("busy counters out of sync");
}

Trace System::run(double horizon, const SamplePlan& plan) {
    Trace trace;
    trace.scenario_id = config_.scenario_id;
    trace.n = servers_.size();
    trace.lambda = config_.lambda;
    trace.poisson = config_.arrivals.kind == ArrivalKind::poisson;
    trace.idle_selection = config_.policy.idle_selection;
    trace.grid = config_.grid;
    for (const auto& s : ledger_.subsets) trace.subset_tags.push_back(s.tag);
    trace.start_time = clock_;
    if (!(horizon > clock_)) {
        trace.end_time = clock_;
        trace.final_ledger = ledger_;
        return trace;
    }

    std::vector<double> extra;
    for (double t : plan.times) {
        if (t > clock_ && t <= horizon) extra.push_back(t);
    }
    std::sort(extra.begin(), extra.end());
    std::size_t next_extra = 0;
    const double start = clock_;
    std::uint64_t interval_index = 1;
    auto next_interval = [&]() {
        return plan.interval > 0.0 ? start + static_cast<double>(interval_index) * plan.interval
                                   : std::numeric_limits<double>::infinity();
    };

    const std::uint64_t budget_end = events_processed_ + config_.event_budget;
    std::uint64_t arrivals_seen = 0;
    double last_snapshot = -std::numeric_limits<double>::infinity();

    auto take_snapshot = [&]() {
        if (!(clock_ > last_snapshot)) return;
        last_snapshot = clock_;
        trace.snapshots.push_back(snapshot(plan.tracked_servers));
        if (plan.check_conservation) trace.checkpoints.push_back(checkpoint());
    };

    for (;;) {
        const double t_extra =
            next_extra < extra.size() ? extra[next_extra] : std::numeric_limits<double>::infinity();
        const double t_snap = std::min(next_interval(), t_extra);
        const double t_event = next_event_time();
        if (t_snap <= horizon && t_snap < t_event) {
            advance_to(t_snap);
            take_snapshot();
            if (t_snap == t_extra) ++next_extra;
            while (next_interval() <= clock_) ++interval_index;
            while (next_extra < extra.size() && extra[next_extra] <= clock_) ++next_extra;
            continue;
        }
        if (!(t_event <= horizon)) break;
        if (events_processed_ >= budget_end) {
            throw EventBudgetExceeded("event budget of " + std::to_string(config_.event_budget) +
                                      " exhausted at t=" + std::to_string(clock_));
        }
        const bool is_arrival = events_.top().type == EventType::arrival;
        if (is_arrival && plan.arrival_stride > 0 && ++arrivals_seen % plan.arrival_stride == 0) {
            advance_to(t_event);
            take_snapshot();  // state seen by the arriving customer
        }
        const EventRecord rec = step();
        if (rec.type == EventType::arrival && plan.record_arrivals) {
            trace.arrivals.push_back({rec.time, rec.server, rec.destination_was_idle, rec.blocked});
        }
    }
    advance_to(horizon);
    trace.end_time = clock_;
    trace.events = events_processed_;
    trace.final_ledger = ledger_;
    return trace;
}

ConservationReport check_conservation(const Trace& trace) {
    ConservationReport rep;
    const double inv_n = trace.n > 0 ? 1.0 / static_cast<double>(trace.n) : 0.0;
    const LedgerCheckpoint* prev = nullptr;
    for (const auto& cp : trace.checkpoints) {
        ++rep.checkpoints;
        const double tol = 1e-9 * static_cast<double>(std::max<std::uint64_t>(cp.events, 1));
        for (std::size_t k = 0; k < cp.subsets.size(); ++k) {
            const auto& s = cp.subsets[k];
            const double work_err =
                std::abs(s.workload - (s.initial_work + s.work_arrived - s.work_processed)) * inv_n;
            rep.max_work_error = std::max(rep.max_work_error, work_err);
            if (!(work_err <= tol)) ++rep.work_violations;

            if (s.busy != s.initial_busy + s.rho_a - s.rho_d) ++rep.busy_violations;

            const double dep_err = std::abs(s.work_processed - s.busy_time) * inv_n;
            rep.max_depletion_error = std::max(rep.max_depletion_error, dep_err);
            if (!(dep_err <= tol)) ++rep.depletion_violations;

            if (prev != nullptr && prev->subsets[k].arrivals == s.arrivals) {
                ++rep.quiet_segments;
                const auto& p = prev->subsets[k];
                const double err =
                    std::abs((s.workload - p.workload) + (s.busy_time - p.busy_time)) * inv_n;
                rep.max_quiet_error = std::max(rep.max_quiet_error, err);
                if (!(err <= tol)) ++rep.quiet_violations;
            }
        }
        prev = &cp;
    }
    return rep;
}

}  // namespace jiqlab
