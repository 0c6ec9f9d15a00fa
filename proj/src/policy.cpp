#include "jiqlab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "jiqlab/error.hpp"

namespace jiqlab {

IdlePool::IdlePool(std::size_t n_servers) : slot_(n_servers, kAbsent) {
    members_.reserve(n_servers);
}

void IdlePool::insert(ServerId i) {
    if (i >= slot_.size()) {
        throw InternalInconsistency("IdlePool::insert: server " + std::to_string(i) + " out of range");
    }
    if (slot_[i] != kAbsent) {
        throw InternalInconsistency("IdlePool::insert: server " + std::to_string(i) + " already idle");
    }
    slot_[i] = static_cast<std::uint32_t>(members_.size());
    members_.push_back(i);
}

void IdlePool::remove(ServerId i) {
    if (!contains(i)) {
        throw InternalInconsistency("IdlePool::remove: server " + std::to_string(i) + " not idle");
    }
    const std::uint32_t pos = slot_[i];
    const ServerId last = members_.back();
    members_[pos] = last;
    slot_[last] = pos;
    members_.pop_back();
    slot_[i] = kAbsent;
}

ServerId IdlePool::sample_uniform(RngStream& rng) const {
    if (members_.empty()) {
        throw InternalInconsistency("IdlePool::sample_uniform: pool is empty");
    }
    return members_[rng.below(members_.size())];
}

ServerId IdlePool::most_recent() const {
    if (members_.empty()) {
        throw InternalInconsistency("IdlePool::most_recent: pool is empty");
    }
    return members_.back();
}

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::jiq: return "jiq";
        case PolicyKind::jsq_d: return "jsq_d";
        case PolicyKind::random: return "random";
        case PolicyKind::jiq_biased: return "jiq_biased";
    }
    return "unknown";
}

std::string_view to_string(IdleSelection sel) {
    return sel == IdleSelection::uniform ? "uniform" : "lifo";
}

PolicyKind policy_kind_from_string(std::string_view name) {
    for (auto k : {PolicyKind::jiq, PolicyKind::jsq_d, PolicyKind::random, PolicyKind::jiq_biased}) {
        if (to_string(k) == name) return k;
    }
    throw InvalidParameter("unknown policy kind '" + std::string(name) + "'");
}

IdleSelection idle_selection_from_string(std::string_view name) {
    if (name == "uniform") return IdleSelection::uniform;
    if (name == "lifo") return IdleSelection::lifo;
    throw InvalidParameter("unknown idle selection '" + std::string(name) + "'");
}

std::vector<double> geometric_bias_weights(std::size_t n, double ratio) {
    if (!(ratio >= 1.0)) throw InvalidParameter("bias_ratio must be >= 1");
    std::vector<double> w(n, 1.0);
    if (n > 1) {
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = std::pow(ratio, static_cast<double>(i) / static_cast<double>(n - 1));
        }
    }
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(n);
    for (auto& x : w) x /= mean;
    return w;
}

namespace {

std::vector<double> normalized_weights(const PolicySpec& spec, std::size_t n) {
    if (spec.kind != PolicyKind::jiq_biased) return std::vector<double>(n, 1.0);
    if (spec.bias_weights.empty()) return geometric_bias_weights(n, spec.bias_ratio);
    if (spec.bias_weights.size() != n) {
        throw InvalidParameter("bias_weights must have one entry per server");
    }
    double total = 0.0;
    for (double x : spec.bias_weights) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidParameter("bias_weights must be >= 0");
        total += x;
    }
    if (!(total > 0.0)) throw InvalidParameter("bias_weights must not all be zero");
    std::vector<double> w(spec.bias_weights);
    for (auto& x : w) x *= static_cast<double>(n) / total;
    return w;
}

}  // namespace

void validate_policy(const PolicySpec& spec, std::size_t n, double lambda) {
    if (n == 0) throw InvalidParameter("policy needs at least one server");
    if (spec.kind == PolicyKind::jsq_d && (spec.d < 1 || static_cast<std::size_t>(spec.d) > n)) {
        throw InvalidParameter("jsq_d: d must satisfy 1 <= d <= n");
    }
    if (spec.kind == PolicyKind::jiq_biased) {
        if (!(spec.lambda_bar < 1.0) || !(spec.lambda_bar > 0.0)) {
            throw InvalidParameter("jiq_biased: lambda_bar must lie in (0, 1)");
        }
        const auto w = normalized_weights(spec, n);
        const double max_w = *std::max_element(w.begin(), w.end());
        // Probability of server i is w_i / n; the cap is (1/n)(lambda_bar/lambda).
        if (lambda > 0.0 && max_w > spec.lambda_bar / lambda * (1.0 + 1e-12)) {
            throw InvalidParameter("jiq_biased: max weight " + std::to_string(max_w) +
                                   " exceeds lambda_bar/lambda = " +
                                   std::to_string(spec.lambda_bar / lambda));
        }
    }
}

Router::Router(PolicySpec spec, std::size_t n) : spec_(std::move(spec)), weights_(normalized_weights(spec_, n)) {
    if (spec_.kind == PolicyKind::jiq_biased) {
        lottery_ = std::discrete_distribution<std::uint32_t>(weights_.begin(), weights_.end());
    }
}

ServerId Router::pick_idle(const IdlePool& pool, RngStream& rng) const {
    return spec_.idle_selection == IdleSelection::lifo ? pool.most_recent()
                                                       : pool.sample_uniform(rng);
}

ServerId Router::pick_busy_case(std::size_t n, RngStream& rng) {
    if (spec_.kind == PolicyKind::jiq_biased) {
        return lottery_(rng);
    }
    return static_cast<ServerId>(rng.below(n));
}

RouteDecision Router::route(const RoutingView& view, RngStream& rng) {
    RouteDecision out;
    switch (spec_.kind) {
        case PolicyKind::jiq:
        case PolicyKind::jiq_biased:
            if (view.preferred_idle != nullptr && !view.preferred_idle->empty()) {
                out.destination = pick_idle(*view.preferred_idle, rng);
            } else if (!view.idle->empty()) {
                out.destination = pick_idle(*view.idle, rng);
            } else {
                out.destination = pick_busy_case(view.n, rng);
            }
            break;
        case PolicyKind::random:
            out.destination = static_cast<ServerId>(rng.below(view.n));
            break;
        case PolicyKind::jsq_d: {
            // d distinct servers (Floyd's sampling), so d = n scans every queue.
            if (picked_.size() != view.n) picked_.assign(view.n, 0);
            chosen_.clear();
            for (std::uint64_t j = view.n - static_cast<std::uint64_t>(spec_.d); j < view.n; ++j) {
                auto cand = static_cast<ServerId>(rng.below(j + 1));
                if (picked_[cand]) cand = static_cast<ServerId>(j);
                picked_[cand] = 1;
                chosen_.push_back(cand);
            }
            ServerId best = chosen_.front();
            for (ServerId cand : chosen_) {
                picked_[cand] = 0;
                const auto lc = view.queue_lengths[cand];
                const auto lb = view.queue_lengths[best];
                if (lc < lb || (lc == lb && cand < best)) best = cand;
            }
            out.destination = best;
            break;
        }
    }
    const std::uint32_t len = view.queue_lengths[out.destination];
    out.destination_was_idle = (len == 0);
    out.blocked = view.buffer_capacity > 0 && len >= view.buffer_capacity;
    return out;
}

}  // namespace jiqlab
