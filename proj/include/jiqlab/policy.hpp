#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "jiqlab/rng.hpp"

namespace jiqlab {

using ServerId = std::uint32_t;

// Set of idle servers with O(1) insert, remove and uniform sampling
// (swap-remove array plus inverse index).
class IdlePool {
public:
    explicit IdlePool(std::size_t n_servers = 0);

    void insert(ServerId i);
    void remove(ServerId i);
    bool contains(ServerId i) const { return i < slot_.size() && slot_[i] != kAbsent; }

    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    std::span<const ServerId> members() const { return members_; }

    ServerId sample_uniform(RngStream& rng) const;
    // Most recently inserted member, provided removals only ever take this one.
    ServerId most_recent() const;

private:
    static constexpr std::uint32_t kAbsent = 0xffffffffu;
    std::vector<ServerId> members_;
    std::vector<std::uint32_t> slot_;
};

enum class PolicyKind { jiq, jsq_d, random, jiq_biased };
enum class IdleSelection { uniform, lifo };

std::string_view to_string(PolicyKind kind);
std::string_view to_string(IdleSelection sel);
PolicyKind policy_kind_from_string(std::string_view name);
IdleSelection idle_selection_from_string(std::string_view name);

struct PolicySpec {
    PolicyKind kind = PolicyKind::jiq;
    int d = 2;  // jsq_d only
    IdleSelection idle_selection = IdleSelection::uniform;

    // jiq_biased: when all servers are busy, server i is drawn with probability
    // weight_i / n. Weights come from bias_weights if given, otherwise a
    // geometric profile whose max/min ratio is bias_ratio.
    double lambda_bar = 0.9;
    double bias_ratio = 4.0;
    std::vector<double> bias_weights;

    // Arrivals go to an idle server of this subset tag first, when one exists.
    std::optional<int> preferred_tag;
};

// Geometric weights normalized to mean 1: w_i proportional to ratio^(i/(n-1)).
std::vector<double> geometric_bias_weights(std::size_t n, double ratio);

// Throws InvalidParameter if the spec is unusable for n servers at arrival rate lambda:
// jsq_d needs 1 <= d <= n; jiq_biased needs lambda_bar < 1 and every per-arrival
// busy-case probability at most (1/n)(lambda_bar/lambda).
void validate_policy(const PolicySpec& spec, std::size_t n, double lambda);

struct RoutingView {
    std::size_t n = 0;
    const IdlePool* idle = nullptr;
    const IdlePool* preferred_idle = nullptr;  // null unless a preferred tag is set
    std::span<const std::uint32_t> queue_lengths;
    std::uint32_t buffer_capacity = 0;  // 0 = unlimited
};

struct RouteDecision {
    ServerId destination = 0;
    bool destination_was_idle = false;
    bool blocked = false;
};

// Per-run routing state; precomputes the biased lottery when needed.
class Router {
public:
    Router(PolicySpec spec, std::size_t n);

    RouteDecision route(const RoutingView& view, RngStream& rng);

    const PolicySpec& spec() const { return spec_; }
    // Normalized busy-case weights (all 1 for unbiased policies).
    const std::vector<double>& weights() const { return weights_; }

private:
    ServerId pick_idle(const IdlePool& pool, RngStream& rng) const;
    ServerId pick_busy_case(std::size_t n, RngStream& rng);

    PolicySpec spec_;
    std::vector<double> weights_;
    std::discrete_distribution<std::uint32_t> lottery_;
    std::vector<std::uint8_t> picked_;  // jsq_d scratch
    std::vector<ServerId> chosen_;
};

}  // namespace jiqlab
