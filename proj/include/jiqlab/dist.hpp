#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "jiqlab/rng.hpp"

namespace jiqlab {

enum class DistKind { exponential, deterministic, pareto, uniform, hyperexponential, lognormal };

std::string_view to_string(DistKind kind);
DistKind dist_kind_from_string(std::string_view name);

namespace law {
struct Exponential {
    double rate = 1.0;
};
struct Deterministic {
    double value = 1.0;
};
// Classical Pareto: P{S > w} = (scale / w)^alpha for w >= scale.
struct Pareto {
    double alpha = 2.0;
    double scale = 1.0;
};
struct Uniform {
    double low = 0.0;
    double high = 2.0;
};
struct HyperExponential {
    std::vector<double> probs;
    std::vector<double> rates;
};
struct LogNormal {
    double mu = 0.0;
    double sigma = 1.0;
};
}  // namespace law

using DistParams = std::variant<law::Exponential, law::Deterministic, law::Pareto, law::Uniform,
                                law::HyperExponential, law::LogNormal>;

// A positive service-time (or interarrival) law with exact tail evaluation.
// Immutable after construction; sampling only touches the caller's stream.
class ServiceDistribution {
public:
    DistKind kind() const;
    const DistParams& params() const { return params_; }

    double mean() const;
    bool finite_variance() const;
    bool has_closed_form_residual() const;

    // F^c(w) = P{S > w}.
    double tail(double w) const;

    // Phi^c(w) = integral of F^c over [w, inf). For a mean-1 law this is the tail
    // of the stationary residual service time, and equals 1 at w = 0.
    double residual_tail(double w) const;

    // Quadrature route for residual_tail, available for every kind.
    double residual_tail_quadrature(double w) const;

    // Integral of F^c over [a, b], always by quadrature.
    double tail_integral(double a, double b) const;

    double sample(RngStream& rng) const;

    // The law of c * S.
    ServiceDistribution scaled(double factor) const;

    // Compact label without commas, e.g. "pareto[alpha=1.5;scale=0.3333]".
    std::string label() const;

private:
    friend ServiceDistribution make_distribution(DistParams raw, bool normalize);
    explicit ServiceDistribution(DistParams p) : params_(std::move(p)) {}

    double quadrature_cutoff(double from) const;
    std::vector<double> breakpoints() const;

    DistParams params_;
};

// Validates the parameters and, when normalize is set, rescales the law to mean 1.
// Throws InvalidParameter for an unusable law (alpha <= 1, non-positive scale, ...).
ServiceDistribution make_distribution(DistParams raw, bool normalize = true);

// Unit-mean exponential; the Poisson-arrival base law.
ServiceDistribution unit_exponential();

}  // namespace jiqlab
