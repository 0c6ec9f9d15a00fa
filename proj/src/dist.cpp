#include "jiqlab/dist.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "jiqlab/error.hpp"
#include "jiqlab/quadrature.hpp"

namespace jiqlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void validate(const DistParams& p) {
    std::visit(
        overloaded{
            [](const law::Exponential& d) {
                if (!positive_finite(d.rate)) throw InvalidParameter("exponential: rate must be > 0");
            },
            [](const law::Deterministic& d) {
                if (!positive_finite(d.value))
                    throw InvalidParameter("deterministic: value must be > 0");
            },
            [](const law::Pareto& d) {
                if (!(std::isfinite(d.alpha) && d.alpha > 1.0))
                    throw InvalidParameter("pareto: alpha must be > 1 for a finite mean");
                if (!positive_finite(d.scale)) throw InvalidParameter("pareto: scale must be > 0");
            },
            [](const law::Uniform& d) {
                if (!(std::isfinite(d.low) && d.low >= 0.0))
                    throw InvalidParameter("uniform: low must be >= 0");
                if (!(std::isfinite(d.high) && d.high > d.low))
                    throw InvalidParameter("uniform: high must exceed low");
            },
            [](const law::HyperExponential& d) {
                if (d.probs.empty() || d.probs.size() != d.rates.size())
                    throw InvalidParameter("hyperexponential: probs and rates must be nonempty and equal length");
                double total = 0.0;
                for (std::size_t i = 0; i < d.probs.size(); ++i) {
                    if (!(std::isfinite(d.probs[i]) && d.probs[i] >= 0.0))
                        throw InvalidParameter("hyperexponential: probabilities must be >= 0");
                    if (!positive_finite(d.rates[i]))
                        throw InvalidParameter("hyperexponential: rates must be > 0");
                    total += d.probs[i];
                }
                if (std::abs(total - 1.0) > 1e-9)
                    throw InvalidParameter("hyperexponential: probabilities must sum to 1");
            },
            [](const law::LogNormal& d) {
                if (!std::isfinite(d.mu)) throw InvalidParameter("lognormal: mu must be finite");
                if (!positive_finite(d.sigma)) throw InvalidParameter("lognormal: sigma must be > 0");
            },
        },
        p);
}

}  // namespace

std::string_view to_string(DistKind kind) {
    switch (kind) {
        case DistKind::exponential: return "exponential";
        case DistKind::deterministic: return "deterministic";
        case DistKind::pareto: return "pareto";
        case DistKind::uniform: return "uniform";
        case DistKind::hyperexponential: return "hyperexponential";
        case DistKind::lognormal: return "lognormal";
    }
    return "unknown";
}

DistKind dist_kind_from_string(std::string_view name) {
    for (auto k : {DistKind::exponential, DistKind::deterministic, DistKind::pareto,
                   DistKind::uniform, DistKind::hyperexponential, DistKind::lognormal}) {
        if (to_string(k) == name) return k;
    }
    throw InvalidParameter("unknown distribution kind '" + std::string(name) + "'");
}

DistKind ServiceDistribution::kind() const { return static_cast<DistKind>(params_.index()); }

double ServiceDistribution::mean() const {
    return std::visit(
        overloaded{
            [](const law::Exponential& d) { return 1.0 / d.rate; },
            [](const law::Deterministic& d) { return d.value; },
            [](const law::Pareto& d) { return d.alpha * d.scale / (d.alpha - 1.0); },
            [](const law::Uniform& d) { return 0.5 * (d.low + d.high); },
            [](const law::HyperExponential& d) {
                double m = 0.0;
                for (std::size_t i = 0; i < d.probs.size(); ++i) m += d.probs[i] / d.rates[i];
                return m;
            },
            [](const law::LogNormal& d) { return std::exp(d.mu + 0.5 * d.sigma * d.sigma); },
        },
        params_);
}

bool ServiceDistribution::finite_variance() const {
    if (const auto* p = std::get_if<law::Pareto>(&params_)) return p->alpha > 2.0;
    return true;
}

bool ServiceDistribution::has_closed_form_residual() const {
    return kind() != DistKind::lognormal;
}

double ServiceDistribution::tail(double w) const {
    return std::visit(
        overloaded{
            [w](const law::Exponential& d) { return w <= 0.0 ? 1.0 : std::exp(-d.rate * w); },
            [w](const law::Deterministic& d) { return w < d.value ? 1.0 : 0.0; },
            [w](const law::Pareto& d) {
                return w < d.scale ? 1.0 : std::pow(d.scale / w, d.alpha);
            },
            [w](const law::Uniform& d) {
                if (w < d.low) return 1.0;
                if (w >= d.high) return 0.0;
                return (d.high - w) / (d.high - d.low);
            },
            [w](const law::HyperExponential& d) {
                if (w <= 0.0) return 1.0;
                double s = 0.0;
                for (std::size_t i = 0; i < d.probs.size(); ++i)
                    s += d.probs[i] * std::exp(-d.rates[i] * w);
                return s;
            },
            [w](const law::LogNormal& d) {
                if (w <= 0.0) return 1.0;
                return 0.5 * std::erfc((std::log(w) - d.mu) / (d.sigma * std::sqrt(2.0)));
            },
        },
        params_);
}

double ServiceDistribution::residual_tail(double w) const {
    w = std::max(w, 0.0);
    return std::visit(
        overloaded{
            [w](const law::Exponential& d) { return std::exp(-d.rate * w) / d.rate; },
            [w](const law::Deterministic& d) { return std::max(d.value - w, 0.0); },
            [w](const law::Pareto& d) {
                const double far = d.scale / (d.alpha - 1.0);
                if (w < d.scale) return (d.scale - w) + far;
                return far * std::pow(d.scale / w, d.alpha - 1.0);
            },
            [w](const law::Uniform& d) {
                const double width = d.high - d.low;
                if (w < d.low) return (d.low - w) + 0.5 * width;
                if (w >= d.high) return 0.0;
                return (d.high - w) * (d.high - w) / (2.0 * width);
            },
            [w](const law::HyperExponential& d) {
                double s = 0.0;
                for (std::size_t i = 0; i < d.probs.size(); ++i)
                    s += d.probs[i] * std::exp(-d.rates[i] * w) / d.rates[i];
                return s;
            },
            [this, w](const law::LogNormal&) { return residual_tail_quadrature(w); },
        },
        params_);
}

std::vector<double> ServiceDistribution::breakpoints() const {
    return std::visit(
        overloaded{
            [](const law::Deterministic& d) { return std::vector<double>{d.value}; },
            [](const law::Pareto& d) { return std::vector<double>{d.scale}; },
            [](const law::Uniform& d) { return std::vector<double>{d.low, d.high}; },
            [](const auto&) { return std::vector<double>{}; },
        },
        params_);
}

// Point beyond which the remaining tail integral is negligible (or, for Pareto,
// handled analytically by the caller).
double ServiceDistribution::quadrature_cutoff(double from) const {
    return std::visit(
        overloaded{
            [](const law::Deterministic& d) { return d.value; },
            [](const law::Uniform& d) { return d.high; },
            [from](const law::Pareto& d) { return 64.0 * std::max(from, d.scale); },
            [this, from](const auto&) {
                double x = std::max({from, 1.0, mean()});
                while (tail(x) * std::max(x, 1.0) >= 1e-12) {
                    x *= 2.0;
                }
                return x;
            },
        },
        params_);
}

double ServiceDistribution::tail_integral(double a, double b) const {
    a = std::max(a, 0.0);
    if (!(b > a)) return 0.0;

    double remainder = 0.0;
    double upper = b;
    const double cutoff = quadrature_cutoff(a);
    if (upper > cutoff) {
        if (const auto* p = std::get_if<law::Pareto>(&params_)) {
            // Exact integral of (scale/x)^alpha over [cutoff, b].
            const double c = p->scale / (p->alpha - 1.0);
            const double far_b = std::isinf(b) ? 0.0 : std::pow(p->scale / b, p->alpha - 1.0);
            remainder = c * (std::pow(p->scale / cutoff, p->alpha - 1.0) - far_b);
        }
        upper = cutoff;
    }
    if (!(upper > a)) return remainder;

    // Doubling cut points keep each panel's dynamic range bounded for slowly
    // decaying tails.
    std::vector<double> cuts = breakpoints();
    for (double x = std::max(a, 0.25); x < upper; x *= 2.0) {
        cuts.push_back(x);
    }
    quad::SimpsonOptions opts;
    opts.abs_tol = 1e-10;
    opts.initial_panels = 4;
    const double body =
        quad::adaptive_simpson([this](double x) { return tail(x); }, a, upper, cuts, opts);
    return body + remainder;
}

double ServiceDistribution::residual_tail_quadrature(double w) const {
    return tail_integral(std::max(w, 0.0), std::numeric_limits<double>::infinity());
}

double ServiceDistribution::sample(RngStream& rng) const {
    return std::visit(
        overloaded{
            [&rng](const law::Exponential& d) { return -std::log(rng.uniform_open0()) / d.rate; },
            [](const law::Deterministic& d) { return d.value; },
            [&rng](const law::Pareto& d) {
                return d.scale * std::pow(rng.uniform_open0(), -1.0 / d.alpha);
            },
            [&rng](const law::Uniform& d) {
                return d.low + (d.high - d.low) * rng.uniform_open0();
            },
            [&rng](const law::HyperExponential& d) {
                const double u = rng.uniform();
                std::size_t i = 0;
                double acc = d.probs[0];
                while (u >= acc && i + 1 < d.probs.size()) {
                    acc += d.probs[++i];
                }
                return -std::log(rng.uniform_open0()) / d.rates[i];
            },
            [&rng](const law::LogNormal& d) {
                return std::exp(d.mu + d.sigma * std::normal_distribution<double>{}(rng));
            },
        },
        params_);
}

ServiceDistribution ServiceDistribution::scaled(double factor) const {
    if (!positive_finite(factor)) throw InvalidParameter("scale factor must be > 0");
    DistParams p = std::visit(
        overloaded{
            [factor](law::Exponential d) -> DistParams { d.rate /= factor; return d; },
            [factor](law::Deterministic d) -> DistParams { d.value *= factor; return d; },
            [factor](law::Pareto d) -> DistParams { d.scale *= factor; return d; },
            [factor](law::Uniform d) -> DistParams {
                d.low *= factor;
                d.high *= factor;
                return d;
            },
            [factor](law::HyperExponential d) -> DistParams {
                for (auto& r : d.rates) r /= factor;
                return d;
            },
            [factor](law::LogNormal d) -> DistParams { d.mu += std::log(factor); return d; },
        },
        params_);
    return ServiceDistribution(std::move(p));
}

std::string ServiceDistribution::label() const {
    std::ostringstream os;
    os << std::setprecision(6);
    std::visit(
        overloaded{
            [&os](const law::Exponential& d) { os << "exponential[rate=" << d.rate << "]"; },
            [&os](const law::Deterministic& d) { os << "deterministic[value=" << d.value << "]"; },
            [&os](const law::Pareto& d) {
                os << "pareto[alpha=" << d.alpha << ";scale=" << d.scale << "]";
            },
            [&os](const law::Uniform& d) {
                os << "uniform[low=" << d.low << ";high=" << d.high << "]";
            },
            [&os](const law::HyperExponential& d) {
                os << "hyperexponential[";
                for (std::size_t i = 0; i < d.probs.size(); ++i) {
                    if (i) os << ';';
                    os << d.probs[i] << '@' << d.rates[i];
                }
                os << ']';
            },
            [&os](const law::LogNormal& d) {
                os << "lognormal[mu=" << d.mu << ";sigma=" << d.sigma << "]";
            },
        },
        params_);
    return os.str();
}

ServiceDistribution make_distribution(DistParams raw, bool normalize) {
    validate(raw);
    ServiceDistribution d(std::move(raw));
    const double m = d.mean();
    if (!positive_finite(m)) throw InvalidParameter("distribution mean must be finite and > 0");
    if (normalize && m != 1.0) {
        return d.scaled(1.0 / m);
    }
    return d;
}

ServiceDistribution unit_exponential() { return make_distribution(law::Exponential{1.0}, false); }

}  // namespace jiqlab
