#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "jiqlab/dist.hpp"
#include "jiqlab/error.hpp"
#include "jiqlab/quadrature.hpp"

using namespace jiqlab;

namespace {

// Independent closed forms used as oracles.
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// E[(S - w)^+] for a lognormal S.
double lognormal_residual(double mu, double sigma, double w) {
    const double m = std::exp(mu + 0.5 * sigma * sigma);
    if (w <= 0.0) return m - w;
    const double lw = std::log(w);
    return m * normal_cdf((mu + sigma * sigma - lw) / sigma) - w * (1.0 - normal_cdf((lw - mu) / sigma));
}

std::vector<ServiceDistribution> all_kinds() {
    return {
        make_distribution(law::Exponential{2.0}),
        make_distribution(law::Deterministic{3.0}),
        make_distribution(law::Pareto{1.5, 1.0}),
        make_distribution(law::Pareto{2.5, 1.0}),
        make_distribution(law::Uniform{0.5, 1.5}),
        make_distribution(law::HyperExponential{{0.5, 0.5}, {2.0, 2.0 / 3.0}}),
        make_distribution(law::LogNormal{0.0, 0.75}),
    };
}

double median_of_means(std::vector<double> xs, std::size_t groups) {
    const std::size_t per = xs.size() / groups;
    std::vector<double> means;
    for (std::size_t g = 0; g < groups; ++g) {
        means.push_back(std::accumulate(xs.begin() + g * per, xs.begin() + (g + 1) * per, 0.0) / per);
    }
    std::nth_element(means.begin(), means.begin() + groups / 2, means.end());
    return means[groups / 2];
}

}  // namespace

TEST_CASE("adaptive simpson integrates smooth and kinked functions") {
    CHECK(quad::adaptive_simpson([](double x) { return std::exp(-x); }, 0.0, 1.0) ==
          doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(quad::adaptive_simpson([](double x) { return x * x; }, -1.0, 2.0) ==
          doctest::Approx(3.0).epsilon(1e-12));
    const std::vector<double> kink{0.3};
    CHECK(quad::adaptive_simpson([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, kink) ==
          doctest::Approx(0.045 + 0.245).epsilon(1e-12));
    CHECK(quad::adaptive_simpson([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("adaptive simpson reports an exhausted budget") {
    quad::SimpsonOptions opts;
    opts.max_evaluations = 50;
    opts.abs_tol = 1e-14;
    CHECK_THROWS_AS(quad::adaptive_simpson([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0.0, 1.0, opts),
                    QuadratureError);
}

TEST_CASE("normalization") {
    const auto e = make_distribution(law::Exponential{1.0}, true);
    CHECK(e.mean() == doctest::Approx(1.0));
    CHECK(std::get<law::Exponential>(e.params()).rate == doctest::Approx(1.0));

    const auto d = make_distribution(law::Deterministic{3.0}, true);
    CHECK(std::get<law::Deterministic>(d.params()).value == doctest::Approx(1.0));

    // alpha * x_m / (alpha - 1) = 1 gives x_m = 1/3.
    const auto p = make_distribution(law::Pareto{1.5, 1.0}, true);
    CHECK(std::get<law::Pareto>(p.params()).scale == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const auto raw = make_distribution(law::Deterministic{3.0}, false);
    CHECK(raw.mean() == doctest::Approx(3.0));

    for (const auto& dist : all_kinds()) {
        CAPTURE(dist.label());
        CHECK(dist.mean() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("invalid laws are rejected") {
    CHECK_THROWS_AS(make_distribution(law::Exponential{0.0}), InvalidParameter);
    CHECK_THROWS_AS(make_distribution(law::Exponential{-1.0}), InvalidParameter);
    CHECK_THROWS_AS(make_distribution(law::Deterministic{0.0}), InvalidParameter);
    CHECK_THROWS_AS(make_distribution(law::Pareto{1.0, 1.0}), InvalidParameter);
    CHECK_THROWS_AS(make_distribution(law::Pareto{1.5, -1.0}), InvalidParameter);
    CHECK_THROWS_AS(make_distribution(law::Uniform{1.0, 0.5}), InvalidParameter);
    CHECK_THROWS_AS(make_distribution(law::Uniform{-1.0, 1.0}), InvalidParameter);
    CHECK_THROWS_AS(make_distribution(law::HyperExponential{{0.5, 0.4}, {1.0, 2.0}}), InvalidParameter);
    CHECK_THROWS_AS(make_distribution(law::HyperExponential{{1.0}, {1.0, 2.0}}), InvalidParameter);
    CHECK_THROWS_AS(make_distribution(law::LogNormal{0.0, 0.0}), InvalidParameter);
    CHECK_THROWS_AS(dist_kind_from_string("gamma"), InvalidParameter);
}

TEST_CASE("tail examples") {
    CHECK(unit_exponential().tail(0.0) == 1.0);
    CHECK(make_distribution(law::Deterministic{1.0}).tail(2.0) == 0.0);
    const auto p = make_distribution(law::Pareto{1.5, 1.0});
    CHECK(p.tail(1.0) == doctest::Approx(std::pow(1.0 / 3.0, 1.5)).epsilon(1e-12));
    CHECK(p.tail(1.0) == doctest::Approx(0.19245).epsilon(1e-4));

    // Empirical survival frequency over 1e6 samples.
    RngStream rng(7, "pareto-tail");
    const int n = 1'000'000;
    int above = 0;
    for (int i = 0; i < n; ++i) above += p.sample(rng) > 1.0 ? 1 : 0;
    const double freq = static_cast<double>(above) / n;
    const double sigma = std::sqrt(0.19245 * (1 - 0.19245) / n);
    CHECK(std::abs(freq - p.tail(1.0)) < 4 * sigma);
}

TEST_CASE("tail is a survival function") {
    for (const auto& dist : all_kinds()) {
        CAPTURE(dist.label());
        CHECK(dist.tail(0.0) == 1.0);
        double prev = 1.0;
        for (double w = 0.0; w <= 20.0; w += 0.05) {
            const double v = dist.tail(w);
            CHECK(v <= prev);
            CHECK(v >= 0.0);
            prev = v;
        }
        CHECK(dist.tail(1e6) < 1e-6);
    }
}

TEST_CASE("residual tail examples") {
    for (const auto& dist : all_kinds()) {
        CAPTURE(dist.label());
        CHECK(dist.residual_tail(0.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(make_distribution(law::Deterministic{1.0}).residual_tail(0.5) == doctest::Approx(0.5));
    CHECK(unit_exponential().residual_tail(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(unit_exponential().residual_tail_quadrature(1.0) == doctest::Approx(0.367879).epsilon(1e-6));
}

TEST_CASE("closed-form residual tails agree with quadrature") {
    for (const auto& dist : all_kinds()) {
        CAPTURE(dist.label());
        for (int i = 0; i < 100; ++i) {
            const double w = 0.1 * i;
            CAPTURE(w);
            CHECK(std::abs(dist.residual_tail(w) - dist.residual_tail_quadrature(w)) < 1e-6);
        }
    }
}

TEST_CASE("lognormal residual tail matches its closed form") {
    const auto raw = make_distribution(law::LogNormal{0.3, 0.75}, false);
    for (double w : {0.0, 0.25, 1.0, 2.5, 6.0}) {
        CAPTURE(w);
        CHECK(raw.residual_tail(w) == doctest::Approx(lognormal_residual(0.3, 0.75, w)).epsilon(1e-7));
    }
}

TEST_CASE("residual tail is the antiderivative of minus the tail") {
    const double h = 1e-4;
    for (const auto& dist : all_kinds()) {
        CAPTURE(dist.label());
        for (double w = 0.05; w < 8.0; w += 0.173) {
            // Skip kinks of the tail where the central difference is one-sided.
            bool near_kink = false;
            if (dist.kind() == DistKind::deterministic || dist.kind() == DistKind::uniform ||
                dist.kind() == DistKind::pareto) {
                for (double k : {1.0, 0.5, 1.5, std::get_if<law::Pareto>(&dist.params())
                                                   ? std::get<law::Pareto>(dist.params()).scale
                                                   : -1.0}) {
                    near_kink = near_kink || std::abs(w - k) < 2 * h;
                }
            }
            if (near_kink) continue;
            const double deriv = (dist.residual_tail(w + h) - dist.residual_tail(w - h)) / (2 * h);
            CAPTURE(w);
            CHECK(std::abs(deriv + dist.tail(w)) < 1e-4);
        }
    }
}

TEST_CASE("tail integral over a window") {
    const auto e = unit_exponential();
    CHECK(e.tail_integral(0.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-10));
    CHECK(e.tail_integral(2.0, 2.0) == 0.0);
    const auto p = make_distribution(law::Pareto{1.5, 1.0});
    for (double a : {0.0, 0.2, 1.0, 5.0}) {
        CHECK(p.tail_integral(a, a + 3.0) ==
              doctest::Approx(p.residual_tail(a) - p.residual_tail(a + 3.0)).epsilon(1e-8));
    }
}

TEST_CASE("sampling") {
    SUBCASE("deterministic is degenerate") {
        RngStream rng(1, "det");
        const auto d = make_distribution(law::Deterministic{1.0});
        for (int i = 0; i < 1000; ++i) REQUIRE(d.sample(rng) == 1.0);
    }
    SUBCASE("exponential sample mean") {
        RngStream rng(2, "exp");
        const auto e = unit_exponential();
        double sum = 0.0;
        for (int i = 0; i < 1'000'000; ++i) sum += e.sample(rng);
        CHECK(std::abs(sum / 1e6 - 1.0) <= 0.005);
    }
    SUBCASE("pareto median of means") {
        RngStream rng(3, "pareto");
        const auto p = make_distribution(law::Pareto{1.5, 1.0});
        std::vector<double> xs(1'000'000);
        for (auto& x : xs) {
            x = p.sample(rng);
            REQUIRE(x >= 1.0 / 3.0);
        }
        const double mom = median_of_means(xs, 20);
        CHECK(mom >= 0.97);
        CHECK(mom <= 1.03);
    }
    SUBCASE("all kinds are positive with mean near 1") {
        RngStream rng(4, "kinds");
        for (const auto& dist : all_kinds()) {
            if (!dist.finite_variance()) continue;
            CAPTURE(dist.label());
            double sum = 0.0;
            const int n = 200'000;
            for (int i = 0; i < n; ++i) {
                const double x = dist.sample(rng);
                REQUIRE(x > 0.0);
                sum += x;
            }
            CHECK(std::abs(sum / n - 1.0) < 0.02);
        }
    }
}

TEST_CASE("scaling and labels") {
    const auto e = unit_exponential().scaled(2.5);
    CHECK(e.mean() == doctest::Approx(2.5));
    CHECK(e.tail(2.5) == doctest::Approx(std::exp(-1.0)));
    const auto p = make_distribution(law::Pareto{1.5, 1.0});
    CHECK(p.label().find(',') == std::string::npos);
    CHECK(p.label().rfind("pareto[", 0) == 0);
    CHECK(p.finite_variance() == false);
    CHECK(make_distribution(law::Pareto{2.5, 1.0}).finite_variance());
    for (auto k : {DistKind::exponential, DistKind::deterministic, DistKind::pareto, DistKind::uniform,
                   DistKind::hyperexponential, DistKind::lognormal}) {
        CHECK(dist_kind_from_string(to_string(k)) == k);
    }
}

TEST_CASE("named streams are reproducible and distinct") {
    RngStream a(42, "arrivals");
    RngStream b(42, "arrivals");
    RngStream c(42, "service");
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        REQUIRE(x == b());
        differs = differs || x != c();
    }
    CHECK(differs);
    RngStream u(5);
    for (int i = 0; i < 10000; ++i) {
        const double v = u.uniform_open0();
        REQUIRE(v > 0.0);
        REQUIRE(v <= 1.0);
    }
}
