#pragma once

#include <functional>
#include <span>

namespace jiqlab::quad {

struct SimpsonOptions {
    double abs_tol = 1e-10;
    int max_depth = 48;
    long max_evaluations = 2'000'000;
    // The interval is pre-split into this many equal panels before adaptation,
    // so a long flat-looking interval cannot fool the first error estimate.
    int initial_panels = 16;
};

// Adaptive Simpson integration of f over [a, b]. Throws QuadratureError when
// the tolerance is not met within the evaluation budget or depth limit.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const SimpsonOptions& opts = {});

// Same, but the interval is first split at the given breakpoints (those outside
// (a, b) are ignored). Use for integrands with kinks, e.g. support endpoints.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        std::span<const double> breakpoints, const SimpsonOptions& opts = {});

}  // namespace jiqlab::quad
