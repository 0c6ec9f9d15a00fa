#include "jiqlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "jiqlab/error.hpp"

namespace jiqlab::quad {

namespace {

struct Budget {
    long evaluations = 0;
    long limit = 0;
};

double eval(const std::function<double(double)>& f, double x, Budget& budget) {
    if (++budget.evaluations > budget.limit) {
        throw QuadratureError("adaptive Simpson: evaluation budget of " +
                              std::to_string(budget.limit) + " exhausted");
    }
    return f(x);
}

double refine(const std::function<double(double)>& f, double a, double b, double fa, double fm,
              double fb, double whole, double tol, int depth, Budget& budget) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(f, lm, budget);
    const double frm = eval(f, rm, budget);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // The second test stops refinement once the estimate is at roundoff level.
    if (std::abs(delta) <= 15.0 * tol ||
        std::abs(delta) <= 64.0 * std::numeric_limits<double>::epsilon() * std::abs(left + right)) {
        return left + right + delta / 15.0;
    }
    if (depth <= 0) {
        throw QuadratureError("adaptive Simpson: depth limit reached near x=" + std::to_string(m));
    }
    return refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget) +
           refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget);
}

double integrate_panel(const std::function<double(double)>& f, double a, double b, double tol,
                       int depth, Budget& budget) {
    const double fa = eval(f, a, budget);
    const double fb = eval(f, b, budget);
    const double m = 0.5 * (a + b);
    const double fm = eval(f, m, budget);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return refine(f, a, b, fa, fm, fb, whole, tol, depth, budget);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const SimpsonOptions& opts) {
    return adaptive_simpson(f, a, b, std::span<const double>{}, opts);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        std::span<const double> breakpoints, const SimpsonOptions& opts) {
    if (!(b > a)) {
        return 0.0;
    }
    std::vector<double> cuts{a};
    for (double x : breakpoints) {
        if (x > a && x < b) {
            cuts.push_back(x);
        }
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const int panels_per_piece = std::max(1, opts.initial_panels);
    const auto total_panels = static_cast<double>((cuts.size() - 1) * panels_per_piece);
    const double panel_tol = opts.abs_tol / total_panels;

    Budget budget{0, opts.max_evaluations};
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = cuts[i + 1];
        // Evaluate one ulp inside the piece, so a jump sitting on a cut point is
        // seen as the one-sided limit of its own piece.
        const double inner_lo = std::nextafter(lo, hi);
        const double inner_hi = std::nextafter(hi, lo);
        const std::function<double(double)> g = [&](double x) {
            return f(std::clamp(x, std::min(inner_lo, inner_hi), std::max(inner_lo, inner_hi)));
        };
        const double width = (hi - lo) / panels_per_piece;
        for (int k = 0; k < panels_per_piece; ++k) {
            const double pa = lo + k * width;
            const double pb = (k + 1 == panels_per_piece) ? hi : lo + (k + 1) * width;
            sum += integrate_panel(g, pa, pb, panel_tol, opts.max_depth, budget);
        }
    }
    return sum;
}

}  // namespace jiqlab::quad
