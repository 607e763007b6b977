#include "longrun/quadrature.hpp"

#include "longrun/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace longrun::quad {

namespace {

// Kronrod 15-point abscissae (positive half) and weights; Gauss 7-point weights.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double lo, hi, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double lo, double hi) {
    const double centre = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(centre);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = f(centre - dx);
        const double f2 = f(centre + dx);
        kronrod += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
    }
    kronrod *= half;
    gauss *= half;
    const double err =
        std::max(std::abs(kronrod - gauss), 50.0 * std::numeric_limits<double>::epsilon() * std::abs(kronrod));
    return {lo, hi, kronrod, err};
}

Result adaptive_finite(const std::function<double(double)>& f, double lo, double hi, Tolerance tol) {
    std::priority_queue<Panel> heap;
    Panel first = gk15(f, lo, hi);
    heap.push(first);
    double total = first.value;
    double total_err = first.error;
    int evals = 15;
    int intervals = 1;
    while (total_err > std::max(tol.abs, tol.rel * std::abs(total))) {
        if (intervals >= tol.max_intervals) {
            throw IntegrationFailure("adaptive quadrature did not reach tolerance", total, total_err);
        }
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            throw IntegrationFailure("quadrature panel collapsed below machine resolution", total, total_err);
        }
        Panel left = gk15(f, worst.lo, mid);
        Panel right = gk15(f, mid, worst.hi);
        evals += 30;
        ++intervals;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the accumulated cancellation of the running updates.
    double value = 0.0, error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    return {value, error, evals};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double lo, double hi, Tolerance tol) {
    if (lo == hi) return {};
    if (lo > hi) {
        Result r = integrate(f, hi, lo, tol);
        r.value = -r.value;
        return r;
    }
    const bool lo_inf = std::isinf(lo);
    const bool hi_inf = std::isinf(hi);
    if (!lo_inf && !hi_inf) return adaptive_finite(f, lo, hi, tol);
    if (lo_inf && hi_inf) {
        // x = s / (1 - s^2), s in (-1, 1)
        auto g = [&f](double s) {
            const double d = 1.0 - s * s;
            const double x = s / d;
            const double v = f(x);
            return v == 0.0 ? 0.0 : v * (1.0 + s * s) / (d * d);
        };
        return adaptive_finite(g, -1.0, 1.0, tol);
    }
    if (hi_inf) {
        // x = lo + s / (1 - s), s in [0, 1)
        auto g = [&f, lo](double s) {
            const double d = 1.0 - s;
            const double v = f(lo + s / d);
            return v == 0.0 ? 0.0 : v / (d * d);
        };
        return adaptive_finite(g, 0.0, 1.0, tol);
    }
    auto g = [&f, hi](double s) {
        const double d = 1.0 - s;
        const double v = f(hi - s / d);
        return v == 0.0 ? 0.0 : v / (d * d);
    };
    return adaptive_finite(g, 0.0, 1.0, tol);
}

Result integrate_panels(const std::function<double(double)>& f, double lo, double hi,
                        std::span<const double> breakpoints, Tolerance tol) {
    std::vector<double> cuts{lo};
    std::vector<double> inner(breakpoints.begin(), breakpoints.end());
    std::sort(inner.begin(), inner.end());
    for (double b : inner) {
        if (std::isfinite(b) && b > cuts.back() && b < hi) cuts.push_back(b);
    }
    cuts.push_back(hi);
    Result total;
    // Each panel gets an equal share of the absolute tolerance.
    Tolerance panel_tol = tol;
    panel_tol.abs = tol.abs / static_cast<double>(cuts.size() - 1);
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        const Result r = integrate(f, cuts[j], cuts[j + 1], panel_tol);
        total.value += r.value;
        total.error += r.error;
        total.evaluations += r.evaluations;
    }
    return total;
}

const GaussLegendre& gauss_legendre(int points) {
    if (points < 1 || points > 1024) throw std::invalid_argument("gauss_legendre: points out of range");
    static std::mutex mutex;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(points);
    if (it != cache.end()) return it->second;

    GaussLegendre rule;
    rule.nodes.resize(points);
    rule.weights.resize(points);
    const int n = points;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return cache.emplace(points, std::move(rule)).first->second;
}

}  // namespace longrun::quad
