#include "longrun/oracles.hpp"

#include "longrun/errors.hpp"
#include "longrun/quadrature.hpp"
#include "longrun/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace longrun::oracle {

double gaussian_conditional_logpdf(double a, int n, std::span<const double> path) {
    const int k = static_cast<int>(path.size());
    if (k >= n) throw DomainError("gaussian oracle needs k < n");
    double s = 0.0, out = 0.0;
    for (int i = 0; i < k; ++i) {
        const double left = n - i;
        out += norm_logpdf(path[i], (n * a - s) / left, (left - 1.0) / left);
        s += path[i];
    }
    return out;
}

std::vector<double> sample_gaussian_conditional(double a, int n, int k, RngStream& rng) {
    if (k >= n) throw DomainError("gaussian oracle needs k < n");
    std::vector<double> y(k);
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
        const double left = n - i;
        y[i] = (n * a - s) / left + std::sqrt((left - 1.0) / left) * rng.normal();
        s += y[i];
    }
    return y;
}

double exponential_conditional_logpdf(double a, int n, std::span<const double> path) {
    const int k = static_cast<int>(path.size());
    if (k >= n) throw DomainError("exponential oracle needs k < n");
    const double total = n * (1.0 + a);
    double w = 0.0;
    for (double y : path) {
        if (!(y > -1.0)) throw SupportError("exponential oracle: a path value is not above -1");
        w += y + 1.0;
    }
    if (!(w < total)) throw SupportError("exponential oracle: the path already exceeds the conditioned total");
    return std::lgamma(static_cast<double>(n)) - std::lgamma(static_cast<double>(n - k)) +
           (n - k - 1.0) * std::log(total - w) - (n - 1.0) * std::log(total);
}

std::vector<double> sample_exponential_conditional(double a, int n, int k, RngStream& rng) {
    if (k >= n) throw DomainError("exponential oracle needs k < n");
    std::vector<double> e(n);
    for (double& v : e) v = rng.exponential();
    const double sum = pairwise_sum(e);
    const double total = n * (1.0 + a);
    std::vector<double> y(k);
    for (int i = 0; i < k; ++i) y[i] = total * e[i] / sum - 1.0;
    return y;
}

namespace {

struct Lattice {
    double h;
    long centre;  // index of the point total / count
    std::vector<double> mass;
};

Lattice cell_masses(const Model& model, double tilt, double point, double lo, double hi, double h) {
    const Interval xs = model.x_support();
    const long below = static_cast<long>(std::ceil((point - lo) / h));
    const long above = static_cast<long>(std::ceil((hi - point) / h));
    Lattice lat{h, below, std::vector<double>(static_cast<std::size_t>(below + above + 1))};
    const auto& gl = quad::gauss_legendre(8);
    for (std::size_t j = 0; j < lat.mass.size(); ++j) {
        const double x = point + (static_cast<double>(j) - below) * h;
        const double a = std::max(x - 0.5 * h, xs.lo);
        const double b = std::min(x + 0.5 * h, xs.hi);
        if (!(b > a)) continue;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double m = 0.0;
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            const double lp = tilted_logpdf(model, tilt, mid + half * gl.nodes[q]);
            if (lp > -kInf) m += gl.weights[q] * std::exp(lp);
        }
        lat.mass[j] = m * half;
    }
    return lat;
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

double lattice_sum_density(const Model& model, int count, double total, double tilt, double lo, double hi,
                           double h) {
    const double point = total / count;
    const Lattice lat = cell_masses(model, tilt, point, lo, hi, h);
    std::vector<double> acc = lat.mass;
    for (int c = 2; c < count; ++c) acc = convolve(acc, lat.mass);
    // The sum of `count` lattice points with indices j_1..j_count lands on `total`
    // exactly when the indices add up to count * centre.
    const long target = static_cast<long>(count) * lat.centre;
    double mass = 0.0;
    for (std::size_t j = 0; j < lat.mass.size(); ++j) {
        const long r = target - static_cast<long>(j);
        if (r >= 0 && r < static_cast<long>(acc.size())) mass += lat.mass[j] * acc[r];
    }
    return mass / h;
}

}  // namespace

OracleResult sum_density_by_convolution(const Model& model, int count, double total, double tilt,
                                        const GridSpec& grid) {
    if (!model.u_is_identity()) throw DomainError("grid convolution oracle requires u(x) = x");
    if (count < 1) throw DomainError("grid convolution needs count >= 1");
    OracleResult out;
    if (count == 1) {
        out.log_value = tilted_logpdf(model, tilt, total);
        out.method = "closed_form";
        return out;
    }
    const Interval xs = model.x_support();
    const double m = model.cgf_d1(tilt);
    const double s = std::sqrt(model.cgf_d2(tilt));
    const double point = total / count;
    double lo = grid.lo.value_or(std::max(xs.lo, std::min(m, point) - 15.0 * s));
    double hi = grid.hi.value_or(std::min(xs.hi, std::max(m, point) + 15.0 * s));
    // No single term can exceed what the others leave over.
    if (std::isfinite(xs.lo)) hi = std::min(hi, total - (count - 1) * std::max(lo, xs.lo));
    if (std::isfinite(xs.hi)) lo = std::max(lo, total - (count - 1) * std::min(hi, xs.hi));
    if (!(hi > lo)) throw SupportError("grid convolution: total lies outside the support of the sum");
    const double h = grid.h > 0.0 ? grid.h : (hi - lo) / 2048.0;
    if ((hi - lo) / (0.5 * h) > grid.max_cells) throw GridTooCoarse("grid would exceed max_cells", kInf);

    const double coarse = lattice_sum_density(model, count, total, tilt, lo, hi, h);
    const double fine = lattice_sum_density(model, count, total, tilt, lo, hi, 0.5 * h);
    if (!(fine > 0.0)) throw GridTooCoarse("grid convolution found no mass at the requested point", kInf);
    const double change = std::abs(fine - coarse) / fine;
    if (change > grid.tol) throw GridTooCoarse("grid halving changed the density beyond tolerance", change);
    const double extrapolated = (4.0 * fine - coarse) / 3.0;
    out.log_value = std::log(extrapolated > 0.0 ? extrapolated : fine);
    out.method = "grid_convolution";
    out.error_estimate = std::abs(fine - coarse) / (3.0 * fine);
    out.grid_spacing = 0.5 * h;
    return out;
}

OracleResult mean_density_by_convolution(const Model& model, int n, double u, const GridSpec& grid) {
    if (n < 1 || n > 8) throw DomainError("mean_density_by_convolution supports 1 <= n <= 8");
    OracleResult r = sum_density_by_convolution(model, n, n * u, 0.0, grid);
    r.log_value += std::log(static_cast<double>(n));
    return r;
}

double conditional_logpdf_by_convolution(const Model& model, int n, double u_sum, std::span<const double> path,
                                         double tilt, const GridSpec& grid) {
    const int k = static_cast<int>(path.size());
    if (k < 1 || k >= n) throw DomainError("conditional oracle needs 1 <= k < n");
    double head = 0.0, s = 0.0;
    for (double y : path) {
        head += tilted_logpdf(model, tilt, y);
        s += y;
    }
    return head + sum_density_by_convolution(model, n - k, u_sum - s, tilt, grid).log_value -
           sum_density_by_convolution(model, n, u_sum, tilt, grid).log_value;
}

double log_gamma_q(double s, double x) {
    if (!(s > 0.0)) throw DomainError("log_gamma_q needs s > 0");
    if (x <= 0.0) return 0.0;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    const double log_prefix = -x + s * std::log(x) - std::lgamma(s);
    if (x < s + 1.0) {
        double ap = s, del = 1.0 / s, sum = del;
        for (int i = 0; i < 100000; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * eps) break;
        }
        const double p = std::exp(log_prefix) * sum;
        return std::log1p(-p);
    }
    // Modified Lentz evaluation of the continued fraction for Q.
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return log_prefix + std::log(h);
}

double gamma_tail_exact(int n, double a) { return log_gamma_q(n, n * (1.0 + a)); }

double normal_tail_exact(int n, double a) { return log_std_norm_cdf(-std::sqrt(static_cast<double>(n)) * a); }

double exponential_level_for_probability(int n, double probability) {
    if (!(probability > 0.0 && probability < 1.0)) throw DomainError("probability must lie in (0, 1)");
    const double target = std::log(probability);
    if (gamma_tail_exact(n, 0.0) <= target) throw RangeError("probability is not reachable with a > 0");
    double lo = 0.0, hi = 1.0;
    while (gamma_tail_exact(n, hi) > target) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gamma_tail_exact(n, mid) > target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double normal_level_for_probability(int n, double probability) {
    if (!(probability > 0.0 && probability < 1.0)) throw DomainError("probability must lie in (0, 1)");
    return -std_norm_quantile(probability) / std::sqrt(static_cast<double>(n));
}

std::vector<double> rejection_exceedance_means(const Model& model, int n, double a, int count, RngStream& rng,
                                               long max_draws) {
    std::vector<double> out;
    out.reserve(count);
    const double threshold = n * a;
    for (long draw = 0; static_cast<int>(out.size()) < count; ++draw) {
        if (draw >= max_draws) throw RangeError("rejection oracle exhausted its draw budget");
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += model.u(model.sample_base(rng));
        if (s > threshold) out.push_back(s / n);
    }
    return out;
}

std::vector<double> sample_exponential_exceedance(double a, int n, RngStream& rng) {
    // Total T = S_n + n is Gamma(n, 1) conditioned on T > x0.
    const double x0 = n * (1.0 + a);
    double total;
    if (x0 <= n - 1.0) {
        do total = rng.gamma(n);
        while (!(total > x0));
    } else {
        // Shifted exponential envelope with rate 1 - (n - 1) / x0 dominates the tail.
        const double rate = 1.0 - (n - 1.0) / x0;
        for (;;) {
            const double y = x0 + rng.exponential() / rate;
            const double log_ratio = (n - 1.0) * std::log(y / x0) - (1.0 - rate) * (y - x0);
            if (std::log(rng.uniform()) <= log_ratio) {
                total = y;
                break;
            }
        }
    }
    std::vector<double> e(n);
    for (double& v : e) v = rng.exponential();
    const double sum = pairwise_sum(e);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = total * e[i] / sum - 1.0;
    return x;
}

double exponential_exceedance_logpdf(double a, int n, std::span<const double> x) {
    if (static_cast<int>(x.size()) != n) throw DomainError("exceedance oracle needs the full sample");
    double total = 0.0;
    for (double v : x) {
        if (!(v > -1.0)) return -kInf;
        total += v + 1.0;
    }
    if (!(total > n * (1.0 + a))) return -kInf;
    return -total - gamma_tail_exact(n, a);
}

}  // namespace longrun::oracle
