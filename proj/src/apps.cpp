#include "longrun/apps.hpp"

#include "longrun/errors.hpp"
#include "longrun/parallel.hpp"
#include "longrun/special.hpp"

#include <algorithm>
#include <cmath>

namespace longrun {

namespace {

struct ISTerm {
    bool aborted = false;
    bool hit = false;
    double log_w = -kInf;
};

double sample_variance(const std::vector<double>& v) {
    const double L = static_cast<double>(v.size());
    if (v.size() < 2) return 0.0;
    const double mean = pairwise_sum(v) / L;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    return pairwise_sum(sq) / (L - 1.0);
}

// Standard error of a sample variance, from the fourth central moment.
double variance_stderr(const std::vector<double>& v) {
    const double L = static_cast<double>(v.size());
    if (v.size() < 4) return kInf;
    const double mean = pairwise_sum(v) / L;
    std::vector<double> m2(v.size()), m4(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = (v[i] - mean) * (v[i] - mean);
        m2[i] = d;
        m4[i] = d * d;
    }
    const double s2 = pairwise_sum(m2) / L;
    const double k4 = pairwise_sum(m4) / L;
    return std::sqrt(std::max(0.0, k4 - s2 * s2 * (L - 3.0) / (L - 1.0)) / L);
}

}  // namespace

ISReport is_estimate(const Model& model, double a, int n, int k, int L, std::uint64_t seed,
                     const ISOptions& options) {
    if (n < 2) throw DomainError("is_estimate needs n >= 2");
    if (k < 0 || k >= n) throw DomainError("is_estimate needs 0 <= k < n");
    if (L < 1) throw DomainError("is_estimate needs L >= 1");
    if (!(a > model.cgf_d1(0.0))) throw DomainError("is_estimate needs a > m(0)");
    const double t = solve_tilt(model, a);
    const double lambda = n * t;
    const double c = options.c.value_or(20.0 / lambda);
    const ConditioningEvent event = ConditioningEvent::exceedance(a, n, c);
    const bool classical = k == 0 || (k == 1 && options.classical_k1);
    MixtureOptions mix{options.quad_points, options.approx};
    const double lcgf = model.cgf(t);

    std::vector<ISTerm> terms(L);
    parallel_for(static_cast<std::size_t>(L), options.workers, [&](std::size_t l) {
        RngStream rng(seed, l);
        ISTerm term;
        try {
            std::vector<double> x;
            x.reserve(n);
            double log_g = 0.0;
            if (!classical) {
                PathSample ps = sample_large_set_path(model, event, k, rng, options.approx, options.sampler);
                x = std::move(ps.values);
                log_g = eval_log_g_nA(model, event, x, mix);
            }
            while (static_cast<int>(x.size()) < n) x.push_back(sample_tilted_law(model, t, rng));
            double log_p = 0.0, usum = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double u = model.u(x[i]);
                usum += u;
                log_p += model.base_logpdf(x[i]);
                if (static_cast<int>(i) >= (classical ? 0 : k)) log_g += t * u - lcgf + model.base_logpdf(x[i]);
            }
            term.log_w = log_p - log_g;
            term.hit = usum > n * a;
        } catch (const RangeError&) {
            term.aborted = true;
        } catch (const IntegrationFailure&) {
            term.aborted = true;
        }
        terms[l] = term;
    });

    ISReport out;
    out.L = L;
    out.k = k;
    out.c = c;
    std::vector<double> z(L, 0.0), w;
    w.reserve(L);
    int hits = 0;
    for (int l = 0; l < L; ++l) {
        if (terms[l].aborted) {
            ++out.aborted;
            continue;
        }
        const double weight = std::exp(terms[l].log_w);
        w.push_back(weight);
        if (terms[l].hit) {
            ++hits;
            z[l] = weight;
        }
    }
    out.estimate = pairwise_sum(z) / L;
    out.stderr_ = std::sqrt(sample_variance(z) / L);
    out.hit_rate = static_cast<double>(hits) / L;
    if (!w.empty()) {
        const double mean = pairwise_sum(w) / w.size();
        out.importance_factor_stats.mean = mean;
        out.importance_factor_stats.cv = mean > 0.0 ? std::sqrt(sample_variance(w)) / mean : 0.0;
        out.importance_factor_stats.max = *std::max_element(w.begin(), w.end());
    }
    if (options.keep_terms) out.terms = std::move(z);
    return out;
}

std::vector<MSEPoint> mse_ratio_curve(const Model& model, double a, int n, const std::vector<int>& ks, int L,
                                      std::uint64_t seed, double exact_probability, const ISOptions& options) {
    ISOptions opts = options;
    opts.keep_terms = true;
    auto mse_of = [&](const ISReport& r) {
        std::vector<double> sq(r.terms.size());
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (r.terms[i] - exact_probability) * (r.terms[i] - exact_probability);
        return pairwise_sum(sq) / static_cast<double>(sq.size());
    };
    const double mse0 = mse_of(is_estimate(model, a, n, 0, L, seed, opts));
    std::vector<MSEPoint> out;
    for (int k : ks) {
        const ISReport r = is_estimate(model, a, n, k, L, seed, opts);
        MSEPoint p;
        p.k = k;
        p.estimate = r.estimate;
        p.stderr_ = r.stderr_;
        p.mse = mse_of(r) / L;
        p.ratio = mse_of(r) / mse0;
        p.reference = std::sqrt(static_cast<double>(n - k) / n);
        p.hit_rate = r.hit_rate;
        p.aborted = r.aborted;
        out.push_back(p);
    }
    return out;
}

RBReport rao_blackwell_gamma(double rho, double theta_T, int n, const std::vector<int>& k_grid, int L_outer,
                             int L_inner, std::uint64_t seed, const RBOptions& options) {
    if (!(rho > 0.0) || !(theta_T > 0.0)) throw DomainError("rao_blackwell_gamma needs rho > 0 and theta > 0");
    if (n < 2) throw DomainError("rao_blackwell_gamma needs n >= 2");
    if (L_outer < 2 || L_inner < 1) throw DomainError("rao_blackwell_gamma needs L_outer >= 2 and L_inner >= 1");
    for (int k : k_grid) {
        if (k < 1 || k > n) throw DomainError("k grid entries must lie in [1, n]");
    }
    std::vector<int> rb_ks = options.rb_ks;
    if (rb_ks.empty()) throw DomainError("rb_ks must not be empty");
    std::sort(rb_ks.begin(), rb_ks.end());
    int k_max = 0;
    for (int k : rb_ks) {
        if (k < 1 || k > n) throw DomainError("rb_ks entries must lie in [1, n]");
        if (k < n) k_max = std::max(k_max, k);
    }
    const GammaModel model(rho, theta_T);
    ApproxOptions approx = options.approx;
    approx.compute_normalizer = false;
    const std::size_t nk = k_grid.size(), nrb = rb_ks.size();

    std::vector<std::vector<double>> initial(nk, std::vector<double>(L_outer));
    std::vector<std::vector<double>> rb(nrb, std::vector<double>(L_outer));
    std::vector<std::vector<double>> within(nrb, std::vector<double>(L_outer));
    parallel_for(static_cast<std::size_t>(L_outer), options.workers, [&](std::size_t l) {
        RngStream rng(seed, l);
        std::vector<double> x(n);
        for (double& v : x) v = theta_T * rng.gamma(rho);
        std::vector<double> prefix(n + 1, 0.0);
        for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
        const double U = prefix[n];
        for (std::size_t j = 0; j < nk; ++j) initial[j][l] = prefix[k_grid[j]] / (k_grid[j] * rho);

        std::vector<std::vector<double>> draws(nrb, std::vector<double>(L_inner));
        if (k_max > 0) {
            const ConditioningEvent event = ConditioningEvent::point_sum(U / n, n);
            for (int j = 0; j < L_inner; ++j) {
                RngStream inner = rng.split(static_cast<std::uint64_t>(j));
                const PathSample ps = sample_path(model, event, k_max, inner, approx, options.sampler);
                double run = 0.0;
                int filled = 0;
                for (std::size_t r = 0; r < nrb; ++r) {
                    const int k = rb_ks[r];
                    if (k == n) continue;
                    for (; filled < k; ++filled) run += ps.values[filled];
                    draws[r][j] = run / (k * rho);
                }
            }
        }
        for (std::size_t r = 0; r < nrb; ++r) {
            if (rb_ks[r] == n) {
                rb[r][l] = U / (n * rho);
                within[r][l] = 0.0;
                continue;
            }
            rb[r][l] = pairwise_sum(draws[r]) / L_inner;
            within[r][l] = sample_variance(draws[r]);
        }
    });

    RBReport out;
    out.k_grid = k_grid;
    out.rb_ks = rb_ks;
    out.n = n;
    out.L_outer = L_outer;
    out.L_inner = L_inner;
    out.cr_bound = theta_T * theta_T / (n * rho);
    for (std::size_t j = 0; j < nk; ++j) {
        out.var_initial_by_k.push_back(sample_variance(initial[j]));
        out.var_initial_stderr.push_back(variance_stderr(initial[j]));
    }
    for (std::size_t r = 0; r < nrb; ++r) {
        const double v = sample_variance(rb[r]);
        out.var_rb_by_k.push_back(v);
        out.var_rb_stderr_by_k.push_back(variance_stderr(rb[r]));
        out.var_rb_corrected_by_k.push_back(v - pairwise_sum(within[r]) / L_outer / L_inner);
    }
    out.var_rb = out.var_rb_by_k.front();
    out.var_rb_stderr = out.var_rb_stderr_by_k.front();
    return out;
}

double ks_statistic(std::vector<double> values, const std::function<double(double)>& cdf) {
    if (values.empty()) throw DomainError("ks_statistic needs a nonempty sample");
    std::sort(values.begin(), values.end());
    const double N = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double F = cdf(values[i]);
        d = std::max({d, (i + 1) / N - F, F - i / N});
    }
    return d;
}

TiltedHistogram histogram_vs_tilted(const Model& model, double t, std::vector<double> values, int bins) {
    if (values.empty()) throw DomainError("histogram needs values");
    if (bins < 1) throw DomainError("histogram needs at least one bin");
    std::sort(values.begin(), values.end());
    const double lo = values.front(), hi = values.back();
    const double pad = hi > lo ? 1e-9 * (hi - lo) : 0.5;
    TiltedHistogram out;
    out.count = static_cast<long>(values.size());
    const double left = lo - pad, right = hi + pad, width = (right - left) / bins;
    for (int b = 0; b <= bins; ++b) out.edges.push_back(left + b * width);
    out.counts.assign(bins, 0);
    for (double v : values) {
        const int b = std::min(bins - 1, static_cast<int>((v - left) / width));
        ++out.counts[b];
    }
    auto density = [&](double x) {
        const double lp = tilted_logpdf(model, t, x);
        return lp == -kInf ? 0.0 : std::exp(lp);
    };
    for (int b = 0; b < bins; ++b) {
        out.density.push_back(out.counts[b] / (out.count * width));
        out.reference.push_back(density(left + (b + 0.5) * width));
    }

    // Distribution function on a fine grid over the sample range: the mass below
    // the range adaptively, then eight-point Gauss-Legendre cells.
    const int cells = 8192;
    const double h = (right - left) / cells;
    const Interval xs = model.x_support();
    std::vector<double> F(cells + 1);
    F[0] = left > xs.lo ? quad::integrate(density, xs.lo, left).value : 0.0;
    const auto& gl = quad::gauss_legendre(8);
    for (int c = 0; c < cells; ++c) {
        const double mid = left + (c + 0.5) * h;
        double mass = 0.0;
        for (std::size_t j = 0; j < gl.nodes.size(); ++j) mass += gl.weights[j] * density(mid + 0.5 * h * gl.nodes[j]);
        F[c + 1] = F[c] + 0.5 * h * mass;
    }
    auto cdf = [&](double x) {
        const double pos = std::clamp((x - left) / h, 0.0, static_cast<double>(cells));
        const int c = std::min(cells - 1, static_cast<int>(pos));
        return F[c] + (pos - c) * (F[c + 1] - F[c]);
    };
    out.ks = ks_statistic(values, cdf);
    out.ks_critical_1pct = ks_critical_1pct(static_cast<double>(out.count));
    return out;
}

}  // namespace longrun
