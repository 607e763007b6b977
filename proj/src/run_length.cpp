#include "longrun/run_length.hpp"

#include "longrun/parallel.hpp"
#include "longrun/special.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace longrun {

double saddlepoint_mean_logpdf(const Model& model, int n, double u) {
    const double t = solve_tilt(model, u);
    return 0.5 * std::log(static_cast<double>(n)) + n * (model.cgf(t) - t * u) - 0.5 * std::log(model.cgf_d2(t)) -
           kLogSqrt2Pi;
}

double log_tilt_ratio(const Model& model, int count, double m_level) {
    const double t = solve_tilt(model, m_level);
    return count * (t * m_level - model.cgf(t));
}

namespace {

struct Replicate {
    bool ok = false;
    double log_A = 0.0;
    double log_B = 0.0;
};

// Caps values above the interpolated empirical quantile q; returns whether any changed.
bool winsorize(std::vector<double>& v, double q) {
    if (v.size() < 2 || q >= 1.0) return false;
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * (sorted.size() - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double cap =
        sorted[lo] == -kInf ? sorted[hi] : sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
    bool changed = false;
    for (double& x : v) {
        if (x > cap) {
            x = cap;
            changed = true;
        }
    }
    return changed;
}

// Mean and standard error of exp(v), computed relative to the largest term.
void log_space_mean(const std::vector<double>& v, double& mean, double& stderr_) {
    const double peak = *std::max_element(v.begin(), v.end());
    std::vector<double> scaled(v.size()), squares(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        scaled[i] = std::exp(v[i] - peak);
        squares[i] = scaled[i] * scaled[i];
    }
    const double L = static_cast<double>(v.size());
    const double m = pairwise_sum(scaled) / L;
    const double var = L > 1 ? std::max(0.0, pairwise_sum(squares) / L - m * m) * L / (L - 1.0) : 0.0;
    mean = std::exp(peak) * m;
    stderr_ = std::exp(peak) * std::sqrt(var / L);
}

}  // namespace

ABEstimate estimate_AB(const Model& model, const ConditioningEvent& event, int k, int L, std::uint64_t seed,
                       const ABOptions& options) {
    ABEstimate out;
    if (k == 0) {
        out.used = L;
        return out;
    }
    if (L < 1) throw DomainError("estimate_AB needs L >= 1");
    if (k < 0 || k >= event.n) throw DomainError("estimate_AB needs 0 <= k < n");
    const int n = event.n;
    const double m0 = event.a;
    const double t0 = solve_tilt(model, m0);
    const double log_D = log_tilt_ratio(model, n, m0);
    const double log_s0 = 0.5 * std::log(model.cgf_d2(t0));
    const double log_dim = 0.5 * std::log(static_cast<double>(n) / (n - k));

    std::vector<Replicate> reps(L);
    parallel_for(static_cast<std::size_t>(L), options.workers, [&](std::size_t l) {
        RngStream rng(seed, l);
        Replicate r;
        try {
            std::vector<double> y;
            double log_g;
            if (options.sampling == ABSampling::Proposal) {
                PathSample ps = sample_path(model, event, k, rng, options.approx, options.sampler);
                y = std::move(ps.values);
                log_g = ps.log_g;
            } else {
                y.resize(k);
                for (double& v : y) v = model.sample_base(rng);
                log_g = eval_log_g(model, event, y, options.approx).log_g;
            }
            double log_px = 0.0, usum = 0.0;
            for (double v : y) {
                log_px += model.base_logpdf(v);
                usum += model.u(v);
            }
            double log_p;
            if (options.oracle_logp) {
                log_p = options.oracle_logp(y);
            } else {
                const double m_k = (event.u_sum() - usum) / (n - k);
                const double t_k = solve_tilt(model, m_k);
                const double log_N = (n - k) * (t_k * m_k - model.cgf(t_k));
                log_p = log_px + log_dim + log_D - log_N + log_s0 - 0.5 * std::log(model.cgf_d2(t_k));
            }
            if (std::isfinite(log_g) && std::isfinite(log_p)) {
                const double lr = log_g - log_p;
                if (options.sampling == ABSampling::Proposal) {
                    r.log_A = 2.0 * lr;
                    r.log_B = lr;
                } else {
                    r.log_A = 2.0 * lr + (log_g - log_px);
                    r.log_B = lr + (log_g - log_px);
                }
                r.ok = true;
            }
        } catch (const RangeError&) {
        } catch (const SupportError&) {
        }
        reps[l] = r;
    });

    // Under base sampling the estimators average over all L draws, and a path the
    // recursion cannot follow has g = 0, so it enters as a zero term.
    const bool keep_zeros = options.sampling == ABSampling::Base;
    std::vector<double> la, lb;
    for (const Replicate& r : reps) {
        if (!r.ok) {
            ++out.discarded;
            if (!keep_zeros) continue;
            la.push_back(-kInf);
            lb.push_back(-kInf);
            continue;
        }
        la.push_back(r.log_A);
        lb.push_back(r.log_B);
    }
    out.used = L - out.discarded;
    if (out.used == 0) throw RangeError("every replicate path was discarded");
    out.winsorized = winsorize(la, options.winsor_quantile);
    out.winsorized = winsorize(lb, options.winsor_quantile) || out.winsorized;
    log_space_mean(la, out.A_hat, out.stderr_A);
    log_space_mean(lb, out.B_hat, out.stderr_B);
    return out;
}

KRow make_k_row(int k, const ABEstimate& est) {
    KRow row;
    row.k = k;
    row.ERE_bar = 1.0 - est.B_hat;
    row.VRE_raw = est.A_hat - est.B_hat * est.B_hat;
    row.VRE_bar = std::max(0.0, row.VRE_raw);
    const double half = 2.0 * std::sqrt(row.VRE_bar);
    row.CI_lo = row.ERE_bar - half;
    row.CI_hi = row.ERE_bar + half;
    row.L_used = est.used;
    row.discarded = est.discarded;
    row.mc_stderr = est.stderr_B;
    row.winsorized = est.winsorized;
    return row;
}

std::vector<int> default_k_grid(int n) {
    std::vector<int> grid;
    for (int k = 1; k < n; k *= 2) grid.push_back(k);
    if (grid.back() != n - 1) grid.push_back(n - 1);
    return grid;
}

KReport select_k(const Model& model, const ConditioningEvent& event, double delta, int L, std::vector<int> k_grid,
                 std::uint64_t seed, const SelectOptions& options) {
    if (!(delta > 0.0)) throw DomainError("select_k needs delta > 0");
    bool refine = false;
    if (k_grid.empty()) {
        if (options.k_step) {
            if (*options.k_step < 1) throw DomainError("k step must be positive");
            for (int k = *options.k_step; k < event.n; k += *options.k_step) k_grid.push_back(k);
        } else {
            k_grid = default_k_grid(event.n);
            refine = true;
        }
    }
    if (!std::is_sorted(k_grid.begin(), k_grid.end())) throw DomainError("k grid must be ascending");

    KReport report;
    report.delta = delta;
    report.L = L;
    std::map<int, KRow> table;
    auto evaluate = [&](int k) -> const KRow& {
        auto it = table.find(k);
        if (it == table.end()) it = table.emplace(k, make_k_row(k, estimate_AB(model, event, k, L, seed, options.ab))).first;
        return it->second;
    };
    auto contains = [delta](const KRow& r) { return r.CI_lo <= delta && delta <= r.CI_hi; };

    std::optional<int> found;
    int previous = 0;
    for (int k : k_grid) {
        const KRow& row = evaluate(k);
        if (contains(row) && !found) {
            found = k;
            if (refine && previous > 0) {
                int lo = previous, hi = k;
                while (hi - lo > 1) {
                    const int mid = lo + (hi - lo) / 2;
                    if (contains(evaluate(mid))) hi = mid;
                    else lo = mid;
                }
                found = hi;
            }
            if (!options.full_table) break;
        }
        previous = k;
    }
    for (auto& [k, row] : table) report.rows.push_back(row);
    report.k_delta = found;
    if (!found) throw NotReached("no k in the grid has delta inside its confidence band", report);
    return report;
}

}  // namespace longrun
