#include "longrun/custom_model.hpp"

#include "longrun/errors.hpp"

#include <algorithm>
#include <cmath>

namespace longrun {

TabulatedSampler::TabulatedSampler(std::function<double(double)> logpdf, double lo, double hi, int cells)
    : logpdf_(std::move(logpdf)), lo_(lo), width_((hi - lo) / cells), log_bound_(cells), cumulative_(cells) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && hi > lo) || cells < 1) {
        throw ConfigError("tabulated sampler needs a finite, nonempty range");
    }
    const double log_safety = std::log(1.05);
    double prev = logpdf_(lo_);
    for (int j = 0; j < cells; ++j) {
        const double left = lo_ + j * width_;
        const double mid = logpdf_(left + 0.5 * width_);
        const double right = logpdf_(left + width_);
        log_bound_[j] = std::max({prev, mid, right}) + log_safety;
        prev = right;
    }
    log_sup_ = *std::max_element(log_bound_.begin(), log_bound_.end());
    if (!std::isfinite(log_sup_)) throw ConfigError("tabulated density is not finite on its range");
    double acc = 0.0;
    for (int j = 0; j < cells; ++j) {
        acc += std::exp(log_bound_[j] - log_sup_);
        cumulative_[j] = acc;
    }
}

double TabulatedSampler::sample(RngStream& rng) const {
    const double total = cumulative_.back();
    for (;;) {
        const double r = rng.uniform() * total;
        const auto cell = static_cast<std::size_t>(
            std::lower_bound(cumulative_.begin(), cumulative_.end(), r) - cumulative_.begin());
        const std::size_t j = std::min(cell, cumulative_.size() - 1);
        const double x = lo_ + (static_cast<double>(j) + rng.uniform()) * width_;
        const double lp = logpdf_(x);
        if (lp > log_bound_[j]) throw EnvelopeViolation("tabulated envelope below the density");
        if (std::log(rng.uniform()) <= lp - log_bound_[j]) return x;
    }
}

namespace {

Interval pick_range(const CustomModelSpec& spec) {
    if (spec.sample_range) return *spec.sample_range;
    if (std::isfinite(spec.x_support.lo) && std::isfinite(spec.x_support.hi)) return spec.x_support;
    throw ConfigError("custom model '" + spec.name + "' needs a finite sample_range");
}

}  // namespace

CustomModel::CustomModel(const CustomModelSpec& spec)
    : spec_(spec),
      identity_(spec.u.empty()),
      logpdf_(spec.base_logpdf, "x", spec.parameters),
      u_(spec.u.empty() ? std::string("x") : spec.u, "x", spec.parameters),
      cgf_(spec.cgf, "t", spec.parameters),
      range_(pick_range(spec)) {
    const std::string* ds[4] = {&spec.cgf_d1, &spec.cgf_d2, &spec.cgf_d3, &spec.cgf_d4};
    for (int j = 0; j < 4; ++j) {
        if (!ds[j]->empty()) d_[j].emplace(*ds[j], "t", spec.parameters);
    }
    if (!spec_.t_domain.contains(0.0)) throw ConfigError("custom model t_domain must contain 0");
    base_sampler_.emplace([this](double x) { return base_logpdf(x); }, range_.lo, range_.hi);
}

double CustomModel::base_logpdf(double x) const {
    if (!spec_.x_support.contains(x)) return -kInf;
    const double v = logpdf_(x);
    return std::isnan(v) ? -kInf : v;
}

double CustomModel::derivative(int order, double t) const {
    if (d_[order - 1]) return (*d_[order - 1])(t);
    const Interval dom = spec_.t_domain;
    double h = 1e-4 * std::max(1.0, std::abs(t));
    if (std::isfinite(dom.hi)) h = std::min(h, 0.25 * (dom.hi - t));
    if (std::isfinite(dom.lo)) h = std::min(h, 0.25 * (t - dom.lo));
    auto lower = [this, order](double s) { return order == 1 ? cgf_(s) : derivative(order - 1, s); };
    return (lower(t + h) - lower(t - h)) / (2.0 * h);
}

double CustomModel::cgf_d1(double t) const { return derivative(1, t); }
double CustomModel::cgf_d2(double t) const { return derivative(2, t); }
double CustomModel::cgf_d3(double t) const { return derivative(3, t); }
double CustomModel::cgf_d4(double t) const { return derivative(4, t); }

double CustomModel::sample_tilted(double t, RngStream& rng) const {
    const double c = cgf(t);
    TabulatedSampler tilted([this, t, c](double x) { return base_logpdf(x) + t * u(x) - c; }, range_.lo,
                            range_.hi);
    return tilted.sample(rng);
}

}  // namespace longrun
