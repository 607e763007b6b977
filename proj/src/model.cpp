#include "longrun/model.hpp"

#include "longrun/errors.hpp"
#include "longrun/special.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace longrun {

double Model::sample_tilted(double, RngStream&) const {
    throw Error("model '" + name() + "' has no exact tilted sampler");
}

std::vector<double> Model::quadrature_breakpoints(double t) const {
    if (!u_is_identity()) return {};
    const Interval xs = x_support();
    const double m = cgf_d1(t);
    const double s = std::sqrt(cgf_d2(t));
    std::vector<double> cuts;
    for (double z : {-8.0, -3.0, 0.0, 3.0, 8.0, 20.0}) {
        const double x = m + z * s;
        if (xs.contains(x)) cuts.push_back(x);
    }
    return cuts;
}

double StandardNormalModel::base_logpdf(double x) const { return std_norm_logpdf(x); }

double StandardNormalModel::log_pdf_sup() const { return -kLogSqrt2Pi; }

std::optional<double> StandardNormalModel::log_modulated_mass(double mean, double var) const {
    return norm_logpdf(mean, 0.0, 1.0 + var);
}

double CenteredExponentialModel::base_logpdf(double x) const {
    return x > -1.0 ? -(x + 1.0) : -kInf;
}

double CenteredExponentialModel::cgf(double t) const { return -t - std::log1p(-t); }
double CenteredExponentialModel::cgf_d1(double t) const { return t / (1.0 - t); }
double CenteredExponentialModel::cgf_d2(double t) const {
    const double r = 1.0 / (1.0 - t);
    return r * r;
}
double CenteredExponentialModel::cgf_d3(double t) const { return 2.0 * std::pow(1.0 - t, -3.0); }
double CenteredExponentialModel::cgf_d4(double t) const { return 6.0 * std::pow(1.0 - t, -4.0); }

double CenteredExponentialModel::sample_tilted(double t, RngStream& rng) const {
    return rng.exponential() / (1.0 - t) - 1.0;
}

std::optional<double> CenteredExponentialModel::log_modulated_mass(double mean, double var) const {
    // Substituting y = x + 1 turns the integral into an exponential-normal convolution.
    const double shifted = mean + 1.0;
    return -shifted + 0.5 * var + log_std_norm_cdf((shifted - var) / std::sqrt(var));
}

GammaModel::GammaModel(double shape, double scale) : shape_(shape), scale_(scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw DomainError("Gamma model needs positive shape and scale");
    log_norm_ = -std::lgamma(shape_) - shape_ * std::log(scale_);
}

double GammaModel::base_logpdf(double x) const {
    if (!(x > 0.0)) return -kInf;
    return log_norm_ + (shape_ - 1.0) * std::log(x) - x / scale_;
}

double GammaModel::cgf(double t) const { return -shape_ * std::log1p(-scale_ * t); }
double GammaModel::cgf_d1(double t) const { return shape_ * scale_ / (1.0 - scale_ * t); }
double GammaModel::cgf_d2(double t) const { return shape_ * std::pow(scale_ / (1.0 - scale_ * t), 2.0); }
double GammaModel::cgf_d3(double t) const {
    return 2.0 * shape_ * std::pow(scale_ / (1.0 - scale_ * t), 3.0);
}
double GammaModel::cgf_d4(double t) const {
    return 6.0 * shape_ * std::pow(scale_ / (1.0 - scale_ * t), 4.0);
}

double GammaModel::sample_tilted(double t, RngStream& rng) const {
    return scale_ / (1.0 - scale_ * t) * rng.gamma(shape_);
}

double GammaModel::log_pdf_sup() const {
    if (shape_ < 1.0) return kInf;
    if (shape_ == 1.0) return log_norm_;
    return base_logpdf((shape_ - 1.0) * scale_);
}

double NormalSquareModel::base_logpdf(double x) const { return std_norm_logpdf(x); }

double NormalSquareModel::cgf(double t) const { return -0.5 * std::log1p(-2.0 * t); }
double NormalSquareModel::cgf_d1(double t) const { return 1.0 / (1.0 - 2.0 * t); }
double NormalSquareModel::cgf_d2(double t) const { return 2.0 * std::pow(1.0 - 2.0 * t, -2.0); }
double NormalSquareModel::cgf_d3(double t) const { return 8.0 * std::pow(1.0 - 2.0 * t, -3.0); }
double NormalSquareModel::cgf_d4(double t) const { return 48.0 * std::pow(1.0 - 2.0 * t, -4.0); }

double NormalSquareModel::sample_tilted(double t, RngStream& rng) const {
    return std::sqrt(cgf_d1(t)) * rng.normal();
}

double NormalSquareModel::log_pdf_sup() const { return -kLogSqrt2Pi; }

std::vector<double> NormalSquareModel::quadrature_breakpoints(double t) const {
    const double sd = std::sqrt(cgf_d1(t));
    return {-20.0 * sd, -8.0 * sd, -3.0 * sd, 0.0, 3.0 * sd, 8.0 * sd, 20.0 * sd};
}

CumulantProfile cumulants_at(const Model& model, double t) {
    if (!model.t_domain().contains(t)) {
        std::ostringstream msg;
        msg << "tilt " << t << " outside the domain of model '" << model.name() << "'";
        throw DomainError(msg.str());
    }
    return {t, model.cgf_d1(t), model.cgf_d2(t), model.cgf_d3(t), model.cgf_d4(t)};
}

double solve_tilt(const Model& model, double alpha, const TiltSolveOptions& options) {
    const Interval dom = model.t_domain();
    const Interval us = model.u_support();
    if (!std::isfinite(alpha) || !us.contains(alpha)) {
        std::ostringstream msg;
        msg << "mean " << alpha << " is not attainable by model '" << model.name() << "'";
        throw RangeError(msg.str());
    }
    const double tol = options.tol * std::max(1.0, std::abs(alpha));
    double t = options.start.value_or(0.0);
    if (!dom.contains(t)) t = 0.0;

    double f = model.cgf_d1(t) - alpha;
    if (std::abs(f) <= tol) return t;

    // Expand a bracket from the start point toward the domain edge on the side of the root.
    double lo = t, hi = t;
    double step = std::max(1.0, std::abs(f) / model.cgf_d2(t));
    const bool go_up = f < 0.0;
    for (int it = 0;; ++it) {
        double next;
        if (go_up) {
            next = std::isfinite(dom.hi) ? std::min(hi + step, 0.5 * (hi + dom.hi)) : hi + step;
        } else {
            next = std::isfinite(dom.lo) ? std::max(lo - step, 0.5 * (lo + dom.lo)) : lo - step;
        }
        if (!dom.contains(next) || next == (go_up ? hi : lo) || it > 2000) {
            std::ostringstream msg;
            msg << "mean " << alpha << " could not be bracketed for model '" << model.name() << "'";
            throw RangeError(msg.str());
        }
        const double fn = model.cgf_d1(next) - alpha;
        if (go_up) {
            if (fn >= 0.0) {
                lo = hi;
                hi = next;
                break;
            }
            hi = next;
        } else {
            if (fn <= 0.0) {
                hi = lo;
                lo = next;
                break;
            }
            lo = next;
        }
        step *= 2.0;
    }

    t = 0.5 * (lo + hi);
    for (int it = 0; it < options.max_iterations; ++it) {
        f = model.cgf_d1(t) - alpha;
        if (std::abs(f) <= tol) return t;
        if (f < 0.0) lo = t;
        else hi = t;
        double next = t - f / model.cgf_d2(t);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == t) return t;
        t = next;
    }
    throw NoConvergence("tilt equation did not converge", lo, hi);
}

double tilted_logpdf(const Model& model, double t, double x) {
    if (!model.t_domain().contains(t)) {
        std::ostringstream msg;
        msg << "tilt " << t << " outside the domain of model '" << model.name() << "'";
        throw DomainError(msg.str());
    }
    const double lp = model.base_logpdf(x);
    if (lp == -kInf) return lp;
    return lp + t * model.u(x) - model.cgf(t);
}

double hermite(int order, double x) {
    const double x2 = x * x;
    switch (order) {
        case 3: return x * (x2 - 3.0);
        case 4: return x2 * x2 + 6.0 * x2 - 3.0;
        case 6: return ((x2 - 15.0) * x2 + 45.0) * x2 - 15.0;
        default: throw DomainError("hermite: order must be 3, 4 or 6");
    }
}

std::vector<double> interior_tilt_grid(const Model& model, int points, double span) {
    const Interval dom = model.t_domain();
    double lo = std::isfinite(dom.lo) ? dom.lo : -span;
    double hi = std::isfinite(dom.hi) ? dom.hi : span;
    lo = std::max(lo, -span);
    hi = std::min(hi, span);
    const double margin = 0.1 * (hi - lo);
    if (std::isfinite(dom.lo) && lo == dom.lo) lo += margin;
    if (std::isfinite(dom.hi) && hi == dom.hi) hi -= margin;
    std::vector<double> grid(points);
    for (int j = 0; j < points; ++j) {
        grid[j] = points == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * j / (points - 1.0);
    }
    return grid;
}

ModelCheck validate_model(const Model& model, int grid_points) {
    ModelCheck check;
    auto fail = [&check](std::string what) {
        check.ok = false;
        check.problems.push_back(std::move(what));
    };
    if (!model.t_domain().contains(0.0)) fail("t_domain does not contain 0");
    else if (model.cgf(0.0) != 0.0) fail("cgf(0) is not 0");
    double prev = -kInf;
    for (double t : interior_tilt_grid(model, grid_points)) {
        const double s2 = model.cgf_d2(t);
        const double m = model.cgf_d1(t);
        if (!(s2 > 0.0)) fail("cgf'' not positive at t=" + std::to_string(t));
        if (!(m > prev)) fail("cgf' not increasing at t=" + std::to_string(t));
        prev = m;
    }
    return check;
}

}  // namespace longrun
