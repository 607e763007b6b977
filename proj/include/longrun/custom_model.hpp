#pragma once

#include "longrun/expression.hpp"
#include "longrun/model.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace longrun {

/// Rejection sampler for a log-density tabulated on a finite range: the envelope
/// is piecewise constant, set on each cell to 1.05 times the largest value seen
/// at the cell's endpoints and midpoint.
class TabulatedSampler {
public:
    TabulatedSampler(std::function<double(double)> logpdf, double lo, double hi, int cells = 4096);

    /// Throws EnvelopeViolation if a proposal exceeds its cell bound.
    double sample(RngStream& rng) const;
    double log_sup() const { return log_sup_; }

private:
    std::function<double(double)> logpdf_;
    double lo_, width_;
    std::vector<double> log_bound_;
    std::vector<double> cumulative_;
    double log_sup_;
};

/// Expressions and metadata for a user-defined model. base_logpdf and u take x;
/// the cgf and its derivatives take t. Missing derivative expressions default to
/// central finite differences of the previous order.
struct CustomModelSpec {
    std::string name = "custom";
    std::map<std::string, double> parameters;
    std::string base_logpdf;
    std::string u;  // empty means identity
    std::string cgf;
    std::string cgf_d1, cgf_d2, cgf_d3, cgf_d4;
    Interval t_domain;
    Interval u_support;
    Interval x_support;
    /// Finite range used to tabulate samplers; defaults to x_support when finite.
    std::optional<Interval> sample_range;
};

class CustomModel final : public Model {
public:
    explicit CustomModel(const CustomModelSpec& spec);
    CustomModel(const CustomModel&) = delete;
    CustomModel& operator=(const CustomModel&) = delete;

    std::string name() const override { return spec_.name; }
    double base_logpdf(double x) const override;
    double u(double x) const override { return identity_ ? x : u_(x); }
    bool u_is_identity() const override { return identity_; }
    double cgf(double t) const override { return cgf_(t); }
    double cgf_d1(double t) const override;
    double cgf_d2(double t) const override;
    double cgf_d3(double t) const override;
    double cgf_d4(double t) const override;
    Interval t_domain() const override { return spec_.t_domain; }
    Interval u_support() const override { return spec_.u_support; }
    Interval x_support() const override { return spec_.x_support; }
    double sample_base(RngStream& rng) const override { return base_sampler_->sample(rng); }
    /// Tabulates the tilted law on every call, so it is not offered as a proposal.
    double sample_tilted(double t, RngStream& rng) const override;
    double log_pdf_sup() const override { return base_sampler_->log_sup(); }

private:
    double derivative(int order, double t) const;

    CustomModelSpec spec_;
    bool identity_;
    Expression logpdf_, u_, cgf_;
    std::optional<Expression> d_[4];
    Interval range_;
    std::optional<TabulatedSampler> base_sampler_;
};

}  // namespace longrun
