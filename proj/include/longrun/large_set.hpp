#pragma once

#include "longrun/cond_approx.hpp"
#include "longrun/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace longrun {

/// I_U(x) = x t - cgf(t) with m(t) = x.
double rate(const Model& model, double x);

/// log P(U_{1,n} / n > a) ~ -n I_U(a) - log(2 pi n) / 2 - log(t s(t)), m(t) = a > m(0).
double log_tail_prob(const Model& model, int n, double a);

struct SetDescriptor {
    enum class Kind { HalfLine, Interval } kind = Kind::HalfLine;
    double a = 0.0;
    double b = kInf;

    static SetDescriptor half_line(double a) { return {Kind::HalfLine, a, kInf}; }
    static SetDescriptor interval(double a, double b);
};

/// M(t) = t * integral over A - a of exp(-t y) dy.
double set_density_M(const SetDescriptor& set, double t);

/// log M_n(t) = log(M(n t) / t).
double log_set_density_Mn(const SetDescriptor& set, int n, double t);

enum class SetProbForm {
    /// Evaluated at the dominating point tilt m(t) = a with psi = n s^2(t); for a
    /// half-line this is log_tail_prob exactly.
    DominatingPoint,
    /// Evaluated at the root t_n of Psi_n'(t) = 0 with psi = Psi_n''(t_n).
    Saddle,
};

/// log P(U_{1,n} in n A) from n cgf(t) + log M_n(t) - n a t - log(2 pi psi) / 2.
double log_set_prob(const Model& model, int n, const SetDescriptor& set,
                    SetProbForm form = SetProbForm::DominatingPoint);

/// log density of the overshoot law n t exp(-n t (v - a)) on (a, inf), or its
/// truncation to (a, a + c). Throws DomainError outside the support.
double overshoot_logpdf(const Model& model, int n, double a, double v, std::optional<double> c = std::nullopt);

/// Width c with n m^{-1}(a) c = 20.
double default_truncation_width(const Model& model, int n, double a);

struct ConditionReport {
    bool ok = true;
    std::vector<std::string> warnings;
    std::vector<double> values;
};

/// Advisory check: warns when n c / (n - k) > 10 or n c < 10.
ConditionReport check_condition_C(int n, int k, double c);

/// sqrt(n) * integral over (a, inf) of V'(v) exp(-n m^{-1}(a) (v - a)) dv for each n in
/// `ns`, V(v) = s^2(m^{-1}(v)). Flags values that grow with n or are not finite.
ConditionReport check_condition_V(const Model& model, double a, const std::vector<int>& ns = {10, 100, 1000, 10000});

struct MixtureOptions {
    int quad_points = 32;
    ApproxOptions approx;
};

/// log g_nA(y_1..y_k): the overshoot-weighted mixture over v in (a, a + c) of the
/// point approximations g_{nv}, integrated with Gauss-Legendre nodes in v.
double eval_log_g_nA(const Model& model, const ConditioningEvent& event, std::span<const double> path,
                     const MixtureOptions& options = {});

}  // namespace longrun
