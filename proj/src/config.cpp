#include "longrun/config.hpp"

#include "longrun/errors.hpp"
#include "longrun/large_set.hpp"
#include "longrun/oracles.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>

namespace longrun {

using nlohmann::json;

namespace {

void reject_unknown(const json& block, const std::string& where, const std::set<std::string>& allowed) {
    if (!block.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (auto it = block.begin(); it != block.end(); ++it) {
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
T get(const json& block, const std::string& key, const std::string& where) {
    try {
        return block.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

template <class T>
void read(const json& block, const std::string& key, const std::string& where, T& out) {
    if (block.contains(key)) out = get<T>(block, key, where);
}

template <class T>
void read(const json& block, const std::string& key, const std::string& where, std::optional<T>& out) {
    if (block.contains(key) && !block.at(key).is_null()) out = get<T>(block, key, where);
}

double bound(const json& v, const std::string& where) {
    if (v.is_null()) throw ConfigError(where + ": bound must be a number or \"inf\"/\"-inf\"");
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
        throw ConfigError(where + ": cannot read bound '" + s + "'");
    }
    if (!v.is_number()) throw ConfigError(where + ": bound must be a number");
    return v.get<double>();
}

Interval interval(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(where + " must be a two-element array");
    Interval out{bound(v[0], where), bound(v[1], where)};
    if (!(out.lo < out.hi)) throw ConfigError(where + " must have lo < hi");
    return out;
}

json bound_json(double x) {
    if (x == kInf) return "inf";
    if (x == -kInf) return "-inf";
    return x;
}

CustomModelSpec parse_custom(const json& b) {
    const std::string where = "model.custom";
    reject_unknown(b, where,
                   {"base_logpdf", "u", "cgf", "cgf_d1", "cgf_d2", "cgf_d3", "cgf_d4", "t_domain", "u_support",
                    "x_support", "sample_range"});
    CustomModelSpec spec;
    for (const char* key : {"base_logpdf", "cgf", "t_domain", "u_support", "x_support"}) {
        if (!b.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
    }
    spec.base_logpdf = get<std::string>(b, "base_logpdf", where);
    spec.cgf = get<std::string>(b, "cgf", where);
    read(b, "u", where, spec.u);
    read(b, "cgf_d1", where, spec.cgf_d1);
    read(b, "cgf_d2", where, spec.cgf_d2);
    read(b, "cgf_d3", where, spec.cgf_d3);
    read(b, "cgf_d4", where, spec.cgf_d4);
    spec.t_domain = interval(b.at("t_domain"), where + ".t_domain");
    spec.u_support = interval(b.at("u_support"), where + ".u_support");
    spec.x_support = interval(b.at("x_support"), where + ".x_support");
    if (b.contains("sample_range")) spec.sample_range = interval(b.at("sample_range"), where + ".sample_range");
    return spec;
}

std::uint64_t generated_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

bool RunConfig::wants(const std::string& format) const {
    for (const auto& f : output.formats) {
        if (f == format) return true;
    }
    return false;
}

json RunConfig::to_json() const {
    json m{{"name", model.name}};
    if (!model.parameters.empty()) m["parameters"] = model.parameters;
    if (model.custom) {
        const CustomModelSpec& s = *model.custom;
        json c{{"base_logpdf", s.base_logpdf}, {"cgf", s.cgf}};
        if (!s.u.empty()) c["u"] = s.u;
        if (!s.cgf_d1.empty()) c["cgf_d1"] = s.cgf_d1;
        if (!s.cgf_d2.empty()) c["cgf_d2"] = s.cgf_d2;
        if (!s.cgf_d3.empty()) c["cgf_d3"] = s.cgf_d3;
        if (!s.cgf_d4.empty()) c["cgf_d4"] = s.cgf_d4;
        c["t_domain"] = {bound_json(s.t_domain.lo), bound_json(s.t_domain.hi)};
        c["u_support"] = {bound_json(s.u_support.lo), bound_json(s.u_support.hi)};
        c["x_support"] = {bound_json(s.x_support.lo), bound_json(s.x_support.hi)};
        if (s.sample_range) c["sample_range"] = {bound_json(s.sample_range->lo), bound_json(s.sample_range->hi)};
        m["custom"] = c;
    }
    json e{{"kind", event.kind}, {"n", event.n}};
    if (event.a) e["a"] = *event.a;
    if (event.u_sum) e["u_sum"] = *event.u_sum;
    if (event.probability) e["probability"] = *event.probability;
    if (event.c) e["c"] = *event.c;
    json r{{"L", run.L},
           {"center_shift", run.center_shift},
           {"envelope", run.envelope},
           {"normalizer", run.normalizer},
           {"sampling", run.sampling},
           {"full_table", run.full_table},
           {"oracle", run.oracle},
           {"trace", run.trace},
           {"paths", run.paths},
           {"bins", run.bins},
           {"quad_points", run.quad_points},
           {"L_outer", run.L_outer},
           {"L_inner", run.L_inner},
           {"rb_ks", run.rb_ks}};
    if (run.seed) r["seed"] = *run.seed;
    if (run.k) r["k"] = *run.k;
    if (!run.ks.empty()) r["ks"] = run.ks;
    if (run.delta) r["delta"] = *run.delta;
    if (run.k_step) r["k_step"] = *run.k_step;
    if (!run.k_grid.empty()) r["k_grid"] = run.k_grid;
    if (!run.path.empty()) r["path"] = run.path;
    if (!run.points.empty()) r["points"] = run.points;
    return json{{"model", m}, {"event", e}, {"run", r},
                {"output", {{"directory", output.directory}, {"formats", output.formats}}}};
}

RunConfig parse_config(const json& doc) {
    reject_unknown(doc, "configuration", {"$schema", "model", "event", "run", "output"});
    RunConfig cfg;
    if (!doc.contains("model")) throw ConfigError("configuration is missing the 'model' block");
    {
        const json& b = doc.at("model");
        reject_unknown(b, "model", {"name", "parameters", "custom"});
        read(b, "name", "model", cfg.model.name);
        if (b.contains("parameters")) {
            reject_unknown(b.at("parameters"), "model.parameters", {"shape", "scale"});
            cfg.model.parameters = get<std::map<std::string, double>>(b, "parameters", "model");
        }
        if (b.contains("custom")) cfg.model.custom = parse_custom(b.at("custom"));
        static const std::set<std::string> names{"normal", "exponential", "gamma", "normal_square", "custom"};
        if (!names.count(cfg.model.name)) throw ConfigError("unknown model '" + cfg.model.name + "'");
        if ((cfg.model.name == "custom") != cfg.model.custom.has_value()) {
            throw ConfigError("model.custom must be given exactly when model.name is 'custom'");
        }
    }
    if (doc.contains("event")) {
        const json& b = doc.at("event");
        reject_unknown(b, "event", {"kind", "a", "u_sum", "probability", "n", "c"});
        read(b, "kind", "event", cfg.event.kind);
        read(b, "a", "event", cfg.event.a);
        read(b, "u_sum", "event", cfg.event.u_sum);
        read(b, "probability", "event", cfg.event.probability);
        read(b, "n", "event", cfg.event.n);
        read(b, "c", "event", cfg.event.c);
        static const std::set<std::string> kinds{"point_sum", "point_functional", "exceedance"};
        if (!kinds.count(cfg.event.kind)) throw ConfigError("unknown event kind '" + cfg.event.kind + "'");
        const int given = cfg.event.a.has_value() + cfg.event.u_sum.has_value() + cfg.event.probability.has_value();
        if (given > 1) throw ConfigError("event takes exactly one of a, u_sum and probability");
        if (cfg.event.n < 2) throw ConfigError("event.n must be at least 2");
        if (cfg.event.probability && !(*cfg.event.probability > 0.0 && *cfg.event.probability < 0.5)) {
            throw ConfigError("event.probability must lie in (0, 0.5)");
        }
        if (cfg.event.c && !(*cfg.event.c > 0.0)) throw ConfigError("event.c must be positive");
    }
    if (doc.contains("run")) {
        const json& b = doc.at("run");
        reject_unknown(b, "run",
                       {"k", "ks", "delta", "L", "seed", "workers", "center_shift", "envelope", "normalizer",
                        "sampling", "k_step", "full_table", "oracle", "trace", "paths", "bins", "quad_points",
                        "L_outer", "L_inner", "k_grid", "rb_ks", "path", "points"});
        RunBlock& r = cfg.run;
        read(b, "k", "run", r.k);
        read(b, "ks", "run", r.ks);
        read(b, "delta", "run", r.delta);
        read(b, "L", "run", r.L);
        read(b, "seed", "run", r.seed);
        read(b, "workers", "run", r.workers);
        read(b, "center_shift", "run", r.center_shift);
        read(b, "envelope", "run", r.envelope);
        read(b, "normalizer", "run", r.normalizer);
        read(b, "sampling", "run", r.sampling);
        read(b, "k_step", "run", r.k_step);
        read(b, "full_table", "run", r.full_table);
        read(b, "oracle", "run", r.oracle);
        read(b, "trace", "run", r.trace);
        read(b, "paths", "run", r.paths);
        read(b, "bins", "run", r.bins);
        read(b, "quad_points", "run", r.quad_points);
        read(b, "L_outer", "run", r.L_outer);
        read(b, "L_inner", "run", r.L_inner);
        read(b, "k_grid", "run", r.k_grid);
        read(b, "rb_ks", "run", r.rb_ks);
        read(b, "path", "run", r.path);
        read(b, "points", "run", r.points);
        if (r.L < 1 || r.paths < 1 || r.bins < 1 || r.quad_points < 2) {
            throw ConfigError("run.L, run.paths, run.bins must be positive and run.quad_points at least 2");
        }
        if (r.workers < 1) throw ConfigError("run.workers must be positive");
        if (r.k_step && *r.k_step < 1) throw ConfigError("run.k_step must be positive");
        if (r.delta && !(*r.delta > 0.0)) throw ConfigError("run.delta must be positive");
        if (r.sampling != "base" && r.sampling != "proposal") throw ConfigError("run.sampling must be base or proposal");
        center_shift_from_string(r.center_shift);
        envelope_from_string(r.envelope);
        approx_options(r);
    }
    if (doc.contains("output")) {
        const json& b = doc.at("output");
        reject_unknown(b, "output", {"directory", "formats"});
        read(b, "directory", "output", cfg.output.directory);
        read(b, "formats", "output", cfg.output.formats);
        for (const auto& f : cfg.output.formats) {
            if (f != "csv" && f != "json") throw ConfigError("output format '" + f + "' is not csv or json");
        }
    }
    if (!cfg.run.seed) {
        cfg.run.seed = generated_seed();
        cfg.seed_generated = true;
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("configuration '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

std::unique_ptr<Model> make_model(const ModelConfig& config) {
    auto param = [&](const std::string& key, double fallback) {
        auto it = config.parameters.find(key);
        return it == config.parameters.end() ? fallback : it->second;
    };
    if (config.name == "normal") return std::make_unique<StandardNormalModel>();
    if (config.name == "exponential") return std::make_unique<CenteredExponentialModel>();
    if (config.name == "normal_square") return std::make_unique<NormalSquareModel>();
    if (config.name == "gamma") {
        const double shape = param("shape", 2.0), scale = param("scale", 1.0);
        if (!(shape > 0.0) || !(scale > 0.0)) throw ConfigError("gamma shape and scale must be positive");
        return std::make_unique<GammaModel>(shape, scale);
    }
    if (config.name == "custom" && config.custom) return std::make_unique<CustomModel>(*config.custom);
    throw ConfigError("unknown model '" + config.name + "'");
}

double saddlepoint_level_for_probability(const Model& model, int n, double probability) {
    const double target = std::log(probability);
    const double m0 = model.cgf_d1(0.0);
    const Interval us = model.u_support();
    double lo = m0, hi = m0 + std::sqrt(model.cgf_d2(0.0));
    auto f = [&](double a) { return log_tail_prob(model, n, a) - target; };
    for (int i = 0; i < 200 && f(hi) > 0.0; ++i) {
        lo = hi;
        hi = us.hi < kInf ? 0.5 * (hi + us.hi) : m0 + 2.0 * (hi - m0);
    }
    if (f(hi) > 0.0) throw RangeError("no level reaches the requested tail probability");
    for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        // log_tail_prob diverges at m(0), where the bracket starts.
        if (mid <= m0 || f(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double resolve_level(const Model& model, const EventConfig& event) {
    if (event.a) return *event.a;
    if (event.u_sum) return *event.u_sum / event.n;
    if (event.probability) {
        if (model.name() == "exponential") return oracle::exponential_level_for_probability(event.n, *event.probability);
        if (model.name() == "normal") return oracle::normal_level_for_probability(event.n, *event.probability);
        return saddlepoint_level_for_probability(model, event.n, *event.probability);
    }
    throw ConfigError("event needs one of a, u_sum or probability");
}

ConditioningEvent make_event(const Model& model, const EventConfig& event) {
    const double a = resolve_level(model, event);
    ConditioningEvent e;
    if (event.kind == "point_sum") e = ConditioningEvent::point_sum(a, event.n);
    else if (event.kind == "point_functional") e = ConditioningEvent::point_functional(a * event.n, event.n);
    else e = ConditioningEvent::exceedance(a, event.n, event.c);
    validate_event(model, e);
    return e;
}

ApproxOptions approx_options(const RunBlock& run) {
    ApproxOptions o;
    o.shift = center_shift_from_string(run.center_shift);
    if (run.normalizer == "auto") o.normalizer = NormalizerMethod::Auto;
    else if (run.normalizer == "quadrature") o.normalizer = NormalizerMethod::Quadrature;
    else if (run.normalizer == "monte_carlo") o.normalizer = NormalizerMethod::MonteCarlo;
    else throw ConfigError("unknown normalizer '" + run.normalizer + "' (expected auto, quadrature or monte_carlo)");
    return o;
}

SamplerOptions sampler_options(const RunBlock& run) {
    SamplerOptions o;
    o.envelope = envelope_from_string(run.envelope);
    return o;
}

}  // namespace longrun
