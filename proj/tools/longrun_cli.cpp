#include "longrun/apps.hpp"
#include "longrun/config.hpp"
#include "longrun/errors.hpp"
#include "longrun/large_set.hpp"
#include "longrun/oracles.hpp"
#include "longrun/report.hpp"
#include "longrun/run_length.hpp"
#include "longrun/sampler.hpp"
#include "longrun/special.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

using namespace longrun;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitAborts = 4;
constexpr double kAbortLimit = 0.01;

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;
    bool trace = false;
    std::optional<int> k_step;
};

struct Context {
    RunConfig cfg;
    std::unique_ptr<Model> model;

    std::string path(const std::string& file) const {
        return (std::filesystem::path(cfg.output.directory) / file).string();
    }
    void write_csv(const std::string& file, const CsvTable& table) const {
        if (cfg.wants("csv")) write_file_atomic(path(file), table.str());
    }
    void write_json(const std::string& file, json doc) const {
        if (!cfg.wants("json")) return;
        doc["config"] = cfg.to_json();
        longrun::write_json(path(file), doc);
    }
};

Context load(const Overrides& o) {
    Context ctx;
    ctx.cfg = load_config(o.config);
    if (o.seed) {
        ctx.cfg.run.seed = *o.seed;
        ctx.cfg.seed_generated = false;
    }
    if (o.workers) {
        if (*o.workers < 1) throw ConfigError("--workers must be positive");
        ctx.cfg.run.workers = *o.workers;
    }
    if (o.out) ctx.cfg.output.directory = *o.out;
    if (o.trace) ctx.cfg.run.trace = true;
    if (o.k_step) {
        if (*o.k_step < 1) throw ConfigError("--k-step must be positive");
        ctx.cfg.run.k_step = *o.k_step;
    }
    if (ctx.cfg.seed_generated) std::cerr << "seed: " << ctx.cfg.seed() << " (generated)\n";
    ctx.model = make_model(ctx.cfg.model);
    ensure_directory(ctx.cfg.output.directory);
    return ctx;
}

std::function<double(std::span<const double>)> oracle_for(const Model& model, const ConditioningEvent& e) {
    if (model.name() == "exponential") {
        return [a = e.a, n = e.n](std::span<const double> y) {
            try {
                return oracle::exponential_conditional_logpdf(a, n, y);
            } catch (const SupportError&) {
                return -kInf;
            }
        };
    }
    if (model.name() == "normal") {
        return [a = e.a, n = e.n](std::span<const double> y) { return oracle::gaussian_conditional_logpdf(a, n, y); };
    }
    throw ConfigError("run.oracle needs the exponential or the normal model");
}

std::optional<double> exact_log_tail(const Model& model, int n, double a) {
    if (model.name() == "exponential") return oracle::gamma_tail_exact(n, a);
    if (model.name() == "normal") return oracle::normal_tail_exact(n, a);
    return std::nullopt;
}

CsvTable trace_table(const std::vector<StepState>& trace, std::span<const double> path) {
    CsvTable t{{"i", "y", "running_u_sum", "m_i", "t_i", "s2", "mu3", "alpha", "beta", "center", "log_C", "tilted"}, {}};
    for (std::size_t j = 0; j < trace.size(); ++j) {
        const StepState& s = trace[j];
        t.add_row({csv_cell(s.i), csv_cell(path[j]), csv_cell(s.running_u_sum), csv_cell(s.m_i), csv_cell(s.t_i),
                   csv_cell(s.profile.s2), csv_cell(s.profile.mu3), csv_cell(s.alpha), csv_cell(s.beta),
                   csv_cell(s.center), csv_cell(s.log_C), csv_cell(s.tilted)});
    }
    return t;
}

int cmd_simulate(const Context& ctx) {
    const Model& model = *ctx.model;
    const RunBlock& run = ctx.cfg.run;
    const ConditioningEvent event = make_event(model, ctx.cfg.event);
    const int k = run.k.value_or(event.n - 1);
    const ApproxOptions approx = approx_options(run);
    const SamplerOptions sopts = sampler_options(run);
    const double t_ref = solve_tilt(model, event.a);

    CsvTable paths{{"path", "i", "y", "u"}, {}};
    CsvTable scores{{"path", "log_g", "level", "proposals", "resamples"}, {}};
    std::vector<double> pooled;
    int aborted = 0;
    std::optional<PathSample> first;
    for (int p = 0; p < run.paths; ++p) {
        RngStream rng(ctx.cfg.seed(), static_cast<std::uint64_t>(p));
        PathSample ps;
        try {
            ps = event.kind == EventKind::ExceedanceSet ? sample_large_set_path(model, event, k, rng, approx, sopts)
                                                        : sample_path(model, event, k, rng, approx, sopts);
        } catch (const RangeError& e) {
            ++aborted;
            std::cerr << "path " << p << " aborted: " << e.what() << "\n";
            continue;
        }
        for (int i = 0; i < k; ++i) {
            paths.add_row({csv_cell(p), csv_cell(i + 1), csv_cell(ps.values[i]), csv_cell(model.u(ps.values[i]))});
            pooled.push_back(ps.values[i]);
        }
        scores.add_row({csv_cell(p), csv_cell(ps.log_g), csv_cell(ps.randomized_level.value_or(event.a)),
                        csv_cell(static_cast<long long>(ps.proposals)), csv_cell(ps.resamples)});
        if (!first) first = ps;
    }
    ctx.write_csv("paths.csv", paths);
    ctx.write_csv("path_scores.csv", scores);
    if (run.trace && first) {
        const ConditioningEvent point =
            event.kind == EventKind::ExceedanceSet ? event.at_level(*first->randomized_level) : event;
        const LogG lg = eval_log_g(model, point, first->values, approx, true);
        ctx.write_csv("trace.csv", trace_table(lg.trace, first->values));
    }
    json summary{{"command", "simulate"}, {"seed", ctx.cfg.seed()}, {"k", k}, {"n", event.n},
                 {"a", event.a}, {"tilt_at_a", t_ref}, {"paths", run.paths}, {"aborted", aborted},
                 {"pooled_count", pooled.size()}};
    if (!pooled.empty()) {
        summary["pooled_mean"] = pairwise_sum(pooled) / static_cast<double>(pooled.size());
        const TiltedHistogram h = histogram_vs_tilted(model, t_ref, pooled, run.bins);
        json hist{{"edges", h.edges}, {"counts", h.counts}, {"density", h.density},
                  {"reference_density", h.reference}, {"reference", "tilted law at a"},
                  {"ks", h.ks}, {"ks_critical_1pct", h.ks_critical_1pct}, {"count", h.count}};
        ctx.write_json("histogram.json", hist);
        summary["ks"] = h.ks;
        summary["ks_critical_1pct"] = h.ks_critical_1pct;
    }
    ctx.write_json("summary.json", summary);
    return aborted > kAbortLimit * run.paths ? kExitAborts : 0;
}

CsvTable k_table(const std::vector<KRow>& rows) {
    CsvTable t{{"k", "ERE_bar", "VRE_bar", "VRE_raw", "CI_lo", "CI_hi", "L_used", "discarded", "mc_stderr", "winsorized"}, {}};
    for (const KRow& r : rows) {
        t.add_row({csv_cell(r.k), csv_cell(r.ERE_bar), csv_cell(r.VRE_bar), csv_cell(r.VRE_raw), csv_cell(r.CI_lo),
                   csv_cell(r.CI_hi), csv_cell(r.L_used), csv_cell(r.discarded), csv_cell(r.mc_stderr),
                   csv_cell(r.winsorized)});
    }
    return t;
}

int cmd_select_k(const Context& ctx) {
    const Model& model = *ctx.model;
    const RunBlock& run = ctx.cfg.run;
    if (!run.delta) throw ConfigError("select-k needs run.delta");
    const ConditioningEvent event = make_event(model, ctx.cfg.event);
    SelectOptions opts;
    opts.ab.sampling = run.sampling == "proposal" ? ABSampling::Proposal : ABSampling::Base;
    opts.ab.approx = approx_options(run);
    opts.ab.sampler = sampler_options(run);
    opts.ab.workers = run.workers;
    if (run.oracle) opts.ab.oracle_logp = oracle_for(model, event);
    opts.k_step = run.k_step;
    opts.full_table = run.full_table;
    KReport report;
    bool reached = true;
    try {
        report = select_k(model, event, *run.delta, run.L, run.k_grid, ctx.cfg.seed(), opts);
    } catch (const NotReached& e) {
        report = e.report;
        reached = false;
        std::cerr << e.what() << "\n";
    }
    ctx.write_csv("k_table.csv", k_table(report.rows));
    json rows = json::array();
    int discarded = 0, total = 0;
    for (const KRow& r : report.rows) {
        rows.push_back({{"k", r.k}, {"ERE_bar", r.ERE_bar}, {"VRE_bar", r.VRE_bar}, {"VRE_raw", r.VRE_raw},
                        {"CI_lo", r.CI_lo}, {"CI_hi", r.CI_hi}, {"L_used", r.L_used}, {"discarded", r.discarded},
                        {"mc_stderr", r.mc_stderr}, {"winsorized", r.winsorized}});
        discarded += r.discarded;
        total += r.L_used + r.discarded;
    }
    json doc{{"command", "select-k"}, {"seed", ctx.cfg.seed()}, {"n", event.n}, {"a", event.a},
             {"delta", report.delta}, {"L", report.L}, {"rows", rows}, {"reached", reached}};
    doc["k_delta"] = report.k_delta ? json(*report.k_delta) : json(nullptr);
    ctx.write_json("k_report.json", doc);
    return total > 0 && discarded > kAbortLimit * total ? kExitAborts : 0;
}

json is_json(const ISReport& r) {
    json j{{"estimate", r.estimate}, {"stderr", r.stderr_}, {"L", r.L}, {"k", r.k}, {"hit_rate", r.hit_rate},
           {"aborted", r.aborted}, {"c", r.c},
           {"importance_factor_stats",
            {{"mean", r.importance_factor_stats.mean}, {"cv", r.importance_factor_stats.cv},
             {"max", r.importance_factor_stats.max}}}};
    j["mse_vs_iid_ratio"] = r.mse_vs_iid_ratio ? json(*r.mse_vs_iid_ratio) : json(nullptr);
    return j;
}

int cmd_estimate_rare(const Context& ctx) {
    const Model& model = *ctx.model;
    const RunBlock& run = ctx.cfg.run;
    const double a = resolve_level(model, ctx.cfg.event);
    const int n = ctx.cfg.event.n;
    ISOptions opts;
    opts.approx = approx_options(run);
    opts.sampler = sampler_options(run);
    opts.quad_points = run.quad_points;
    opts.c = ctx.cfg.event.c;
    opts.workers = run.workers;
    const int k = run.k.value_or(0);
    ISReport report = is_estimate(model, a, n, k, run.L, ctx.cfg.seed(), opts);
    int aborted = report.aborted, total = report.L;
    json doc{{"command", "estimate-rare"}, {"seed", ctx.cfg.seed()}, {"n", n}, {"a", a}};
    const auto exact = exact_log_tail(model, n, a);
    if (exact) doc["exact_probability"] = std::exp(*exact);
    if (!run.ks.empty()) {
        if (!exact) throw ConfigError("the MSE ratio curve needs a model with an exact tail (exponential or normal)");
        const auto curve = mse_ratio_curve(model, a, n, run.ks, run.L, ctx.cfg.seed(), std::exp(*exact), opts);
        CsvTable t{{"k", "estimate", "stderr", "mse", "ratio", "reference", "hit_rate", "aborted"}, {}};
        json pts = json::array();
        for (const MSEPoint& p : curve) {
            t.add_row({csv_cell(p.k), csv_cell(p.estimate), csv_cell(p.stderr_), csv_cell(p.mse), csv_cell(p.ratio),
                       csv_cell(p.reference), csv_cell(p.hit_rate), csv_cell(p.aborted)});
            pts.push_back({{"k", p.k}, {"ratio", p.ratio}, {"reference", p.reference}, {"mse", p.mse}});
            if (p.k == k) report.mse_vs_iid_ratio = p.ratio;
            aborted += p.aborted;
            total += run.L;
        }
        ctx.write_csv("mse_curve.csv", t);
        doc["mse_curve"] = pts;
    }
    doc["report"] = is_json(report);
    ctx.write_json("is_report.json", doc);
    return aborted > kAbortLimit * total ? kExitAborts : 0;
}

int cmd_rao_blackwell(const Context& ctx) {
    const RunBlock& run = ctx.cfg.run;
    if (ctx.cfg.model.name != "gamma") throw ConfigError("rao-blackwell needs the gamma model");
    const auto* gamma = dynamic_cast<const GammaModel*>(ctx.model.get());
    const int n = ctx.cfg.event.n;
    std::vector<int> grid = run.k_grid;
    if (grid.empty()) {
        for (int k : {2, 5, 10, 20, 50}) {
            if (k <= n) grid.push_back(k);
        }
    }
    RBOptions opts;
    opts.approx = approx_options(run);
    opts.sampler = sampler_options(run);
    opts.rb_ks = run.rb_ks;
    opts.workers = run.workers;
    const RBReport r =
        rao_blackwell_gamma(gamma->shape(), gamma->scale(), n, grid, run.L_outer, run.L_inner, ctx.cfg.seed(), opts);
    CsvTable t{{"k", "var_initial", "var_initial_stderr", "theory", "cr_bound"}, {}};
    for (std::size_t j = 0; j < r.k_grid.size(); ++j) {
        const double theory = gamma->scale() * gamma->scale() / (r.k_grid[j] * gamma->shape());
        t.add_row({csv_cell(r.k_grid[j]), csv_cell(r.var_initial_by_k[j]), csv_cell(r.var_initial_stderr[j]),
                   csv_cell(theory), csv_cell(r.cr_bound)});
    }
    ctx.write_csv("rb_variance.csv", t);
    CsvTable trb{{"k", "var_rb", "var_rb_stderr", "var_rb_corrected", "cr_bound"}, {}};
    for (std::size_t j = 0; j < r.rb_ks.size(); ++j) {
        trb.add_row({csv_cell(r.rb_ks[j]), csv_cell(r.var_rb_by_k[j]), csv_cell(r.var_rb_stderr_by_k[j]),
                     csv_cell(r.var_rb_corrected_by_k[j]), csv_cell(r.cr_bound)});
    }
    ctx.write_csv("rb_rao_blackwell.csv", trb);
    json doc{{"command", "rao-blackwell"}, {"seed", ctx.cfg.seed()}, {"n", r.n}, {"L_outer", r.L_outer},
             {"L_inner", r.L_inner}, {"k_grid", r.k_grid}, {"var_initial_by_k", r.var_initial_by_k},
             {"var_initial_stderr", r.var_initial_stderr}, {"var_rb", r.var_rb}, {"var_rb_stderr", r.var_rb_stderr},
             {"rb_ks", r.rb_ks}, {"var_rb_by_k", r.var_rb_by_k}, {"var_rb_corrected_by_k", r.var_rb_corrected_by_k},
             {"cr_bound", r.cr_bound}};
    ctx.write_json("rb_report.json", doc);
    return 0;
}

int cmd_tail(const Context& ctx) {
    const Model& model = *ctx.model;
    const int n = ctx.cfg.event.n;
    const double a = resolve_level(model, ctx.cfg.event);
    const SetDescriptor set = ctx.cfg.event.c ? SetDescriptor::interval(a, a + *ctx.cfg.event.c)
                                              : SetDescriptor::half_line(a);
    json doc{{"command", "tail"}, {"n", n}, {"a", a}, {"tilt", solve_tilt(model, a)}, {"rate", rate(model, a)},
             {"log_tail_prob", log_tail_prob(model, n, a)},
             {"log_set_prob_dominating_point", log_set_prob(model, n, set, SetProbForm::DominatingPoint)},
             {"log_set_prob_saddle", log_set_prob(model, n, set, SetProbForm::Saddle)},
             {"default_truncation_width", default_truncation_width(model, n, a)}};
    if (const auto exact = exact_log_tail(model, n, a)) doc["log_tail_exact"] = *exact;
    const ConditionReport v = check_condition_V(model, a);
    doc["condition_V"] = {{"ok", v.ok}, {"values", v.values}, {"warnings", v.warnings}};
    ctx.write_json("tail.json", doc);
    return 0;
}

int cmd_oracle(const Context& ctx) {
    const Model& model = *ctx.model;
    const RunBlock& run = ctx.cfg.run;
    const int n = ctx.cfg.event.n;
    json doc{{"command", "oracle"}, {"n", n}, {"model", model.name()}};
    std::optional<double> a;
    if (ctx.cfg.event.a || ctx.cfg.event.u_sum || ctx.cfg.event.probability) a = resolve_level(model, ctx.cfg.event);
    if (a) {
        doc["a"] = *a;
        if (const auto exact = exact_log_tail(model, n, *a)) doc["log_tail_exact"] = *exact;
        if (!run.path.empty()) {
            const ConditioningEvent e = ConditioningEvent::point_sum(*a, n);
            doc["conditional_logpdf"] = json_number(oracle_for(model, e)(run.path));
        }
    }
    if (!run.points.empty()) {
        if (n > 8) throw ConfigError("grid convolution is limited to n <= 8");
        json dens = json::array();
        for (double u : run.points) {
            const oracle::OracleResult r = oracle::mean_density_by_convolution(model, n, u);
            dens.push_back({{"u", u}, {"log_value", r.log_value}, {"error_estimate", r.error_estimate},
                            {"grid_spacing", r.grid_spacing}, {"method", r.method}});
        }
        doc["mean_density"] = dens;
    }
    ctx.write_json("oracle.json", doc);
    return 0;
}

int cmd_density_eval(const Context& ctx) {
    const Model& model = *ctx.model;
    const RunBlock& run = ctx.cfg.run;
    if (run.path.empty()) throw ConfigError("density-eval needs run.path");
    const ConditioningEvent event = make_event(model, ctx.cfg.event);
    const ApproxOptions approx = approx_options(run);
    json doc{{"command", "density-eval"}, {"n", event.n}, {"a", event.a}, {"k", run.path.size()}};
    if (event.kind == EventKind::ExceedanceSet) {
        doc["log_g_nA"] = eval_log_g_nA(model, event, run.path, MixtureOptions{run.quad_points, approx});
    } else {
        const LogG lg = eval_log_g(model, event, run.path, approx, run.trace);
        doc["log_g"] = lg.log_g;
        if (run.trace) ctx.write_csv("trace.csv", trace_table(lg.trace, run.path));
        if (model.u_is_identity()) {
            const FirstOrder fo = eval_log_first_order(model, event.a, event.n, run.path);
            doc["log_first_order"] = fo.log_value;
            doc["first_order_clamped"] = fo.clamped;
        }
        if (model.name() == "exponential" || model.name() == "normal") {
            doc["log_oracle"] = json_number(oracle_for(model, event)(run.path));
        }
    }
    ctx.write_json("density.json", doc);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Long-run conditional sampling of random walks and rare-event estimation"};
    app.require_subcommand(1);
    Overrides o;
    std::uint64_t seed = 0;
    int workers = 0, k_step = 0;
    std::string out;
    struct Command {
        const char* name;
        const char* help;
        int (*run)(const Context&);
    };
    const Command commands[] = {
        {"simulate", "Sample conditioned paths, with a histogram against the tilted law", cmd_simulate},
        {"select-k", "Estimate the run length k_delta", cmd_select_k},
        {"estimate-rare", "Importance-sampling estimate of a tail probability", cmd_estimate_rare},
        {"rao-blackwell", "Rao-Blackwellization in the Gamma model", cmd_rao_blackwell},
        {"tail", "Saddlepoint tail and set probabilities", cmd_tail},
        {"oracle", "Exact and brute-force reference values", cmd_oracle},
        {"density-eval", "Evaluate the conditional density approximation on a path", cmd_density_eval},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const Command& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", o.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Override run.seed");
        sub->add_option("--workers", workers, "Override run.workers");
        sub->add_option("--out", out, "Override output.directory");
        sub->add_flag("--trace", o.trace, "Write per-step traces");
        sub->add_option("--k-step", k_step, "Linear k grid step for select-k");
        subs.emplace_back(sub, &c);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    for (auto& [sub, cmd] : subs) {
        if (!sub->parsed()) continue;
        if (sub->count("--seed")) o.seed = seed;
        if (sub->count("--workers")) o.workers = workers;
        if (sub->count("--out")) o.out = out;
        if (sub->count("--k-step")) o.k_step = k_step;
        try {
            return cmd->run(load(o));
        } catch (const ConfigError& e) {
            std::cerr << "configuration error: " << e.what() << "\n";
            return kExitConfig;
        } catch (const std::exception& e) {
            std::cerr << "numeric failure: " << e.what() << "\n";
            return kExitNumeric;
        }
    }
    return kExitConfig;
}
