#include "longrun/apps.hpp"
#include "longrun/config.hpp"
#include "longrun/errors.hpp"
#include "longrun/large_set.hpp"
#include "longrun/oracles.hpp"
#include "longrun/run_length.hpp"
#include "longrun/sampler.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace longrun;

namespace {

std::shared_ptr<Model> model_from_json(const std::string& text) {
    nlohmann::json doc;
    doc["model"] = nlohmann::json::parse(text);
    doc["run"]["seed"] = 0;
    return make_model(parse_config(doc).model);
}

ApproxOptions approx(const std::string& shift) {
    ApproxOptions o;
    o.shift = center_shift_from_string(shift);
    return o;
}

ConditioningEvent point_event(const Model& model, double a, int n) {
    return model.u_is_identity() ? ConditioningEvent::point_sum(a, n) : ConditioningEvent::point_functional(a * n, n);
}

py::dict k_report_dict(const KReport& r) {
    py::list rows;
    for (const KRow& row : r.rows) {
        py::dict d;
        d["k"] = row.k;
        d["ERE"] = row.ERE_bar;
        d["VRE"] = row.VRE_bar;
        d["CI_lo"] = row.CI_lo;
        d["CI_hi"] = row.CI_hi;
        d["L_used"] = row.L_used;
        d["discarded"] = row.discarded;
        rows.append(d);
    }
    py::dict out;
    out["rows"] = rows;
    out["k_delta"] = r.k_delta ? py::cast(*r.k_delta) : py::none();
    out["delta"] = r.delta;
    return out;
}

}  // namespace

PYBIND11_MODULE(_longrun, m) {
    m.doc() = "Conditional random walk approximation, sampling and rare-event estimation";

    // Later registrations are tried first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<RangeError>(m, "RangeError", PyExc_ArithmeticError);

    py::class_<Model, std::shared_ptr<Model>>(m, "Model")
        .def_static("from_json", &model_from_json, py::arg("text"))
        .def_property_readonly("name", &Model::name)
        .def_property_readonly("u_is_identity", &Model::u_is_identity)
        .def("base_logpdf", &Model::base_logpdf)
        .def("u", &Model::u)
        .def("cgf", &Model::cgf)
        .def("cgf_d1", &Model::cgf_d1)
        .def("cgf_d2", &Model::cgf_d2)
        .def("solve_tilt", [](const Model& self, double m) { return solve_tilt(self, m); })
        .def("tilted_logpdf", [](const Model& self, double t, double x) { return tilted_logpdf(self, t, x); })
        .def("rate", [](const Model& self, double x) { return rate(self, x); });

    m.def(
        "eval_log_g",
        [](const Model& model, double a, int n, const std::vector<double>& path, const std::string& shift) {
            return eval_log_g(model, point_event(model, a, n), path, approx(shift)).log_g;
        },
        py::arg("model"), py::arg("a"), py::arg("n"), py::arg("path"), py::arg("center_shift") = "paper_m0");

    m.def(
        "sample_path",
        [](const Model& model, double a, int n, int k, std::uint64_t seed, std::uint64_t stream,
           const std::string& shift) {
            RngStream rng(seed, stream);
            const PathSample ps = sample_path(model, point_event(model, a, n), k, rng, approx(shift));
            py::dict d;
            d["values"] = ps.values;
            d["log_g"] = ps.log_g;
            d["proposals"] = ps.proposals;
            return d;
        },
        py::arg("model"), py::arg("a"), py::arg("n"), py::arg("k"), py::arg("seed"), py::arg("stream") = 0,
        py::arg("center_shift") = "paper_m0");

    m.def("log_tail_prob", &log_tail_prob, py::arg("model"), py::arg("n"), py::arg("a"));
    m.def("saddlepoint_mean_logpdf", &saddlepoint_mean_logpdf, py::arg("model"), py::arg("n"), py::arg("u"));
    m.def("log_tilt_ratio", &log_tilt_ratio, py::arg("model"), py::arg("count"), py::arg("m"));

    m.def(
        "is_estimate",
        [](const Model& model, double a, int n, int k, int L, std::uint64_t seed, int workers) {
            ISOptions o;
            o.workers = workers;
            const ISReport r = is_estimate(model, a, n, k, L, seed, o);
            py::dict d;
            d["estimate"] = r.estimate;
            d["stderr"] = r.stderr_;
            d["hit_rate"] = r.hit_rate;
            d["aborted"] = r.aborted;
            d["L"] = r.L;
            d["k"] = r.k;
            return d;
        },
        py::arg("model"), py::arg("a"), py::arg("n"), py::arg("k"), py::arg("L"), py::arg("seed"),
        py::arg("workers") = 1);

    m.def(
        "select_k",
        [](const Model& model, double a, int n, double delta, int L, std::vector<int> k_grid, std::uint64_t seed,
           bool full_table) {
            SelectOptions o;
            o.full_table = full_table;
            try {
                return k_report_dict(select_k(model, point_event(model, a, n), delta, L, std::move(k_grid), seed, o));
            } catch (const NotReached& nr) {
                return k_report_dict(nr.report);
            }
        },
        py::arg("model"), py::arg("a"), py::arg("n"), py::arg("delta"), py::arg("L"),
        py::arg("k_grid") = std::vector<int>{}, py::arg("seed") = 0, py::arg("full_table") = false);

    m.def(
        "rao_blackwell_gamma",
        [](double rho, double theta, int n, std::vector<int> k_grid, int L_outer, int L_inner, std::uint64_t seed,
           std::vector<int> rb_ks) {
            RBOptions o;
            o.rb_ks = std::move(rb_ks);
            const RBReport r = rao_blackwell_gamma(rho, theta, n, k_grid, L_outer, L_inner, seed, o);
            py::dict d;
            d["k_grid"] = r.k_grid;
            d["var_initial"] = r.var_initial_by_k;
            d["rb_ks"] = r.rb_ks;
            d["var_rb"] = r.var_rb_by_k;
            d["var_rb_corrected"] = r.var_rb_corrected_by_k;
            d["cr_bound"] = r.cr_bound;
            return d;
        },
        py::arg("rho"), py::arg("theta"), py::arg("n"), py::arg("k_grid"), py::arg("L_outer"), py::arg("L_inner"),
        py::arg("seed") = 0, py::arg("rb_ks") = std::vector<int>{2});

    py::module_ o = m.def_submodule("oracle", "Exact references");
    o.def("gamma_tail_exact", &oracle::gamma_tail_exact, py::arg("n"), py::arg("a"));
    o.def("normal_tail_exact", &oracle::normal_tail_exact, py::arg("n"), py::arg("a"));
    o.def("exponential_level_for_probability", &oracle::exponential_level_for_probability, py::arg("n"),
          py::arg("probability"));
    o.def("normal_level_for_probability", &oracle::normal_level_for_probability, py::arg("n"), py::arg("probability"));
    o.def(
        "gaussian_conditional_logpdf",
        [](double a, int n, const std::vector<double>& p) { return oracle::gaussian_conditional_logpdf(a, n, p); },
        py::arg("a"), py::arg("n"), py::arg("path"));
    o.def(
        "exponential_conditional_logpdf",
        [](double a, int n, const std::vector<double>& p) { return oracle::exponential_conditional_logpdf(a, n, p); },
        py::arg("a"), py::arg("n"), py::arg("path"));
    o.def(
        "sample_exponential_conditional",
        [](double a, int n, int k, std::uint64_t seed, std::uint64_t stream) {
            RngStream rng(seed, stream);
            return oracle::sample_exponential_conditional(a, n, k, rng);
        },
        py::arg("a"), py::arg("n"), py::arg("k"), py::arg("seed"), py::arg("stream") = 0);
    o.def(
        "sample_gaussian_conditional",
        [](double a, int n, int k, std::uint64_t seed, std::uint64_t stream) {
            RngStream rng(seed, stream);
            return oracle::sample_gaussian_conditional(a, n, k, rng);
        },
        py::arg("a"), py::arg("n"), py::arg("k"), py::arg("seed"), py::arg("stream") = 0);
}
