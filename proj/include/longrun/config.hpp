#pragma once

#include "longrun/apps.hpp"
#include "longrun/cond_approx.hpp"
#include "longrun/custom_model.hpp"
#include "longrun/model.hpp"
#include "longrun/run_length.hpp"
#include "longrun/sampler.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace longrun {

struct ModelConfig {
    /// normal, exponential, gamma, normal_square or custom.
    std::string name = "normal";
    std::map<std::string, double> parameters;
    std::optional<CustomModelSpec> custom;
};

struct EventConfig {
    /// point_sum, point_functional or exceedance.
    std::string kind = "point_sum";
    std::optional<double> a;
    std::optional<double> u_sum;
    /// Target tail probability P(U_{1,n} > n a); the level a is solved from it.
    std::optional<double> probability;
    int n = 100;
    std::optional<double> c;
};

struct RunBlock {
    std::optional<int> k;
    std::vector<int> ks;
    std::optional<double> delta;
    int L = 1000;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::string center_shift = "paper_m0";
    std::string envelope = "auto";
    std::string normalizer = "auto";
    std::string sampling = "base";
    std::optional<int> k_step;
    bool full_table = false;
    bool oracle = false;
    bool trace = false;
    int paths = 1;
    int bins = 60;
    int quad_points = 64;
    int L_outer = 2000;
    int L_inner = 200;
    std::vector<int> k_grid;
    std::vector<int> rb_ks{2};
    std::vector<double> path;
    std::vector<double> points;
};

struct OutputConfig {
    std::string directory = ".";
    std::vector<std::string> formats{"csv", "json"};
};

struct RunConfig {
    ModelConfig model;
    EventConfig event;
    RunBlock run;
    OutputConfig output;
    /// The seed was absent from the input and drawn from the system.
    bool seed_generated = false;

    std::uint64_t seed() const { return run.seed.value_or(0); }
    bool wants(const std::string& format) const;
    /// The configuration as it will be reproduced, including a generated seed.
    nlohmann::json to_json() const;
};

/// Parses and validates a configuration; unknown keys and bad values throw ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

std::unique_ptr<Model> make_model(const ModelConfig& config);

/// The level a of the event: given directly, from u_sum / n, or solved from the
/// tail probability (exact for the exponential and normal models, saddlepoint otherwise).
double resolve_level(const Model& model, const EventConfig& event);

ConditioningEvent make_event(const Model& model, const EventConfig& event);

ApproxOptions approx_options(const RunBlock& run);
SamplerOptions sampler_options(const RunBlock& run);

/// Level with P(U_{1,n} / n > a) = probability under the saddlepoint tail formula.
double saddlepoint_level_for_probability(const Model& model, int n, double probability);

}  // namespace longrun
