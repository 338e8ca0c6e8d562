#ifndef CHARGEOPT_EXPERIMENT_HPP
#define CHARGEOPT_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chargeopt/evaluation.hpp"
#include "chargeopt/instance.hpp"
#include "chargeopt/mip.hpp"
#include "chargeopt/model.hpp"
#include "chargeopt/reliability.hpp"

namespace chargeopt {

// Declarative config value: string, number, boolean, or a flat array of
// those.  Covers the documented key set; no nested tables.
struct ConfigValue {
    enum class Kind { String, Number, Boolean, Array };
    Kind kind = Kind::String;
    std::string str;
    double num = 0.0;
    bool boolean = false;
    std::vector<ConfigValue> items;
};

// section -> key -> value; keys outside any [section] land in "".
using ConfigTable = std::map<std::string, std::map<std::string, ConfigValue>>;

// Parses the TOML subset used by experiment configs: [section] headers,
// `key = value` lines, double-quoted strings, numbers, true/false, flat
// [a, b, ...] arrays, and # comments.  Throws ConfigError with a line number.
ConfigTable parse_config(const std::string& text);

struct ExperimentConfig {
    // Either a path to an instance file or a generator recipe.
    std::string instance_path;
    std::optional<std::uint64_t> generate_seed;
    GeneratorConfig generator;

    std::size_t estimation_n = 10000;
    std::uint64_t estimation_seed = 7;
    EstimatorMethod estimation_method = EstimatorMethod::CV;
    double rho = kDefaultRho;
    std::vector<std::size_t> sweep = {10, 100, 1000, 10000};

    std::vector<Variant> variants;
    std::string baseline; // variant label; defaults to the first variant

    BuildOptions build;
    BnBConfig solver;

    std::int64_t n_eval = 10000;
    std::uint64_t eval_seed = 1001;
    std::vector<EstimatorMethod> eval_methods = {EstimatorMethod::MC, EstimatorMethod::CV};

    std::string output_dir = "experiment-out";
};

// Validates cross-field invariants (nonempty variants, baseline among them,
// positive counts) and throws ConfigError on violations.
ExperimentConfig config_from_text(const std::string& text);

struct ExperimentArtifacts {
    std::string output_dir;
    // relative artifact path -> content checksum, manifest excluded
    std::map<std::string, std::string> checksums;
    std::string manifest_text;
};

// Runs the full pipeline: estimation sweep, one exact solve per variant,
// out-of-sample traces and comparison, then a manifest embedding the config
// text so the run can be reproduced from the manifest alone.  Every file is
// a pure function of the config, so reruns are byte-identical.
ExperimentArtifacts run_experiment(const ExperimentConfig& config,
                                   const std::string& config_text);

// Extracts the embedded config from a manifest produced by run_experiment.
std::string config_text_from_manifest(const std::string& manifest_text);

} // namespace chargeopt

#endif
