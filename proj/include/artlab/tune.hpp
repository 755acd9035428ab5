#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "artlab/experiment.hpp"

namespace artlab {

// One searched hyperparameter. `key` is a dotted config key: "trainer.<field>"
// keys are rewritten to "method_trainer.<method>.<field>" so each method gets
// its own trainer; anything else (e.g. "method_params.art.boost_frequency") is
// applied as written. Values are JSON texts.
struct TuneDimension {
    std::string key;
    std::vector<std::string> values;
};

struct TuneSpace {
    std::size_t trials = 24;  // per method; the full grid is used when it is smaller
    std::uint64_t seed = 0;
    std::vector<TuneDimension> trainer;                          // shared by all methods
    std::map<std::string, std::vector<TuneDimension>> methods;  // method-specific extras
};

TuneSpace parse_tune_space(const std::string& json_text);
TuneSpace load_tune_space(const std::filesystem::path& path);

struct TrialResult {
    std::string method;
    std::vector<std::string> overrides;
    double val_macro_f1 = 0.0;  // mean over seeds of validation macro-F1
    std::size_t n_ok = 0;
};

struct TuneResult {
    std::vector<TrialResult> trials;
    std::map<std::string, TrialResult> best;
};

// The candidate override sets for one method: the full grid if it has at most
// `space.trials` points, else that many distinct points drawn at random.
std::vector<std::vector<std::string>> tune_candidates(const TuneSpace& space, const std::string& method);

// Random search per method, scored on validation macro-F1 only.
TuneResult tune(const std::string& config_json, const std::filesystem::path& base_dir, const TuneSpace& space,
                const std::vector<std::string>& methods);

// Config JSON with every method's winning overrides applied.
std::string tuned_config_json(const std::string& config_json, const TuneResult& result);

}  // namespace artlab
