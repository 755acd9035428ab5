#include "artlab/tune.hpp"

#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "artlab/error.hpp"
#include "artlab/rng.hpp"
#include "artlab/stats.hpp"

namespace artlab {

using nlohmann::json;

namespace {

std::vector<TuneDimension> read_dimensions(const json& obj, const std::string& where) {
    if (!obj.is_object()) throw Error("tune space: '" + where + "' must be an object");
    std::vector<TuneDimension> dims;
    for (const auto& [key, values] : obj.items()) {
        if (!values.is_array() || values.empty())
            throw Error("tune space: '" + where + "." + key + "' must be a non-empty array");
        TuneDimension d{key, {}};
        for (const auto& v : values) d.values.push_back(v.dump());
        dims.push_back(std::move(d));
    }
    return dims;
}

std::string override_key(const std::string& key, const std::string& method) {
    const std::string prefix = "trainer.";
    if (key.rfind(prefix, 0) == 0) return "method_trainer." + method + "." + key.substr(prefix.size());
    return key;
}

}  // namespace

TuneSpace parse_tune_space(const std::string& json_text) {
    const json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error("tune space: invalid JSON");
    TuneSpace space;
    for (const auto& [key, value] : doc.items()) {
        if (key == "trials") {
            space.trials = value.get<std::size_t>();
        } else if (key == "seed") {
            space.seed = value.get<std::uint64_t>();
        } else if (key == "trainer") {
            for (auto& d : read_dimensions(value, "trainer")) {
                d.key = "trainer." + d.key;
                space.trainer.push_back(std::move(d));
            }
        } else if (key == "methods") {
            for (const auto& [method, dims] : value.items()) {
                if (!is_known_method(method)) throw Error("tune space: unknown method '" + method + "'");
                space.methods[method] = read_dimensions(dims, "methods." + method);
            }
        } else {
            throw Error("tune space: unknown key '" + key + "'");
        }
    }
    if (space.trials == 0) throw Error("tune space: trials must be >= 1");
    return space;
}

TuneSpace load_tune_space(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("tune space: cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_tune_space(buf.str());
}

std::vector<std::vector<std::string>> tune_candidates(const TuneSpace& space, const std::string& method) {
    std::vector<TuneDimension> dims = space.trainer;
    if (const auto it = space.methods.find(method); it != space.methods.end())
        dims.insert(dims.end(), it->second.begin(), it->second.end());

    std::size_t grid = 1;
    for (const auto& d : dims) grid *= d.values.size();

    auto decode = [&](std::size_t index) {
        std::vector<std::string> overrides;
        for (const auto& d : dims) {
            overrides.push_back(override_key(d.key, method) + "=" + d.values[index % d.values.size()]);
            index /= d.values.size();
        }
        return overrides;
    };

    std::vector<std::size_t> picks(grid);
    std::iota(picks.begin(), picks.end(), 0);
    if (grid > space.trials) {
        Rng rng = Rng::stream(space.seed, "tune:" + method);
        rng.shuffle(std::span<std::size_t>(picks));
        picks.resize(space.trials);
        std::sort(picks.begin(), picks.end());
    }
    std::vector<std::vector<std::string>> out;
    for (std::size_t p : picks) out.push_back(decode(p));
    return out;
}

TuneResult tune(const std::string& config_json, const std::filesystem::path& base_dir, const TuneSpace& space,
                const std::vector<std::string>& methods) {
    const ExperimentConfig base = parse_config(config_json, base_dir);
    const Dataset full = load_csv(base.dataset_path, base.label_column);
    TuneResult result;
    for (const auto& method : methods) {
        if (!is_known_method(method)) throw Error("tune: unknown method '" + method + "'");
        for (const auto& overrides : tune_candidates(space, method)) {
            ExperimentConfig cfg = parse_config(config_json, base_dir, overrides);
            cfg.methods = {method};
            cfg.keep_histories = false;
            const RunReport report = run_experiment(cfg, full);
            std::vector<double> scores;
            for (const auto& c : report.cells)
                if (c.ok) scores.push_back(c.val_macro_f1);
            TrialResult trial{method, overrides, scores.empty() ? 0.0 : mean(scores), scores.size()};
            // Incomplete trials never win against complete ones.
            const auto it = result.best.find(method);
            if (it == result.best.end() || trial.n_ok > it->second.n_ok ||
                (trial.n_ok == it->second.n_ok && trial.val_macro_f1 > it->second.val_macro_f1))
                result.best[method] = trial;
            result.trials.push_back(std::move(trial));
        }
    }
    return result;
}

std::string tuned_config_json(const std::string& config_json, const TuneResult& result) {
    std::vector<std::string> overrides;
    for (const auto& [_, best] : result.best) overrides.insert(overrides.end(), best.overrides.begin(), best.overrides.end());
    return apply_config_overrides(config_json, overrides);
}

}  // namespace artlab
