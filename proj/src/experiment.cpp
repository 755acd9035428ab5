#include "artlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "artlab/error.hpp"
#include "artlab/losses.hpp"
#include "artlab/metrics.hpp"
#include "artlab/resample.hpp"

namespace artlab {

using nlohmann::json;

const std::vector<std::string>& method_registry() {
    static const std::vector<std::string> names{"baseline", "ros",   "rus",  "smote",    "msmote", "nearmiss",
                                                "cost_sensitive", "focal", "ohem", "ldam_drw", "art"};
    return names;
}

bool is_known_method(const std::string& name) {
    const auto& r = method_registry();
    return std::find(r.begin(), r.end(), name) != r.end();
}

const std::vector<std::uint64_t>& default_seeds() {
    static const std::vector<std::uint64_t> seeds{1834,  8993,  412,   4523,  182,   41921, 53178, 4536,  89,  101172,
                                                  3812,  76459, 21734, 5601,  14923, 32871, 982,   61435, 23490, 7711};
    return seeds;
}

// ---------------------------------------------------------------------------
// Config

namespace {

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("override '" + assignment + "' is not of the form key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &doc;
    std::stringstream path(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(path, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object()) (*node)[parts[i]] = json::object();
        node = &(*node)[parts[i]];
    }
    (*node)[parts.back()] = value;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw Error("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key) && !obj[key].is_null()) out = obj[key].get<T>();
}

void read_trainer(const json& t, TrainerConfig& out, const std::string& where) {
    reject_unknown(t, {"hidden_widths", "batch_size", "epochs", "lr", "lr_min", "beta1", "beta2", "epsilon",
                       "weight_decay", "patience"},
                   where);
    read(t, "hidden_widths", out.hidden_widths);
    read(t, "batch_size", out.batch_size);
    read(t, "epochs", out.epochs);
    read(t, "lr", out.lr_max);
    read(t, "lr_min", out.lr_min);
    read(t, "beta1", out.beta1);
    read(t, "beta2", out.beta2);
    read(t, "epsilon", out.epsilon);
    read(t, "weight_decay", out.weight_decay);
    read(t, "patience", out.patience);
}

void validate_trainer(const TrainerConfig& t, const std::string& where) {
    if (t.batch_size == 0) throw Error("config: " + where + ".batch_size must be >= 1");
    if (t.epochs < 1) throw Error("config: " + where + ".epochs must be >= 1");
    if (t.patience < 0) throw Error("config: " + where + ".patience must be >= 0");
    if (!(t.lr_max > 0.0) || t.lr_min < 0.0 || t.lr_min > t.lr_max)
        throw Error("config: " + where + " needs 0 <= lr_min <= lr and lr > 0");
    for (auto w : t.hidden_widths)
        if (w == 0) throw Error("config: " + where + ".hidden_widths entries must be >= 1");
}

std::vector<double> number_list(const json& obj, const char* key) {
    std::vector<double> v;
    if (obj.contains(key)) v = obj[key].get<std::vector<double>>();
    return v;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                              const std::vector<std::string>& overrides) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error("config: top level must be an object");
    for (const auto& o : overrides) apply_override(doc, o);

    ExperimentConfig cfg;
    try {
        reject_unknown(doc, {"name", "dataset", "methods", "seeds", "split", "trainer", "method_trainer", "method_params",
                             "imbalance_ratio", "ablation", "threads", "keep_histories"},
                       "top level");
        read(doc, "name", cfg.name);
        if (!doc.contains("dataset")) throw Error("config: missing 'dataset'");
        const auto& ds = doc["dataset"];
        reject_unknown(ds, {"path", "label_column"}, "dataset");
        std::string path;
        read(ds, "path", path);
        read(ds, "label_column", cfg.label_column);
        if (path.empty() || cfg.label_column.empty()) throw Error("config: dataset needs 'path' and 'label_column'");
        cfg.dataset_path = std::filesystem::path(path).is_absolute() ? std::filesystem::path(path) : base_dir / path;

        if (doc.contains("methods")) {
            const auto& m = doc["methods"];
            cfg.methods = m.is_string() ? std::vector<std::string>{m.get<std::string>()} : m.get<std::vector<std::string>>();
        }
        if (doc.contains("seeds")) cfg.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();

        if (doc.contains("split")) {
            const auto& s = doc["split"];
            reject_unknown(s, {"train", "validation", "test"}, "split");
            read(s, "train", cfg.split.train);
            read(s, "validation", cfg.split.validation);
            read(s, "test", cfg.split.test);
        }
        if (doc.contains("trainer")) read_trainer(doc["trainer"], cfg.trainer, "trainer");
        if (doc.contains("method_trainer")) {
            for (const auto& [method, t] : doc["method_trainer"].items()) {
                if (!is_known_method(method)) throw Error("config: unknown method '" + method + "' in method_trainer");
                TrainerConfig tc = cfg.trainer;
                read_trainer(t, tc, "method_trainer." + method);
                cfg.method_trainers[method] = tc;
            }
        }
        if (doc.contains("method_params")) {
            const auto& mp = doc["method_params"];
            reject_unknown(mp, {"smote", "msmote", "nearmiss", "ros", "rus", "focal", "ohem", "ldam_drw", "art"},
                           "method_params");
            auto& p = cfg.params;
            if (mp.contains("smote")) read(mp["smote"], "k", p.smote_k);
            if (mp.contains("msmote")) read(mp["msmote"], "k", p.msmote_k);
            if (mp.contains("nearmiss")) {
                const auto& nm = mp["nearmiss"];
                if (nm.contains("version") && nm["version"].is_string()) {
                    if (nm["version"].get<std::string>() != "auto") throw Error("config: nearmiss.version must be 1, 2, 3 or \"auto\"");
                    p.nearmiss_version = 0;
                } else {
                    read(nm, "version", p.nearmiss_version);
                }
                read(nm, "v3_candidates", p.nearmiss_v3_candidates);
                read(nm, "target", p.undersample_target);
            }
            if (mp.contains("ros")) read(mp["ros"], "target", p.oversample_target);
            if (mp.contains("rus")) read(mp["rus"], "target", p.undersample_target);
            if (mp.contains("focal")) read(mp["focal"], "gamma", p.focal_gamma);
            if (mp.contains("ohem")) read(mp["ohem"], "fraction", p.ohem_fraction);
            if (mp.contains("ldam_drw")) {
                read(mp["ldam_drw"], "max_margin", p.ldam_max_margin);
                read(mp["ldam_drw"], "drw_start_epoch", p.drw_start_epoch);
            }
            if (mp.contains("art")) {
                read(mp["art"], "blending_constant", p.art_blending_constant);
                read(mp["art"], "boost_frequency", p.art_boost_frequency);
            }
        }
        if (doc.contains("imbalance_ratio") && !doc["imbalance_ratio"].is_null())
            cfg.imbalance_ratio = doc["imbalance_ratio"].get<double>();
        if (doc.contains("ablation") && !doc["ablation"].is_null()) {
            const auto& a = doc["ablation"];
            reject_unknown(a, {"variable", "values", "series"}, "ablation");
            AblationSpec spec;
            read(a, "variable", spec.variable);
            spec.values = number_list(a, "values");
            spec.series = number_list(a, "series");
            cfg.ablation = spec;
        }
        read(doc, "threads", cfg.threads);
        read(doc, "keep_histories", cfg.keep_histories);
    } catch (const json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }

    if (cfg.seeds.empty()) throw Error("config: seed list is empty");
    if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size())
        throw Error("config: seeds must be unique");
    if (cfg.methods.empty()) throw Error("config: method list is empty");
    for (const auto& m : cfg.methods)
        if (!is_known_method(m)) throw Error("config: unknown method '" + m + "'");
    const auto& p = cfg.params;
    if (p.nearmiss_version < 0 || p.nearmiss_version > 3) throw Error("config: nearmiss.version must be 1, 2, 3 or \"auto\"");
    if (!(p.art_blending_constant >= 0.0 && p.art_blending_constant <= 1.0))
        throw Error("config: art.blending_constant must lie in [0, 1]");
    if (p.art_boost_frequency < 1) throw Error("config: art.boost_frequency must be >= 1");
    for (const auto* t : {&p.oversample_target, &p.undersample_target})
        if (*t != "majority" && *t != "minority") throw Error("config: resample target must be 'majority' or 'minority'");
    validate_trainer(cfg.trainer, "trainer");
    for (const auto& [m, t] : cfg.method_trainers) validate_trainer(t, "method_trainer." + m);
    if (cfg.threads == 0) cfg.threads = std::max(1u, std::thread::hardware_concurrency());
    return cfg;
}

std::string apply_config_overrides(const std::string& json_text, const std::vector<std::string>& overrides) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error("config: invalid JSON");
    for (const auto& o : overrides) apply_override(doc, o);
    return doc.dump(2);
}

const TrainerConfig& ExperimentConfig::trainer_for(const std::string& method) const {
    const auto it = method_trainers.find(method);
    return it == method_trainers.end() ? trainer : it->second;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path(), overrides);
}

// ---------------------------------------------------------------------------
// Cells

const MethodSummary* RunReport::summary(const std::string& method) const {
    for (const auto& s : summaries)
        if (s.method == method) return &s;
    return nullptr;
}

PreparedData prepare_data(const Dataset& full, const ExperimentConfig& config, std::uint64_t seed) {
    Dataset source = full;
    if (config.imbalance_ratio) {
        const auto counts = full.class_counts();
        const auto majority = static_cast<Label>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        Rng imb = Rng::stream(seed, "imbalance");
        source = make_imbalanced(full, *config.imbalance_ratio, majority, imb);
    }
    Rng split_rng = Rng::stream(seed, "split");
    SplitBundle raw = stratified_split(source, config.split, split_rng);
    const ZScoreStats stats = zscore_fit(raw.train);
    return {SplitBundle{zscore_apply(stats, raw.train), zscore_apply(stats, raw.validation), zscore_apply(stats, raw.test)},
            full.class_names()};
}

namespace {

ResamplePlan plan_for(const Dataset& train, const std::string& target) {
    return target == "majority" ? balance_to_majority(train) : balance_to_minority(train);
}

struct Trained {
    MlpModel model;
    int epochs_trained = 0;
    int best_epoch = 0;
    std::vector<EpochRecord> history;
    std::vector<BoostRecord> boosts;
};

Trained train_method(const SplitBundle& data, const std::string& method, std::uint64_t seed,
                     const ExperimentConfig& config, int nearmiss_version) {
    const auto& train = data.train;
    const TrainerConfig& trainer = config.trainer_for(method);
    const auto widths = layer_widths(train.dim(), trainer, static_cast<std::size_t>(train.num_classes()));
    MlpModel model = init_mlp(widths, Rng::stream(seed, "init")());
    Rng shuffle = Rng::stream(seed, "shuffle");
    Rng resample = Rng::stream(seed, "resample");
    const auto& p = config.params;

    Dataset fit_set;
    LossSpec loss;
    if (method == "art") {
        ArtConfig art{p.art_blending_constant, p.art_boost_frequency, trainer};
        auto r = art_fit(std::move(model), train, data.validation, art, shuffle, resample);
        return {std::move(r.fit.model), r.fit.epochs_trained, r.fit.best_epoch, std::move(r.fit.history),
                std::move(r.boosts)};
    } else if (method == "baseline") {
        fit_set = train;
    } else if (method == "ros") {
        fit_set = ros(train, plan_for(train, p.oversample_target), resample);
    } else if (method == "rus") {
        fit_set = rus(train, plan_for(train, p.undersample_target), resample);
    } else if (method == "smote") {
        fit_set = smote(train, p.smote_k, plan_for(train, p.oversample_target), resample);
    } else if (method == "msmote") {
        fit_set = msmote(train, p.msmote_k, plan_for(train, p.oversample_target), resample);
    } else if (method == "nearmiss") {
        fit_set = nearmiss(train, nearmiss_version, plan_for(train, p.undersample_target), resample,
                           p.nearmiss_v3_candidates);
    } else {
        fit_set = train;
        const ClassPrior priors = class_priors(train);
        if (method == "cost_sensitive") {
            loss.kind = LossKind::cost_sensitive;
            loss.class_weights = cost_sensitive_weights(priors);
        } else if (method == "focal") {
            loss.kind = LossKind::focal;
            loss.gamma = p.focal_gamma;
        } else if (method == "ohem") {
            loss.kind = LossKind::ohem;
            loss.ohem_fraction = p.ohem_fraction;
        } else if (method == "ldam_drw") {
            loss.kind = LossKind::ldam_drw;
            const auto counts = train.class_counts();
            loss.ldam_margins = ldam_margins(counts, p.ldam_max_margin);
            loss.drw_start_epoch = p.drw_start_epoch > 0 ? p.drw_start_epoch : std::max(1, trainer.epochs / 2);
            loss.drw_priors = priors.probs;
        } else {
            throw Error("unknown method '" + method + "'");
        }
    }
    auto r = fit(std::move(model), fit_set, data.validation, loss, trainer, shuffle);
    return {std::move(r.model), r.epochs_trained, r.best_epoch, std::move(r.history), {}};
}

ClassMetrics evaluate(const MlpModel& model, const Dataset& ds) {
    return class_metrics(confusion(ds.labels(), predict(model, ds.features()), ds.num_classes()));
}

}  // namespace

CellResult run_cell(const PreparedData& data, const std::string& method, std::uint64_t seed,
                    const ExperimentConfig& config) {
    CellResult cell;
    cell.method = method;
    cell.seed = seed;
    try {
        Trained t;
        if (method == "nearmiss" && config.params.nearmiss_version == 0) {
            double best = -1.0;
            for (int v = 1; v <= 3; ++v) {
                Trained candidate = train_method(data.split, method, seed, config, v);
                const double score = evaluate(candidate.model, data.split.validation).macro_f1;
                if (score > best) {
                    best = score;
                    t = std::move(candidate);
                }
            }
        } else {
            t = train_method(data.split, method, seed, config, config.params.nearmiss_version);
        }
        const auto m = evaluate(t.model, data.split.test);
        cell.ok = true;
        cell.macro_f1 = m.macro_f1;
        cell.macro_precision = m.macro_precision;
        cell.macro_recall = m.macro_recall;
        cell.accuracy = m.accuracy;
        cell.val_macro_f1 = evaluate(t.model, data.split.validation).macro_f1;
        cell.epochs_trained = t.epochs_trained;
        cell.best_epoch = t.best_epoch;
        if (config.keep_histories) {
            cell.history = std::move(t.history);
            cell.boosts = std::move(t.boosts);
        }
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
    }
    return cell;
}

void summarize(RunReport& report) {
    const std::size_t n_seeds = report.seeds.size();
    report.summaries.clear();
    const auto art_it = std::find(report.methods.begin(), report.methods.end(), "art");

    std::vector<std::size_t> all_ok_seeds;
    for (std::size_t s = 0; s < n_seeds; ++s) {
        bool ok = true;
        for (std::size_t m = 0; m < report.methods.size(); ++m) ok = ok && report.cell(m, s).ok;
        if (ok) all_ok_seeds.push_back(s);
    }
    std::vector<std::vector<double>> rank_scores(report.methods.size());
    for (std::size_t m = 0; m < report.methods.size(); ++m)
        for (std::size_t s : all_ok_seeds) rank_scores[m].push_back(report.cell(m, s).macro_f1);
    const auto ranks = average_ranks(rank_scores);

    for (std::size_t m = 0; m < report.methods.size(); ++m) {
        MethodSummary sum;
        sum.method = report.methods[m];
        std::vector<double> f1, pr, rc, acc;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            const auto& c = report.cell(m, s);
            if (!c.ok) continue;
            f1.push_back(c.macro_f1);
            pr.push_back(c.macro_precision);
            rc.push_back(c.macro_recall);
            acc.push_back(c.accuracy);
        }
        sum.n_ok = f1.size();
        sum.macro_f1 = {mean(f1), sample_std(f1)};
        sum.macro_precision = {mean(pr), sample_std(pr)};
        sum.macro_recall = {mean(rc), sample_std(rc)};
        sum.accuracy = {mean(acc), sample_std(acc)};
        sum.average_rank = ranks.empty() ? 0.0 : ranks[m];

        if (art_it != report.methods.end() && report.methods[m] != "art") {
            const auto a = static_cast<std::size_t>(art_it - report.methods.begin());
            std::vector<double> art_scores, other;
            for (std::size_t s = 0; s < n_seeds; ++s) {
                if (!report.cell(a, s).ok || !report.cell(m, s).ok) continue;
                art_scores.push_back(report.cell(a, s).macro_f1);
                other.push_back(report.cell(m, s).macro_f1);
            }
            if (art_scores.size() >= 2) sum.t_test = paired_t_test(art_scores, other);
            if (!art_scores.empty()) sum.wilcoxon = wilcoxon_signed_rank(art_scores, other);
        }
        report.summaries.push_back(std::move(sum));
    }
}

RunReport run_experiment(const ExperimentConfig& config) {
    return run_experiment(config, load_csv(config.dataset_path, config.label_column));
}

RunReport run_experiment(const ExperimentConfig& config, const Dataset& full) {
    RunReport report;
    report.dataset = config.name;
    report.class_names = full.class_names();
    report.methods = config.methods;
    report.seeds = config.seeds;
    report.cells.resize(config.methods.size() * config.seeds.size());

    // Splits are shared by all methods of a seed; a failed split fails every cell of that seed.
    std::vector<std::optional<PreparedData>> prepared(config.seeds.size());
    std::vector<std::string> prep_errors(config.seeds.size());
    for (std::size_t s = 0; s < config.seeds.size(); ++s) {
        try {
            prepared[s] = prepare_data(full, config, config.seeds[s]);
        } catch (const std::exception& e) {
            prep_errors[s] = e.what();
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < report.cells.size(); i = next++) {
            const std::size_t m = i / config.seeds.size();
            const std::size_t s = i % config.seeds.size();
            if (!prepared[s]) {
                CellResult& c = report.cells[i];
                c.method = config.methods[m];
                c.seed = config.seeds[s];
                c.error = prep_errors[s];
                continue;
            }
            report.cells[i] = run_cell(*prepared[s], config.methods[m], config.seeds[s], config);
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(report.cells.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    summarize(report);
    return report;
}

// ---------------------------------------------------------------------------
// Ablations

std::vector<AblationPoint> run_ablation(const ExperimentConfig& config) {
    return run_ablation(config, load_csv(config.dataset_path, config.label_column));
}

std::vector<AblationPoint> run_ablation(const ExperimentConfig& config, const Dataset& full) {
    if (!config.ablation) throw Error("run_ablation: config has no ablation block");
    const AblationSpec& spec = *config.ablation;
    std::vector<double> values = spec.values;
    std::vector<double> series = spec.series;
    std::vector<AblationPoint> points;

    auto fmt = [](const char* prefix, double v) {
        std::ostringstream os;
        os << prefix << v;
        return os.str();
    };

    if (spec.variable == "blending_constant") {
        if (values.empty())
            for (int i = 0; i <= 10; ++i) values.push_back(i / 10.0);
        if (series.empty()) series = {1, 4, 8};
        for (double bf : series)
            for (double c : values) {
                ExperimentConfig run = config;
                run.methods = {"art"};
                run.params.art_blending_constant = c;
                run.params.art_boost_frequency = static_cast<int>(bf);
                points.push_back({fmt("bf=", bf), c, run_experiment(run, full)});
            }
    } else if (spec.variable == "boost_frequency") {
        if (values.empty())
            for (int i = 1; i <= 10; ++i) values.push_back(i);
        if (series.empty()) series = {0.25, 0.5, 0.75};
        for (double c : series)
            for (double bf : values) {
                ExperimentConfig run = config;
                run.methods = {"art"};
                run.params.art_blending_constant = c;
                run.params.art_boost_frequency = static_cast<int>(bf);
                points.push_back({fmt("c=", c), bf, run_experiment(run, full)});
            }
    } else if (spec.variable == "model_width") {
        if (values.empty()) values = {16, 32, 64, 128, 256, 512};
        for (double w : values) {
            ExperimentConfig run = config;
            run.methods = {"baseline", "art"};
            auto set_width = [w](TrainerConfig& t) {
                for (auto& h : t.hidden_widths) h = static_cast<std::size_t>(w);
                if (t.hidden_widths.empty()) t.hidden_widths = {static_cast<std::size_t>(w)};
            };
            set_width(run.trainer);
            for (auto& [_, t] : run.method_trainers) set_width(t);
            points.push_back({"", w, run_experiment(run, full)});
        }
    } else if (spec.variable == "imbalance_ratio") {
        if (values.empty()) values = {2, 5, 10, 20, 50};
        for (double r : values) {
            ExperimentConfig run = config;
            run.methods = {"baseline", "art"};
            run.imbalance_ratio = r;
            points.push_back({"", r, run_experiment(run, full)});
        }
    } else {
        throw Error("run_ablation: unknown sweep variable '" + spec.variable + "'");
    }
    return points;
}

}  // namespace artlab
