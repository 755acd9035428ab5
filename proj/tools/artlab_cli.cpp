// Command-line front end:
//   artlab_cli run --config <file> [options] [key=value ...]
//   artlab_cli tune --config <file> --space <file> [--write <tuned.json>]
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "artlab/error.hpp"
#include "artlab/experiment.hpp"
#include "artlab/report.hpp"
#include "artlab/tune.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void print_summary(const artlab::RunReport& report) {
    std::cout << artlab::metric_markdown(report, "macro_f1") << '\n';
    if (std::any_of(report.summaries.begin(), report.summaries.end(), [](const auto& s) { return s.t_test.has_value(); }))
        std::cout << artlab::significance_markdown(report) << '\n';
    for (const auto& c : report.cells)
        if (!c.ok) std::cerr << "cell " << c.method << "/" << c.seed << " failed: " << c.error << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Class-imbalance training experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a (method x seed) grid or an ablation sweep");
    std::string config_path, out_dir = "results", methods, seeds, ablation, format = "both";
    std::vector<std::string> overrides;
    unsigned threads = 0;
    bool quiet = false;
    run->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    run->add_option("--out-dir", out_dir, "Directory for report files");
    run->add_option("--methods", methods, "Comma-separated method list, overrides the config");
    run->add_option("--seeds", seeds, "Comma-separated seed list, overrides the config");
    run->add_option("--ablation", ablation,
                    "Sweep: blending_constant, boost_frequency, model_width or imbalance_ratio");
    run->add_option("--format", format, "csv, markdown or both");
    run->add_option("--threads", threads, "Worker threads (0 keeps the config value)");
    run->add_flag("--quiet", quiet, "Do not print the summary table");
    run->add_option("overrides", overrides, "key=value config overrides (dotted keys)");

    auto* tune_cmd = app.add_subcommand("tune", "Random search per method, scored on validation macro-F1");
    std::string space_path, write_path, tune_methods, tune_log;
    std::vector<std::string> tune_overrides;
    tune_cmd->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    tune_cmd->add_option("--space", space_path, "JSON search space")->required()->check(CLI::ExistingFile);
    tune_cmd->add_option("--methods", tune_methods, "Comma-separated methods to tune (default: config list)");
    tune_cmd->add_option("--write", write_path, "Write the tuned config here");
    tune_cmd->add_option("--log", tune_log, "Write every trial as CSV here");
    tune_cmd->add_option("overrides", tune_overrides, "key=value config overrides applied before tuning");

    CLI11_PARSE(app, argc, argv);

    if (tune_cmd->parsed()) {
        try {
            std::ifstream in(config_path);
            std::stringstream buf;
            buf << in.rdbuf();
            const std::string text = artlab::apply_config_overrides(buf.str(), tune_overrides);
            const auto base_dir = std::filesystem::path(config_path).parent_path();
            const auto cfg = artlab::parse_config(text, base_dir);
            const auto space = artlab::load_tune_space(space_path);
            const auto list = tune_methods.empty() ? cfg.methods : split_list(tune_methods);
            const auto result = artlab::tune(text, base_dir, space, list);
            for (const auto& [method, best] : result.best) {
                std::cout << method << " val_macro_f1=" << best.val_macro_f1;
                for (const auto& o : best.overrides) std::cout << ' ' << o;
                std::cout << '\n';
            }
            if (!tune_log.empty()) {
                std::ofstream log(tune_log);
                log << "method,val_macro_f1,n_ok,overrides\n";
                for (const auto& t : result.trials) {
                    log << t.method << ',' << t.val_macro_f1 << ',' << t.n_ok << ',';
                    for (std::size_t i = 0; i < t.overrides.size(); ++i) log << (i ? ";" : "") << t.overrides[i];
                    log << '\n';
                }
            }
            if (!write_path.empty()) {
                std::ofstream out(write_path);
                if (!out) throw artlab::Error("cannot write '" + write_path + "'");
                out << artlab::tuned_config_json(text, result) << '\n';
            }
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
        return 0;
    }

    try {
        artlab::ExperimentConfig cfg = artlab::load_config(config_path, overrides);
        if (!methods.empty()) {
            cfg.methods = split_list(methods);
            for (const auto& m : cfg.methods)
                if (!artlab::is_known_method(m)) throw artlab::Error("unknown method '" + m + "'");
        }
        if (!seeds.empty()) {
            cfg.seeds.clear();
            for (const auto& s : split_list(seeds)) cfg.seeds.push_back(std::stoull(s));
        }
        if (threads > 0) cfg.threads = threads;
        if (!ablation.empty() && (!cfg.ablation || cfg.ablation->variable != ablation))
            cfg.ablation = artlab::AblationSpec{ablation, {}, {}};
        const auto fmt = artlab::parse_report_format(format);

        const auto start = std::chrono::steady_clock::now();
        if (!ablation.empty()) {
            const auto points = artlab::run_ablation(cfg);
            artlab::emit_ablation(points, cfg.ablation->variable, out_dir, fmt);
            for (const auto& p : points) {
                std::ostringstream sub;
                sub << cfg.ablation->variable << '_' << (p.series.empty() ? "" : p.series + "_") << p.value;
                artlab::emit_report(p.report, std::filesystem::path(out_dir) / sub.str(), fmt);
            }
            if (!quiet)
                for (const auto& p : points)
                    for (const auto& s : p.report.summaries)
                        std::cout << (p.series.empty() ? "" : p.series + " ") << cfg.ablation->variable << "="
                                  << p.value << ' ' << s.method << ' ' << s.macro_f1.mean << " +- " << s.macro_f1.std
                                  << '\n';
        } else {
            const auto report = artlab::run_experiment(cfg);
            artlab::emit_report(report, out_dir, fmt);
            if (!quiet) print_summary(report);
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cerr << "done in " << secs << " s, reports in " << out_dir << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
