#include "artlab/report.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "artlab/error.hpp"

namespace artlab {

ReportFormat parse_report_format(const std::string& text) {
    if (text == "csv") return ReportFormat::csv;
    if (text == "markdown" || text == "md") return ReportFormat::markdown;
    if (text == "both") return ReportFormat::both;
    throw Error("unknown report format '" + text + "' (expected csv, markdown or both)");
}

std::string display_name(const std::string& method) {
    static const std::map<std::string, std::string> names{
        {"baseline", "Baseline"},   {"ros", "ROS"},
        {"rus", "RUS"},             {"smote", "SMOTE"},
        {"msmote", "MSMOTE"},       {"nearmiss", "NearMiss"},
        {"cost_sensitive", "Cost-Sensitive Learning"},
        {"focal", "Focal Loss"},    {"ohem", "OHEM"},
        {"ldam_drw", "LDAM+DRW"},   {"art", "ART"}};
    const auto it = names.find(method);
    return it == names.end() ? method : it->second;
}

namespace {

std::string fixed(double v, int digits = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::string exact(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

const MetricSummary& pick(const MethodSummary& s, const std::string& metric) {
    if (metric == "macro_f1") return s.macro_f1;
    if (metric == "accuracy") return s.accuracy;
    if (metric == "precision") return s.macro_precision;
    if (metric == "recall") return s.macro_recall;
    throw Error("unknown metric '" + metric + "'");
}

const char* kMetrics[] = {"macro_f1", "accuracy", "precision", "recall"};

std::string metric_csv(const RunReport& report, const std::string& metric) {
    std::ostringstream os;
    os << "method,dataset,mean,std,n";
    if (metric == "macro_f1") os << ",average_rank";
    os << '\n';
    for (const auto& s : report.summaries) {
        const auto& m = pick(s, metric);
        os << s.method << ',' << report.dataset << ',' << exact(m.mean) << ',' << exact(m.std) << ',' << s.n_ok;
        if (metric == "macro_f1") os << ',' << exact(s.average_rank);
        os << '\n';
    }
    return os.str();
}

std::string significance_csv(const RunReport& report) {
    std::ostringstream os;
    os << "method,dataset,n,t_statistic,t_p_value,t_degenerate,wilcoxon_statistic,wilcoxon_p_value,wilcoxon_n_effective,"
          "wilcoxon_exact,wilcoxon_degenerate\n";
    for (const auto& s : report.summaries) {
        if (!s.t_test && !s.wilcoxon) continue;
        os << s.method << ',' << report.dataset << ',';
        os << (s.t_test ? s.t_test->n_effective : 0) << ',';
        if (s.t_test)
            os << exact(s.t_test->statistic) << ',' << exact(s.t_test->p_value) << ',' << s.t_test->degenerate << ',';
        else
            os << ",,,";
        if (s.wilcoxon)
            os << exact(s.wilcoxon->statistic) << ',' << exact(s.wilcoxon->p_value) << ',' << s.wilcoxon->n_effective
               << ',' << s.wilcoxon->exact << ',' << s.wilcoxon->degenerate;
        else
            os << ",,,,";
        os << '\n';
    }
    return os.str();
}

std::string sanitize(std::string text) {
    for (char& c : text)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return text;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string history_csv(const CellResult& cell) {
    std::ostringstream os;
    os << "epoch,lr,train_loss,val_loss\n";
    for (const auto& r : cell.history)
        os << r.epoch << ',' << exact(r.lr) << ',' << exact(r.train_loss) << ',' << exact(r.val_loss) << '\n';
    return os.str();
}

std::string boosts_csv(const CellResult& cell, std::size_t k) {
    std::ostringstream os;
    os << "epoch";
    for (const char* prefix : {"f1_", "s_", "w_", "p_", "count_"})
        for (std::size_t i = 0; i < k; ++i) os << ',' << prefix << i;
    os << '\n';
    auto put = [&](const std::vector<double>& v) {
        for (std::size_t i = 0; i < k; ++i) {
            os << ',';
            if (i < v.size()) os << exact(v[i]);
        }
    };
    for (const auto& b : cell.boosts) {
        os << b.epoch;
        put(b.f1);
        put(b.difficulty);
        put(b.weights);
        put(b.probs);
        for (std::size_t i = 0; i < k; ++i) os << ',' << (i < b.counts.size() ? b.counts[i] : 0);
        os << '\n';
    }
    return os.str();
}

}  // namespace

std::string metric_markdown(const RunReport& report, const std::string& metric) {
    std::ostringstream os;
    const bool ranks = metric == "macro_f1";
    os << "| Method | " << report.dataset << " |" << (ranks ? " Avg. rank |" : "") << '\n';
    os << "|---|---|" << (ranks ? "---|" : "") << '\n';
    for (const auto& s : report.summaries) {
        const auto& m = pick(s, metric);
        os << "| " << display_name(s.method) << " | " << fixed(m.mean) << " ± " << fixed(m.std);
        if (s.n_ok != report.seeds.size()) os << " (n=" << s.n_ok << ")";
        os << " |";
        if (ranks) os << ' ' << fixed(s.average_rank, 2) << " |";
        os << '\n';
    }
    return os.str();
}

std::string significance_markdown(const RunReport& report) {
    std::ostringstream os;
    os << "| Method | Paired t-test | Wilcoxon test |\n|---|---|---|\n";
    for (const auto& s : report.summaries) {
        if (!s.t_test && !s.wilcoxon) continue;
        os << "| " << display_name(s.method) << " | ";
        os << (s.t_test ? fixed(s.t_test->p_value) + (s.t_test->degenerate ? " (degenerate)" : "") : "n/a") << " | ";
        os << (s.wilcoxon ? fixed(s.wilcoxon->p_value) + (s.wilcoxon->degenerate ? " (all ties)" : "") : "n/a");
        os << " |\n";
    }
    os << "\nWilcoxon: zero differences dropped, midranks for ties; exact null distribution up to 20 pairs.\n";
    return os.str();
}

std::string runs_csv(const RunReport& report) {
    std::ostringstream os;
    os << "method,seed,ok,macro_f1,macro_precision,macro_recall,accuracy,val_macro_f1,epochs_trained,best_epoch,error\n";
    for (const auto& c : report.cells)
        os << c.method << ',' << c.seed << ',' << (c.ok ? 1 : 0) << ',' << exact(c.macro_f1) << ','
           << exact(c.macro_precision) << ',' << exact(c.macro_recall) << ',' << exact(c.accuracy) << ','
           << exact(c.val_macro_f1) << ',' << c.epochs_trained << ',' << c.best_epoch << ',' << sanitize(c.error) << '\n';
    return os.str();
}

std::vector<CellResult> parse_runs_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error("parse_runs_csv: empty input");
    std::vector<CellResult> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 11) throw Error("parse_runs_csv: expected 11 fields, got " + std::to_string(f.size()));
        CellResult c;
        c.method = f[0];
        c.seed = std::stoull(f[1]);
        c.ok = f[2] == "1";
        c.macro_f1 = std::stod(f[3]);
        c.macro_precision = std::stod(f[4]);
        c.macro_recall = std::stod(f[5]);
        c.accuracy = std::stod(f[6]);
        c.val_macro_f1 = std::stod(f[7]);
        c.epochs_trained = std::stoi(f[8]);
        c.best_epoch = std::stoi(f[9]);
        c.error = f[10];
        cells.push_back(std::move(c));
    }
    return cells;
}

void emit_report(const RunReport& report, const std::filesystem::path& out_dir, ReportFormat format) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create '" + out_dir.string() + "': " + ec.message());
    const bool csv = format != ReportFormat::markdown;
    const bool md = format != ReportFormat::csv;

    for (const char* metric : kMetrics) {
        if (csv) write_file(out_dir / ("metrics_" + std::string(metric) + ".csv"), metric_csv(report, metric));
        if (md) write_file(out_dir / ("metrics_" + std::string(metric) + ".md"), metric_markdown(report, metric));
    }
    if (csv) write_file(out_dir / "significance.csv", significance_csv(report));
    if (md) write_file(out_dir / "significance.md", significance_markdown(report));
    write_file(out_dir / "runs.csv", runs_csv(report));

    const std::size_t k = report.class_names.size();
    for (const auto& c : report.cells) {
        if (!c.history.empty()) {
            std::filesystem::create_directories(out_dir / "history");
            write_file(out_dir / "history" / (c.method + "_" + std::to_string(c.seed) + ".csv"), history_csv(c));
        }
        if (!c.boosts.empty()) {
            std::filesystem::create_directories(out_dir / "boosts");
            write_file(out_dir / "boosts" / (c.method + "_" + std::to_string(c.seed) + ".csv"), boosts_csv(c, k));
        }
    }
}

void emit_ablation(const std::vector<AblationPoint>& points, const std::string& variable,
                   const std::filesystem::path& out_dir, ReportFormat format) {
    std::filesystem::create_directories(out_dir);
    std::ostringstream csv, md;
    csv << "series,value,method,mean_macro_f1,std_macro_f1,n\n";
    md << "| Series | " << variable << " | Method | Macro-F1 |\n|---|---|---|---|\n";
    for (const auto& p : points)
        for (const auto& s : p.report.summaries) {
            csv << p.series << ',' << exact(p.value) << ',' << s.method << ',' << exact(s.macro_f1.mean) << ','
                << exact(s.macro_f1.std) << ',' << s.n_ok << '\n';
            md << "| " << (p.series.empty() ? "-" : p.series) << " | " << p.value << " | " << display_name(s.method)
               << " | " << fixed(s.macro_f1.mean) << " ± " << fixed(s.macro_f1.std) << " |\n";
        }
    if (format != ReportFormat::markdown) write_file(out_dir / ("ablation_" + variable + ".csv"), csv.str());
    if (format != ReportFormat::csv) write_file(out_dir / ("ablation_" + variable + ".md"), md.str());
}

}  // namespace artlab
