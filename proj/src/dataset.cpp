#include "artlab/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "artlab/error.hpp"

namespace artlab {

Dataset::Dataset(Matrix features, std::vector<Label> labels, int num_classes,
                 std::vector<std::string> class_names)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      class_names_(std::move(class_names)) {
    if (features_.rows() != labels_.size())
        throw Error("Dataset: " + std::to_string(features_.rows()) + " feature rows but " +
                    std::to_string(labels_.size()) + " labels");
    if (num_classes_ < 1) throw Error("Dataset: num_classes must be >= 1");
    for (Label y : labels_)
        if (y < 0 || y >= num_classes_)
            throw Error("Dataset: label " + std::to_string(y) + " outside [0, " +
                        std::to_string(num_classes_ - 1) + "]");
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
    for (Label y : labels_) ++counts[static_cast<std::size_t>(y)];
    return counts;
}

std::vector<std::vector<std::size_t>> Dataset::indices_by_class() const {
    std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(num_classes_));
    for (std::size_t i = 0; i < labels_.size(); ++i)
        groups[static_cast<std::size_t>(labels_[i])].push_back(i);
    return groups;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Matrix x(rows.size(), dim());
    std::vector<Label> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto src = row(rows[i]);
        std::copy(src.begin(), src.end(), x.row(i).begin());
        y[i] = labels_[rows[i]];
    }
    return Dataset(std::move(x), std::move(y), num_classes_, class_names_);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(first, last - first + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string_view rest(line);
    while (true) {
        const auto comma = rest.find(',');
        fields.push_back(trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return fields;
}

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) return false;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_integer(const std::string& text, long long& out) {
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw Error("load_csv: cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw Error("load_csv: '" + path.string() + "' has no header row");
    const auto header = split_fields(line);
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end())
        throw Error("load_csv: label column '" + label_column + "' not found in '" + path.string() + "'");
    const auto label_col = static_cast<std::size_t>(label_it - header.begin());

    Matrix features;
    std::vector<std::string> raw_labels;
    std::vector<double> row_values(header.size() - 1);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw Error("load_csv: line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                        " fields, header has " + std::to_string(header.size()));
        std::size_t k = 0;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (c == label_col) continue;
            if (!parse_double(fields[c], row_values[k]))
                throw Error("load_csv: non-numeric value '" + fields[c] + "' at line " + std::to_string(line_no) +
                            ", column '" + header[c] + "'");
            ++k;
        }
        features.append_row(row_values);
        raw_labels.push_back(fields[label_col]);
    }
    if (raw_labels.empty()) throw Error("load_csv: '" + path.string() + "' contains no data rows");

    std::vector<long long> ints(raw_labels.size());
    bool all_int = true;
    for (std::size_t i = 0; i < raw_labels.size() && all_int; ++i) all_int = parse_integer(raw_labels[i], ints[i]);

    std::vector<std::string> names;
    std::vector<Label> labels(raw_labels.size());
    if (all_int) {
        std::map<long long, Label> ids;
        for (long long v : ints) ids.emplace(v, 0);
        Label next = 0;
        for (auto& [value, id] : ids) {
            id = next++;
            names.push_back(std::to_string(value));
        }
        for (std::size_t i = 0; i < ints.size(); ++i) labels[i] = ids.at(ints[i]);
    } else {
        std::map<std::string, Label> ids;
        for (std::size_t i = 0; i < raw_labels.size(); ++i) {
            auto [it, inserted] = ids.emplace(raw_labels[i], static_cast<Label>(names.size()));
            if (inserted) names.push_back(raw_labels[i]);
            labels[i] = it->second;
        }
    }
    const int k = static_cast<int>(names.size());
    return Dataset(std::move(features), std::move(labels), k, std::move(names));
}

// ---------------------------------------------------------------------------

ClassPrior class_priors(const Dataset& ds) {
    if (ds.empty()) throw Error("class_priors: empty dataset");
    const auto counts = ds.class_counts();
    ClassPrior prior;
    prior.probs.reserve(counts.size());
    const auto n = static_cast<double>(ds.size());
    for (std::size_t c : counts) prior.probs.push_back(static_cast<double>(c) / n);
    return prior;
}

ZScoreStats zscore_fit(const Dataset& ds) {
    if (ds.empty()) throw Error("zscore_fit: empty dataset");
    const std::size_t d = ds.dim();
    const auto n = static_cast<double>(ds.size());
    ZScoreStats stats{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) stats.means[j] += ds.row(i)[j];
    for (auto& m : stats.means) m /= n;
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = ds.row(i)[j] - stats.means[j];
            stats.stds[j] += dev * dev;
        }
    for (auto& s : stats.stds) s = std::sqrt(s / n);
    return stats;
}

Dataset zscore_apply(const ZScoreStats& stats, const Dataset& ds) {
    const std::size_t d = ds.dim();
    if (stats.means.size() != d || stats.stds.size() != d)
        throw Error("zscore_apply: stats fitted on " + std::to_string(stats.means.size()) +
                    " columns, dataset has " + std::to_string(d));
    Matrix x(ds.size(), d);
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = 0; j < d; ++j)
            x(i, j) = stats.stds[j] > 0.0 ? (ds.row(i)[j] - stats.means[j]) / stats.stds[j] : 0.0;
    return Dataset(std::move(x), ds.labels(), ds.num_classes(), ds.class_names());
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> largest_remainder(std::span<const double> shares, std::size_t total) {
    const double sum = std::accumulate(shares.begin(), shares.end(), 0.0);
    std::vector<std::size_t> out(shares.size(), 0);
    if (shares.empty() || total == 0) return out;
    if (!(sum > 0.0)) throw Error("largest_remainder: shares must have a positive sum");

    std::vector<long long> remainder(shares.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < shares.size(); ++i) {
        if (shares[i] < 0.0) throw Error("largest_remainder: negative share");
        const double exact = static_cast<double>(total) * shares[i] / sum;
        // Snap values within rounding noise of an integer so e.g. 10 * 0.7 lands on 7.
        double whole = std::floor(exact + 1e-9);
        if (whole > static_cast<double>(total)) whole = static_cast<double>(total);
        out[i] = static_cast<std::size_t>(whole);
        // Quantised so near-equal remainders tie and fall back to index order.
        remainder[i] = std::llround(std::max(0.0, exact - whole) * 1e9);
        assigned += out[i];
    }
    std::vector<std::size_t> order(shares.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
        ++out[order[k]];
        ++assigned;
    }
    while (assigned > total) {
        const auto it = std::max_element(out.begin(), out.end());
        --*it;
        --assigned;
    }
    return out;
}

SplitBundle stratified_split(const Dataset& ds, const SplitFractions& f, Rng& rng) {
    for (double v : {f.train, f.validation, f.test})
        if (!(v > 0.0 && v < 1.0)) throw Error("stratified_split: every fraction must lie in (0, 1)");
    if (std::abs(f.train + f.validation + f.test - 1.0) > 1e-9)
        throw Error("stratified_split: fractions must sum to 1");

    const std::array<double, 3> shares{f.train, f.validation, f.test};
    std::array<std::vector<std::size_t>, 3> parts;
    for (auto rows : ds.indices_by_class()) {
        if (rows.empty()) continue;
        auto alloc = largest_remainder(shares, rows.size());
        if (rows.size() >= 3) {
            for (std::size_t p = 0; p < 3; ++p) {
                if (alloc[p] != 0) continue;
                auto donor = std::max_element(alloc.begin(), alloc.end());
                --*donor;
                alloc[p] = 1;
            }
        }
        rng.shuffle(std::span(rows));
        std::size_t offset = 0;
        for (std::size_t p = 0; p < 3; ++p) {
            parts[p].insert(parts[p].end(), rows.begin() + static_cast<std::ptrdiff_t>(offset),
                            rows.begin() + static_cast<std::ptrdiff_t>(offset + alloc[p]));
            offset += alloc[p];
        }
    }
    for (auto& p : parts) std::sort(p.begin(), p.end());
    return {ds.subset(parts[0]), ds.subset(parts[1]), ds.subset(parts[2])};
}

Dataset make_imbalanced(const Dataset& ds, double ratio, Label majority_class, Rng& rng) {
    if (!(ratio >= 1.0)) throw Error("make_imbalanced: ratio must be >= 1");
    if (majority_class < 0 || majority_class >= ds.num_classes())
        throw Error("make_imbalanced: majority class out of range");
    auto groups = ds.indices_by_class();
    const std::size_t n_major = groups[static_cast<std::size_t>(majority_class)].size();
    if (n_major == 0) throw Error("make_imbalanced: majority class has no rows");
    const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(n_major) / ratio));

    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        auto& rows = groups[c];
        if (static_cast<Label>(c) == majority_class || rows.empty()) {
            keep.insert(keep.end(), rows.begin(), rows.end());
            continue;
        }
        if (target == 0)
            throw Error("make_imbalanced: ratio " + std::to_string(ratio) + " leaves class " + std::to_string(c) +
                        " with no rows");
        if (target > rows.size()) {
            warn("make_imbalanced: class " + std::to_string(c) + " has only " + std::to_string(rows.size()) +
                 " rows, fewer than the requested " + std::to_string(target));
            keep.insert(keep.end(), rows.begin(), rows.end());
            continue;
        }
        rng.shuffle(std::span(rows));
        keep.insert(keep.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(target));
    }
    std::sort(keep.begin(), keep.end());
    return ds.subset(keep);
}

}  // namespace artlab
