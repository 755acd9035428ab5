#include <iostream>
#include <mutex>

#include "artlab/error.hpp"
#include "artlab/matrix.hpp"

namespace artlab {

void Matrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw Error("Matrix::append_row: width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

namespace {
std::mutex sink_mutex;
WarningSink& sink() {
    static WarningSink s = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return s;
}
}  // namespace

void set_warning_sink(WarningSink s) {
    std::lock_guard lock(sink_mutex);
    sink() = s ? std::move(s) : [](const std::string&) {};
}

void warn(const std::string& message) {
    std::lock_guard lock(sink_mutex);
    sink()(message);
}

}  // namespace artlab
