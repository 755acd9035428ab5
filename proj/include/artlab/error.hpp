#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace artlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-fatal diagnostics (capped neighbour counts, fallbacks). Defaults to stderr.
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace artlab
