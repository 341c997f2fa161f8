#pragma once

#include <functional>
#include <string_view>

namespace trcl {

using WarningHandler = std::function<void(std::string_view)>;

/// Replaces the process-wide warning sink (stderr by default). Returns the
/// previous handler. Passing an empty function restores the default.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

}  // namespace trcl
