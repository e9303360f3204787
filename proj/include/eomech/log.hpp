#pragma once

#include <functional>
#include <string>

namespace eom {

// Warnings raised by numerical code (physicality violations, clamped
// eigenvalues, skipped brackets). The default sink writes to stderr.
using WarningSink = std::function<void(const std::string&)>;

/// Replace the process-wide warning sink; pass nullptr to silence warnings.
/// The sink may be called concurrently from sweep workers; calls are serialized.
void set_warning_sink(WarningSink sink);

void warn(const std::string& message);

}  // namespace eom
