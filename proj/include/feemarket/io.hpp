#pragma once

#include <string>

namespace feemarket::io {

/// General-format text with 12 significant digits, independent of
/// the global locale.
std::string format_number(double value);

}  // namespace feemarket::io
