#pragma once

#include <string>

namespace oulab {

// Shortest decimal representation that round-trips the exact double.
// All machine-readable output goes through here so that reruns are
// byte-identical.
std::string format_double(double value);

}  // namespace oulab
