#include "oulab/format.hpp"

#include <charconv>
#include <cstddef>

namespace oulab {

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, static_cast<std::size_t>(ptr - buf));
}

}  // namespace oulab
