#include "ubb/text.hpp"

#include <array>
#include <charconv>

namespace ubb {

std::string format_number(double value) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

}  // namespace ubb
