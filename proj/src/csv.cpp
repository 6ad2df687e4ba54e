#include "catrl/csv.hpp"

#include <array>
#include <charconv>

namespace catrl {

std::string format_number(double x) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), end);
}

}  // namespace catrl
