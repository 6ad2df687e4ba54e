#pragma once

// Shortest round-trip decimal text for numbers written to CSV.

#include <string>

namespace catrl {

std::string format_number(double x);

}  // namespace catrl
