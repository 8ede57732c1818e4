#pragma once

#include <string>
#include <vector>

namespace shapecov::csv {

/// Round-trip-exact formatting of a double ("%.17g", with nan/inf spelled
/// out). Every CSV the project writes goes through this.
std::string format_double(double v);

double parse_double(const std::string& s);

std::vector<std::string> split_fields(const std::string& line);

}  // namespace shapecov::csv
