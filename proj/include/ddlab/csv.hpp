#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ddlab {

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

/// Quotes a field if it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const;
};

}  // namespace ddlab
