#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shb::csv {

/// Shortest-ish fixed formatting used by every CSV writer ("%.15g").
std::string format_number(double value);

/// Reads comma-separated numeric rows. Lines that do not parse as numbers
/// (headers, comments) are skipped; rows with fewer than `min_columns`
/// fields are an error.
std::vector<std::vector<double>> read_numeric(std::istream& in,
                                              std::size_t min_columns);

}  // namespace shb::csv
