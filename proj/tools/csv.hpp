#ifndef LONGMEM_TOOLS_CSV_HPP
#define LONGMEM_TOOLS_CSV_HPP

#include <iosfwd>
#include <string>

#include "longmem/time_series.hpp"

namespace longmem::cli {

/// Reads a numeric matrix: comma-separated, one time step per row, an
/// optional non-numeric header row. Rows must be rectangular.
TimeSeries read_matrix_csv(std::istream& in);

/// Reads from a file path, or standard input when path is "-".
TimeSeries read_matrix_csv(const std::string& path);

/// Writes with header x1,...,xp at full round-trip precision.
void write_matrix_csv(std::ostream& out, const TimeSeries& x);

/// Full-precision decimal formatting (round-trips a double exactly).
std::string format_double(double v);

} // namespace longmem::cli

#endif
