// Small CSV helpers shared by the instance bundles and the network loader.
#ifndef PROXSG_SRC_CSV_HPP_
#define PROXSG_SRC_CSV_HPP_

#include <string>
#include <vector>

namespace proxsg::csv {

using Row = std::vector<std::string>;

/// Reads a comma-separated file. Blank lines and lines starting with '#' are skipped; cells are trimmed.
std::vector<Row> read(const std::string& path);

/// Strict double parse; throws Error{kParse} naming `context`.
double to_double(const std::string& cell, const std::string& context);
long long to_int(const std::string& cell, const std::string& context);

/// Shortest text that round-trips the double.
std::string format(double v);

void write_file(const std::string& path, const std::string& content);

}  // namespace proxsg::csv

#endif  // PROXSG_SRC_CSV_HPP_
