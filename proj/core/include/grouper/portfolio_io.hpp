#ifndef GROUPER_PORTFOLIO_IO_HPP
#define GROUPER_PORTFOLIO_IO_HPP

#include "grouper/contracts.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace grouper {

// Portfolio interchange CSV. Header: line,x1,x2,x3,x4,x5,count
// Reals are written with 17 significant digits so files round-trip
// bit-exactly.
void write_portfolio_csv(std::ostream& os, const Portfolio& p);
void write_portfolio_csv(const std::string& path, const Portfolio& p);

// Throws ParseError naming the 1-based line number of a malformed row.
// Set allow_fractional when reading optimizer output (model points).
Portfolio read_portfolio_csv(std::istream& is, bool allow_fractional = false);
Portfolio read_portfolio_csv(const std::string& path, bool allow_fractional = false);

// Model points CSV: portfolio format plus a trailing `weight` column.
void write_model_points_csv(const std::string& path, const Portfolio& p,
                            const std::vector<double>& weights);

// Full-precision decimal text for a double (shortest form is not used;
// 17 significant digits always round-trip).
std::string format_double(double v);

} // namespace grouper

#endif // GROUPER_PORTFOLIO_IO_HPP
