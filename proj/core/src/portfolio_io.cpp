#include "grouper/portfolio_io.hpp"

#include "grouper/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace grouper {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_portfolio_csv(std::ostream& os, const Portfolio& p) {
    os << "line,x1,x2,x3,x4,x5,count\n";
    const std::string tag = to_string(p.line);
    for (const auto& e : p.entries) {
        os << tag;
        for (double v : e.contract.x) os << ',' << format_double(v);
        os << ',' << e.count << '\n';
    }
}

void write_portfolio_csv(const std::string& path, const Portfolio& p) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing", path);
    write_portfolio_csv(f, p);
    if (!f) throw IoError("write failed", path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size())
            throw ParseError("trailing characters in number '" + s + "'",
                             "line " + std::to_string(lineno));
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("invalid number '" + s + "'", "line " + std::to_string(lineno));
    }
}

} // namespace

Portfolio read_portfolio_csv(std::istream& is, bool allow_fractional) {
    std::string line;
    if (!std::getline(is, line))
        throw ParseError("empty portfolio file", "line 1");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("line,x1,x2,x3,x4,x5,count", 0) != 0)
        throw ParseError("unexpected header '" + line + "'", "line 1");

    Portfolio p;
    bool line_set = false;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 7)
            throw ParseError("expected 7 fields, got " + std::to_string(fields.size()),
                             "line " + std::to_string(lineno));
        PortfolioEntry e;
        e.contract.line = product_line_from_string(fields[0]);
        for (std::size_t i = 0; i < 5; ++i)
            e.contract.x[i] = parse_double(fields[i + 1], lineno);
        const double count = parse_double(fields[6], lineno);
        if (count <= 0 || count != static_cast<double>(static_cast<std::int64_t>(count)))
            throw ParseError("count must be a positive integer, got '" + fields[6] + "'",
                             "line " + std::to_string(lineno));
        e.count = static_cast<std::int64_t>(count);
        if (!line_set) {
            p.line = e.contract.line;
            line_set = true;
        }
        try {
            if (e.contract.line != p.line)
                throw RangeError("mixed product lines in one portfolio");
            validate_contract(e.contract, allow_fractional);
        } catch (const RangeError& err) {
            throw ParseError(err.what(), "line " + std::to_string(lineno));
        }
        p.entries.push_back(e);
    }
    if (p.entries.empty())
        throw ParseError("portfolio has no entries", "line " + std::to_string(lineno));
    return p;
}

Portfolio read_portfolio_csv(const std::string& path, bool allow_fractional) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open", path);
    return read_portfolio_csv(f, allow_fractional);
}

void write_model_points_csv(const std::string& path, const Portfolio& p,
                            const std::vector<double>& weights) {
    if (weights.size() != p.entries.size())
        throw ShapeError("model points: one weight per entry required");
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing", path);
    f << "line,x1,x2,x3,x4,x5,count,weight\n";
    const std::string tag = to_string(p.line);
    for (std::size_t i = 0; i < p.entries.size(); ++i) {
        f << tag;
        for (double v : p.entries[i].contract.x) f << ',' << format_double(v);
        f << ',' << p.entries[i].count << ',' << format_double(weights[i]) << '\n';
    }
    if (!f) throw IoError("write failed", path);
}

} // namespace grouper
