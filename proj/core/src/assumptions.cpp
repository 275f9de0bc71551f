#include "grouper/assumptions.hpp"

#include "grouper/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace grouper {

double survival_prob(const MortalityModel& m, double age, double t) {
    return std::exp(-m.A * t -
                    m.B / std::log(m.c) * std::pow(m.c, age) * (std::pow(m.c, t) - 1.0));
}

double death_prob(const MortalityModel& m, double age) {
    return 1.0 - survival_prob(m, age, 1.0);
}

void ValuationAssumptions::validate() const {
    if (mortality.A < 0.0 || mortality.B < 0.0 || mortality.c <= 1.0)
        throw RangeError("mortality model requires A >= 0, B >= 0, c > 1");
    for (double r : retirement.rates)
        if (r < 0.0 || r > 1.0)
            throw RangeError("retirement rate outside [0,1]");
    if (dc_fund_rate <= -1.0)
        throw RangeError("dc fund rate must exceed -1");
}

std::string assumptions_to_json(const ValuationAssumptions& a) {
    nlohmann::json j;
    j["A"] = a.mortality.A;
    j["B"] = a.mortality.B;
    j["c"] = a.mortality.c;
    j["rr"] = a.retirement.rates;
    j["i"] = a.dc_fund_rate;
    return j.dump(2);
}

ValuationAssumptions assumptions_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid assumptions JSON: ") + e.what(), "document");
    }
    ValuationAssumptions a;
    for (const char* field : {"A", "B", "c", "i"})
        if (!j.contains(field)) throw ParseError("missing field", std::string(field));
    a.mortality.A = j["A"].get<double>();
    a.mortality.B = j["B"].get<double>();
    a.mortality.c = j["c"].get<double>();
    a.dc_fund_rate = j["i"].get<double>();
    if (j.contains("rr")) {
        const auto& rr = j["rr"];
        if (!rr.is_array() || rr.size() != 7)
            throw ParseError("rr must be an array of 7 rates (ages 60..66)", "rr");
        for (std::size_t k = 0; k < 7; ++k)
            a.retirement.rates[k] = rr[k].get<double>();
    }
    a.validate();
    return a;
}

ValuationAssumptions load_assumptions(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open", path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return assumptions_from_json(ss.str());
}

} // namespace grouper
