#include "grouper/errors.hpp"
#include "grouper/surrogate.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace grouper {

std::string ensemble_to_json(const SurrogateEnsemble& ens) {
    nlohmann::json j;
    j["members"] = nlohmann::json::array();
    j["losses"] = nlohmann::json::array();
    for (std::size_t k = 0; k < ens.members.size(); ++k) {
        j["members"].push_back(nlohmann::json::parse(network_to_json(ens.members[k])));
        j["losses"].push_back(to_string(ens.member_losses[k]));
    }
    return j.dump();
}

SurrogateEnsemble ensemble_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid ensemble JSON: ") + e.what(), "document");
    }
    if (!j.contains("members") || !j["members"].is_array())
        throw ParseError("missing field 'members'", "document");
    if (!j.contains("losses") || !j["losses"].is_array())
        throw ParseError("missing field 'losses'", "document");

    SurrogateEnsemble ens;
    for (std::size_t k = 0; k < j["members"].size(); ++k)
        ens.members.push_back(network_from_json(j["members"][k].dump()));
    for (std::size_t k = 0; k < j["losses"].size(); ++k)
        ens.member_losses.push_back(loss_kind_from_string(j["losses"][k].get<std::string>()));
    ens.validate();
    return ens;
}

SurrogateEnsemble load_ensemble(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open", path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ensemble_from_json(ss.str());
}

void save_ensemble(const std::string& path, const SurrogateEnsemble& ens) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing", path);
    f << ensemble_to_json(ens);
    if (!f) throw IoError("write failed", path);
}

} // namespace grouper
