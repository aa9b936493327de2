#pragma once

// Machine-readable reports. Every report is a JSON object with a fixed key
// order:
//
//   {
//     "tool": "freerel", "schema": 1,
//     "command": "...", "field": "F_p" | "Q",
//     "group": "GL" | "O" | "Sp" | null, "n": [...] ,
//     "exploratory": bool,
//     ... command-specific keys ...,
//     "verdict": bool | null
//   }
//
// Polynomials and sigma-expressions are stored as their canonical text.

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "freerel/error.hpp"
#include "freerel/eval.hpp"

namespace freerel {

using Json = nlohmann::ordered_json;

inline Json report_header(const std::string& command, const std::string& field_name,
                          std::optional<GroupKind> group, const std::vector<std::size_t>& ns, bool exploratory) {
    Json j;
    j["tool"] = "freerel";
    j["schema"] = 1;
    j["command"] = command;
    j["field"] = field_name;
    j["group"] = group ? Json(group_name(*group)) : Json(nullptr);
    j["n"] = ns;
    j["exploratory"] = exploratory;
    return j;
}

inline Json certificate_json(const CertificateReport& r) {
    Json j;
    j["basis_size"] = r.basis_size;
    j["rank"] = r.rank;
    j["blocks"] = r.blocks;
    j["stored_nonzeros"] = r.nonzeros;
    j["independent"] = r.independent();
    Json dep = Json::array();
    for (const auto& m : r.dependent) dep.push_back(m.str());
    j["dependent_rows"] = dep;
    return j;
}

inline Json relation_json(const RelationReport& r) {
    Json j;
    Json per = Json::array();
    for (const auto& [n, rel] : r.per_n) per.push_back(Json{{"n", n}, {"relation", rel}});
    j["per_n"] = per;
    j["relation_at_all_tested_n"] = r.relation_at_all_tested_n();
    j["fails_at"] = r.fails_at ? Json(*r.fails_at) : Json(nullptr);
    return j;
}

inline void write_report_file(const std::string& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot open report file '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw DomainError("failed writing report file '" + path + "'");
}

}  // namespace freerel
