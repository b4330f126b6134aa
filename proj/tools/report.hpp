#pragma once

// JSON assembly for CLI reports. Kept out of the library headers so the
// include/ tree has no dependency on the vendored JSON parser.

#include <json.hpp>

#include <string>
#include <vector>

#include "conflab/common.hpp"

namespace conflab::report {

inline constexpr const char* kVersion = "0.1.0";

/// One check row. The schema keeps scalar `value`/`reference` fields, so
/// multi-value library reports are expanded into several rows upstream.
inline nlohmann::json check_to_json(const CheckReport& c) {
    nlohmann::json j;
    j["name"] = c.name;
    if (c.values.size() == 1)
        j["value"] = c.values.front();
    else if (c.values.empty())
        j["value"] = nullptr;
    else
        j["value"] = c.values;
    if (c.references.size() == 1)
        j["reference"] = c.references.front();
    else if (c.references.empty())
        j["reference"] = nullptr;
    else
        j["reference"] = c.references;
    j["abs_err"] = c.abs_err;
    j["tol"] = c.tol;
    j["pass"] = c.pass;
    j["informational"] = c.informational;
    j["note"] = c.note;
    return j;
}

struct ReportDocument {
    nlohmann::json config;
    std::vector<CheckReport> checks;
    double wall_ms = 0.0;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.informational && !c.pass) return false;
        return true;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["version"] = kVersion;
        j["config"] = config;
        j["checks"] = nlohmann::json::array();
        for (const auto& c : checks) j["checks"].push_back(check_to_json(c));
        j["pass"] = pass();
        j["wall_ms"] = wall_ms;
        return j;
    }
};

/// Error document for exit-code-3 situations.
inline nlohmann::json error_document(const nlohmann::json& config, const std::string& kind,
                                     const std::string& message, double wall_ms) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["config"] = config;
    j["error"] = {{"kind", kind}, {"message", message}};
    j["pass"] = false;
    j["wall_ms"] = wall_ms;
    return j;
}

}  // namespace conflab::report
