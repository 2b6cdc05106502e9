#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "modalnet/controllability.hpp"
#include "modalnet/modes.hpp"
#include "modalnet/protocol.hpp"

namespace modalnet {

inline constexpr const char* kReportSchema = "modalnet/1";

nlohmann::json complex_json(Complex z);
Complex complex_from_json(const nlohmann::json& j);
nlohmann::json matrix_json(const CMatrix& m);
nlohmann::json matrix_json(const RMatrix& m);

nlohmann::json to_json(const ModeCatalog& catalog);
nlohmann::json to_json(const PartitionCheck& check);
nlohmann::json to_json(const OracleResult& oracle);
nlohmann::json to_json(const ProtocolCertificate& cert);
nlohmann::json to_json(const ProtocolDesign& design);
nlohmann::json to_json(const ControllabilityReport& report);

/// Wraps a payload as {"schema": ..., "command": ..., <payload fields>}.
nlohmann::json envelope(const std::string& command, nlohmann::json payload);

/// Plain-language rules explaining which condition binds and why.
std::vector<std::string> narrative(const ControllabilityReport& report);

/// "CONTROLLABLE" or "UNCONTROLLABLE: <first reason>".
std::string check_line(const ControllabilityReport& report);

std::string render_text(const ControllabilityReport& report);
std::string render_text(const ModeCatalog& catalog);
std::string render_text(const ProtocolDesign& design);

}  // namespace modalnet
