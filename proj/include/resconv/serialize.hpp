#pragma once

#include <string>

#include <json.hpp>

#include "resconv/cnn.hpp"
#include "resconv/compiler.hpp"
#include "resconv/complexity.hpp"
#include "resconv/experiments.hpp"
#include "resconv/fnn.hpp"

namespace resconv {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Every document carries {"schema": "resconv.<kind>", "version": 1}.
json to_json(const BlockSparseFnn& f);
json to_json(const ResNetCnn& net);
json to_json(const CompilationCertificate& c);
json to_json(const ArchSummary& a);
json to_json(const ComplexityReport& r);
json to_json(const LipschitzReport& r);
json to_json(const RateReport& r);

BlockSparseFnn fnn_from_json(const json& j);
ResNetCnn cnn_from_json(const json& j);
ArchSummary arch_from_json(const json& j);  // also accepts a cnn document

std::string schema_of(const json& j);
json parse_json(const std::string& text);
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace resconv
