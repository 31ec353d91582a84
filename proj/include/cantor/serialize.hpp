#pragma once
// JSON encodings of schemes, systems, artifacts and reports. Objects are
// keyed maps, so a dump lists keys in sorted order and is byte-stable.

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cantor/exact.hpp"
#include "cantor/interval_embed.hpp"
#include "cantor/metric_systems.hpp"

namespace cantor {

using Json = nlohmann::json;

/// Input that does not match the expected document layout.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// {"mantissa","pow2","pow3"} with mantissa prime to 6 when the denominator
/// is 3-smooth, otherwise {"num","den"}; integers are decimal strings.
Json to_json(const Scalar& x);
Scalar scalar_from_json(const Json& j);

Json to_json(const Interval& I);
Interval interval_from_json(const Json& j);

Json to_json(const OdometerSpec& spec);
OdometerSpec odometer_spec_from_json(const Json& j);

/// Records s_1..s_depth (vertex counts for graph sources) next to the rule.
Json source_to_json(const SchemeSource& source, std::size_t depth);
SchemeSource source_from_json(const Json& j);

Json to_json(const EmbeddingScheme& scheme);
EmbeddingScheme scheme_from_json(const Json& j);

Json to_json(const FinitePointSystem& sys);
FinitePointSystem system_from_json(const Json& j);

Json to_json(const ExtensionSystem& ext);
/// Rebuilds from the recorded descriptor and checks the stored data against it.
ExtensionSystem extension_from_json(const Json& j);

Json to_json(const DeformedTripleSystem& sys);
DeformedTripleSystem fixed_point_from_json(const Json& j);

Json to_json(const CheckReport& rep);
Json to_json(const SchemeAudit& audit);
Json to_json(const RatioReport& rep);
Json to_json(const LrsPairReport& rep);
Json to_json(const OracleReport& rep);

/// Report document {"check","pass","witnesses","margins", ...extra}.
Json make_report(const std::string& check, bool pass, Json witnesses, Json margins,
                 Json extra = Json::object());

/// Two-space indented dump with a trailing newline.
std::string canonical_dump(const Json& j);
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace cantor
