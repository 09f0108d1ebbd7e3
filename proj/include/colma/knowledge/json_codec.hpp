#pragma once
// Canonical JSON encoding for records, triples, and facts.
//
// Canonical = sorted object keys, no insignificant whitespace, lowercase
// hex ids; byte-strings go through "field" when valid UTF-8 and
// "field_hex" otherwise, so exports stay lossless and byte-comparable.
// The JSONL export format tags each line with a "kind" field.

#include "colma/knowledge/types.hpp"

#include "json.hpp"

namespace colma::kb {

using Json = nlohmann::json;

Json record_to_json(const MemoryRecord& r);
MemoryRecord record_from_json(const Json& j);  // throws KnowledgeError on bad input

Json triple_to_json(const Triple& t);
Triple triple_from_json(const Json& j);

Json fact_to_json(const Fact& f);
Fact fact_from_json(const Json& j);

// JSONL line with "kind": record | triple | fact.
std::string export_line(const MemoryRecord& r);
std::string export_line(const Triple& t);
std::string export_line(const Fact& f);

// Byte-string <-> JSON field pair helpers.
void put_bytes_field(Json& j, const std::string& field, const Bytes& value);
Bytes get_bytes_field(const Json& j, const std::string& field);

std::string canon(const Json& j);  // canonical dump

} // namespace colma::kb
