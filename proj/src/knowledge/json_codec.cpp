#include "colma/knowledge/json_codec.hpp"

namespace colma::kb {

std::string to_string(Modality m) {
    switch (m) {
        case Modality::text: return "text";
        case Modality::image_descriptor: return "image_descriptor";
        case Modality::structured: return "structured";
        case Modality::event: return "event";
    }
    return "text";
}

std::string to_string(Tier t) {
    switch (t) {
        case Tier::short_term: return "short";
        case Tier::medium_term: return "medium";
        case Tier::long_term: return "long";
        case Tier::archived: return "archived";
    }
    return "short";
}

std::optional<Modality> modality_from_string(std::string_view s) {
    if (s == "text") return Modality::text;
    if (s == "image_descriptor") return Modality::image_descriptor;
    if (s == "structured") return Modality::structured;
    if (s == "event") return Modality::event;
    return std::nullopt;
}

std::optional<Tier> tier_from_string(std::string_view s) {
    if (s == "short") return Tier::short_term;
    if (s == "medium") return Tier::medium_term;
    if (s == "long") return Tier::long_term;
    if (s == "archived") return Tier::archived;
    return std::nullopt;
}

std::string canon(const Json& j) { return j.dump(); }

void put_bytes_field(Json& j, const std::string& field, const Bytes& value) {
    if (valid_utf8(value)) {
        j[field] = value;
    } else {
        j[field + "_hex"] = to_hex(value);
    }
}

Bytes get_bytes_field(const Json& j, const std::string& field) {
    if (j.contains(field)) return j.at(field).get<std::string>();
    if (j.contains(field + "_hex")) return from_hex(j.at(field + "_hex").get<std::string>());
    return {};
}

Json record_to_json(const MemoryRecord& r) {
    Json j;
    j["id"] = r.id.hex();
    j["namespace"] = r.ns;
    j["modality"] = to_string(r.modality);
    put_bytes_field(j, "content", r.content);
    if (r.embedding) {
        Json emb = Json::array();
        for (float v : *r.embedding) emb.push_back(static_cast<double>(v));
        j["embedding"] = std::move(emb);
    }
    j["created_at"] = r.created_at;
    j["last_access"] = r.last_access;
    j["access_count"] = r.access_count;
    j["salience"] = r.salience;
    j["tier"] = to_string(r.tier);
    j["version"] = r.version;
    if (r.supersedes) {
        j["supersedes"] = Json{{"id", r.supersedes->first.hex()},
                               {"version", r.supersedes->second}};
    }
    j["provenance"] = r.provenance;
    return j;
}

MemoryRecord record_from_json(const Json& j) {
    MemoryRecord r;
    auto id = RecordId::parse(j.at("id").get<std::string>());
    if (!id) throw KnowledgeError("bad record id");
    r.id = *id;
    r.ns = j.at("namespace").get<std::string>();
    auto mod = modality_from_string(j.at("modality").get<std::string>());
    if (!mod) throw KnowledgeError("bad modality");
    r.modality = *mod;
    r.content = get_bytes_field(j, "content");
    if (j.contains("embedding")) {
        std::vector<float> emb;
        for (const auto& v : j.at("embedding")) emb.push_back(v.get<float>());
        r.embedding = std::move(emb);
    }
    r.created_at = j.at("created_at").get<int64_t>();
    r.last_access = j.at("last_access").get<int64_t>();
    r.access_count = j.at("access_count").get<uint64_t>();
    r.salience = j.at("salience").get<double>();
    auto tier = tier_from_string(j.at("tier").get<std::string>());
    if (!tier) throw KnowledgeError("bad tier");
    r.tier = *tier;
    r.version = j.at("version").get<uint64_t>();
    if (j.contains("supersedes")) {
        auto sid = RecordId::parse(j.at("supersedes").at("id").get<std::string>());
        if (!sid) throw KnowledgeError("bad supersedes id");
        r.supersedes = {*sid, j.at("supersedes").at("version").get<uint64_t>()};
    }
    if (j.contains("provenance"))
        r.provenance = j.at("provenance").get<std::vector<std::string>>();
    return r;
}

Json triple_to_json(const Triple& t) {
    Json j;
    j["subject"] = t.subject;
    j["predicate"] = t.predicate;
    j["object"] = t.object;
    j["confidence"] = t.confidence;
    j["asserted_at"] = t.asserted_at;
    if (t.retracted_at) j["retracted_at"] = *t.retracted_at;
    if (t.source_record) j["source_record"] = t.source_record->hex();
    return j;
}

Triple triple_from_json(const Json& j) {
    Triple t;
    t.subject = j.at("subject").get<std::string>();
    t.predicate = j.at("predicate").get<std::string>();
    t.object = j.at("object").get<std::string>();
    t.confidence = j.value("confidence", 1.0);
    t.asserted_at = j.value("asserted_at", int64_t{0});
    if (j.contains("retracted_at")) t.retracted_at = j.at("retracted_at").get<int64_t>();
    if (j.contains("source_record")) {
        auto id = RecordId::parse(j.at("source_record").get<std::string>());
        if (!id) throw KnowledgeError("bad source_record id");
        t.source_record = *id;
    }
    return t;
}

Json fact_to_json(const Fact& f) {
    Json j;
    j["key"] = f.key;
    put_bytes_field(j, "value", f.value);
    j["updated_at"] = f.updated_at;
    return j;
}

Fact fact_from_json(const Json& j) {
    Fact f;
    f.key = j.at("key").get<std::string>();
    f.value = get_bytes_field(j, "value");
    f.updated_at = j.at("updated_at").get<int64_t>();
    return f;
}

std::string export_line(const MemoryRecord& r) {
    Json j = record_to_json(r);
    j["kind"] = "record";
    return canon(j);
}

std::string export_line(const Triple& t) {
    Json j = triple_to_json(t);
    j["kind"] = "triple";
    return canon(j);
}

std::string export_line(const Fact& f) {
    Json j = fact_to_json(f);
    j["kind"] = "fact";
    return canon(j);
}

} // namespace colma::kb
