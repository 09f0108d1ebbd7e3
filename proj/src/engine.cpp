#include "colma/engine.hpp"

#include <fstream>
#include <random>

namespace colma {

EngineConfig EngineConfig::from_json(const kb::Json& j) {
    EngineConfig c;
    c.store_dir = j.value("store_dir", std::string("colma-data"));
    c.embedding_dim = j.value("embedding_dim", size_t{64});
    c.graph_enabled = j.value("graph_layer", true);
    c.seed = j.value("seed", uint64_t{0});
    c.listen = j.value("listen", std::string("unix:colma.sock"));
    c.auth_file = j.value("auth_file", std::string());
    if (j.contains("ann")) {
        const auto& a = j.at("ann");
        c.ann.m = a.value("m", size_t{16});
        c.ann.ef_construction = a.value("ef_construction", size_t{200});
        c.ann.ef_search = a.value("ef_search", size_t{128});
    }
    if (j.contains("policy")) {
        const auto& p = j.at("policy");
        c.policy.lambda_short = p.value("lambda_short", 2.0);
        c.policy.lambda_medium = p.value("lambda_medium", 0.2);
        c.policy.lambda_long = p.value("lambda_long", 0.02);
        c.policy.promote_threshold = p.value("promote_threshold", 0.6);
        c.policy.archive_threshold = p.value("archive_threshold", 0.05);
        c.policy.short_capacity = p.value("short_capacity", size_t{64});
        c.policy.w_recency = p.value("w_recency", 0.3);
        c.policy.w_frequency = p.value("w_frequency", 0.3);
        c.policy.w_salience = p.value("w_salience", 0.4);
    }
    if (j.contains("storage")) {
        const auto& s = j.at("storage");
        c.storage.max_cell_bytes = s.value("max_cell_bytes", uint64_t{1} << 20);
        c.storage.grace_window_s = s.value("grace_window_s", int64_t{86'400});
        c.storage.retention_horizon_s = s.value("retention_horizon_s", int64_t{604'800});
        c.storage.codec = static_cast<uint8_t>(s.value("codec", 1));
        c.storage.fsync_writes = s.value("fsync_writes", false);
    }
    return c;
}

EngineConfig EngineConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    kb::Json j = kb::Json::parse(in);
    return from_json(j);
}

Engine::Engine(EngineConfig config)
    : config_(std::move(config)),
      id_rng_(config_.seed != 0 ? config_.seed
                                : splitmix64(static_cast<uint64_t>(wall_clock_us())) ^
                                      std::random_device{}()) {
    if (!config_.embedder)
        config_.embedder = scenario::make_test_embedder(config_.embedding_dim);
    config_.storage.dir = config_.store_dir;
    config_.storage.clock = config_.clock;
    store_ = storage::Store::open(config_.storage);
}

kb::RecordId Engine::gen_id() {
    std::lock_guard lk(mu_);
    kb::RecordId id;
    uint64_t hi = id_rng_.next(), lo = id_rng_.next();
    for (int i = 0; i < 8; ++i) {
        id.bytes[i] = static_cast<uint8_t>(hi >> (8 * (7 - i)));
        id.bytes[8 + i] = static_cast<uint8_t>(lo >> (8 * (7 - i)));
    }
    return id;
}

Engine::Namespace& Engine::ns(const std::string& name) {
    std::lock_guard lk(mu_);
    auto it = namespaces_.find(name);
    if (it != namespaces_.end()) return *it->second;

    auto handle = std::make_unique<Namespace>();
    kb::KbConfig kc;
    kc.embedding_dim = config_.embedding_dim;
    kc.ann = config_.ann;
    kc.graph_enabled = config_.graph_enabled;
    kc.clock = config_.clock;
    handle->base = std::make_unique<kb::KnowledgeBase>(*store_, name, kc);
    auto idgen = [this] { return gen_id(); };
    handle->coordinator = std::make_unique<coord::Coordinator>(*handle->base, config_.policy,
                                                               config_.clock, idgen);
    handle->cognition = std::make_unique<cog::Cognition>(
        *handle->base, *handle->coordinator, config_.embedder, config_.clock, idgen);
    auto [pos, ok] = namespaces_.emplace(name, std::move(handle));
    (void)ok;
    return *pos->second;
}

std::vector<std::string> Engine::namespace_names() const {
    std::vector<std::string> names;
    std::string last;
    for (const auto& pk : store_->list_partitions()) {
        if (pk.ns != last) {
            names.push_back(pk.ns);
            last = pk.ns;
        }
    }
    return names;
}

kb::Json Engine::stats() {
    kb::Json out;
    auto st = store_->stats();
    out["max_seqno"] = st.max_seqno;
    out["segments"] = st.segment_count;
    out["memtable_versions"] = st.memtable_versions;
    kb::Json spaces = kb::Json::object();
    for (const auto& name : namespace_names()) {
        auto& handle = ns(name);
        kb::Json n;
        n["records"] = handle.base->record_ids().size();
        n["triples_live"] =
            config_.graph_enabled ? handle.base->triple_count(true) : 0;
        n["triples_total"] =
            config_.graph_enabled ? handle.base->triple_count(false) : 0;
        n["facts"] = handle.base->fact_count();
        spaces[name] = std::move(n);
    }
    out["namespaces"] = std::move(spaces);
    return out;
}

} // namespace colma
