#pragma once
// Engine: one store, per-namespace knowledge/coordination/cognition stacks.
// Namespaces are the isolation unit for permissions, embedding dimension,
// and data partitioning. A seeded engine (ids + synthetic clock) behaves
// bit-reproducibly, which the scenario harness relies on.

#include "colma/cognition/cognition.hpp"
#include "colma/common/hash.hpp"
#include "colma/coordination/coordinator.hpp"
#include "colma/knowledge/json_codec.hpp"
#include "colma/knowledge/knowledge_base.hpp"
#include "colma/scenario/embedder.hpp"
#include "colma/storage/store.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace colma {

struct EngineConfig {
    std::string store_dir;
    size_t embedding_dim = 64;
    kb::AnnParams ann;
    bool graph_enabled = true;
    coord::RetentionPolicy policy;
    storage::StoreConfig storage;
    uint64_t seed = 0;  // 0 = wall-clock-derived ids
    Clock clock = wall_clock_us;
    scenario::Embedder embedder;  // defaults to the deterministic test embedder

    // service settings (used by serve/CLI)
    std::string listen = "unix:colma.sock";  // "unix:<path>" or "<host>:<port>"
    std::string auth_file;

    static EngineConfig from_json(const kb::Json& j);
    static EngineConfig load_file(const std::string& path);
};

class Engine {
public:
    explicit Engine(EngineConfig config);

    struct Namespace {
        std::unique_ptr<kb::KnowledgeBase> base;
        std::unique_ptr<coord::Coordinator> coordinator;
        std::unique_ptr<cog::Cognition> cognition;
    };

    // Creates the namespace stack lazily.
    Namespace& ns(const std::string& name);

    storage::Store& store() { return *store_; }
    const EngineConfig& config() const { return config_; }
    kb::RecordId gen_id();
    int64_t now() const { return config_.clock(); }

    std::vector<std::string> namespace_names() const;
    kb::Json stats();

private:
    EngineConfig config_;
    std::unique_ptr<storage::Store> store_;
    std::map<std::string, std::unique_ptr<Namespace>> namespaces_;
    SplitMix id_rng_;
    std::mutex mu_;
};

} // namespace colma
