#include "colma/knowledge/vector_index.hpp"

#include "colma/common/hash.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace colma::kb {

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) throw KnowledgeError("dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
        na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
    }
    if (na == 0.0 || nb == 0.0) throw KnowledgeError("undefined direction");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

double l2_norm(const std::vector<float>& v) {
    double n = 0.0;
    for (float x : v) n += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(n);
}

} // namespace

VectorIndex::VectorIndex(size_t dim, AnnParams params)
    : dim_(dim), params_(params), level_mult_(1.0 / std::log(static_cast<double>(params.m))) {}

double VectorIndex::sim(const std::vector<float>& q, double qnorm, uint32_t node) const {
    const Node& n = nodes_[node];
    double dot = 0.0;
    for (size_t i = 0; i < dim_; ++i)
        dot += static_cast<double>(q[i]) * static_cast<double>(n.vec[i]);
    return dot / (qnorm * n.norm);
}

int VectorIndex::draw_level() {
    // Deterministic level draw: hash of insertion ordinal.
    double u = 0.0;
    do {
        u = static_cast<double>(splitmix64(params_.level_seed ^ inserts_) >> 11) * 0x1.0p-53;
        ++inserts_;
    } while (u <= 0.0);
    return static_cast<int>(-std::log(u) * level_mult_);
}

std::vector<uint32_t> VectorIndex::search_layer(const std::vector<float>& q, double qnorm,
                                                uint32_t entry, size_t ef, int layer) const {
    // Classic beam search: max-heap of candidates, min-heap of results.
    std::unordered_set<uint32_t> visited{entry};
    using Scored = std::pair<double, uint32_t>;
    std::priority_queue<Scored> candidates;  // best first
    std::priority_queue<Scored, std::vector<Scored>, std::greater<>> best;  // worst first
    double d0 = sim(q, qnorm, entry);
    candidates.push({d0, entry});
    best.push({d0, entry});

    while (!candidates.empty()) {
        auto [d, c] = candidates.top();
        candidates.pop();
        if (best.size() >= ef && d < best.top().first) break;
        for (uint32_t nb : nodes_[c].links[layer]) {
            if (!visited.insert(nb).second) continue;
            double dn = sim(q, qnorm, nb);
            if (best.size() < ef || dn > best.top().first) {
                candidates.push({dn, nb});
                best.push({dn, nb});
                if (best.size() > ef) best.pop();
            }
        }
    }
    std::vector<uint32_t> out;
    out.reserve(best.size());
    while (!best.empty()) {
        out.push_back(best.top().second);
        best.pop();
    }
    std::reverse(out.begin(), out.end());  // best first
    return out;
}

std::vector<uint32_t> VectorIndex::select_neighbors(uint32_t node,
                                                    const std::vector<uint32_t>& candidates,
                                                    size_t max_links) const {
    // Diversity pruning: keep a candidate only when it is closer to the
    // node than to any already-kept neighbor, then backfill with the best
    // pruned ones. Plain top-M links collapse into hubs and cost recall.
    const auto& nv = nodes_[node].vec;
    double nnorm = nodes_[node].norm;
    std::vector<std::pair<double, uint32_t>> ordered;
    ordered.reserve(candidates.size());
    for (uint32_t c : candidates)
        if (c != node) ordered.emplace_back(sim(nv, nnorm, c), c);
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    std::vector<uint32_t> kept;
    for (const auto& [to_node, c] : ordered) {
        if (kept.size() >= max_links) break;
        bool diverse = true;
        const auto& cv = nodes_[c].vec;
        double cnorm = nodes_[c].norm;
        for (uint32_t r : kept) {
            if (sim(cv, cnorm, r) > to_node) {  // c reaches r more easily than the node
                diverse = false;
                break;
            }
        }
        if (diverse) kept.push_back(c);
    }
    return kept;
}

void VectorIndex::connect(uint32_t node, int layer, const std::vector<uint32_t>& candidates,
                          const std::vector<float>& q, double qnorm) {
    (void)q;
    (void)qnorm;
    size_t max_links = layer == 0 ? params_.m * 2 : params_.m;
    auto& links = nodes_[node].links[layer];
    links = select_neighbors(node, candidates, max_links);
    for (uint32_t c : links) {
        auto& back = nodes_[c].links[layer];
        if (std::find(back.begin(), back.end(), node) == back.end()) back.push_back(node);
        if (back.size() > max_links) back = select_neighbors(c, back, max_links);
    }
}

void VectorIndex::upsert(const RecordId& id, const std::vector<float>& vec) {
    if (vec.size() != dim_) throw KnowledgeError("dimension mismatch");
    for (float v : vec)
        if (!std::isfinite(v)) throw KnowledgeError("embedding components must be finite");
    double norm = l2_norm(vec);
    if (norm == 0.0) throw KnowledgeError("undefined direction");

    auto it = by_id_.find(id);
    if (it != by_id_.end()) {
        // Replace: tombstone the old node, insert fresh (graph stays valid).
        if (!nodes_[it->second].dead) {
            nodes_[it->second].dead = true;
            --live_count_;
        }
        by_id_.erase(it);
    }

    Node n;
    n.id = id;
    n.vec = vec;
    n.norm = norm;
    n.level = draw_level();
    n.links.resize(static_cast<size_t>(n.level) + 1);
    uint32_t idx = static_cast<uint32_t>(nodes_.size());

    if (max_level_ < 0) {
        nodes_.push_back(std::move(n));
        by_id_[id] = idx;
        ++live_count_;
        max_level_ = nodes_[idx].level;
        entry_point_ = idx;
        return;
    }

    uint32_t ep = entry_point_;
    // Greedy descent through layers above the node's level.
    for (int layer = max_level_; layer > n.level; --layer) {
        bool improved = true;
        double best = sim(vec, norm, ep);
        while (improved) {
            improved = false;
            for (uint32_t nb : nodes_[ep].links[layer]) {
                double s = sim(vec, norm, nb);
                if (s > best) {
                    best = s;
                    ep = nb;
                    improved = true;
                }
            }
        }
    }

    nodes_.push_back(std::move(n));
    by_id_[id] = idx;
    ++live_count_;
    Node& inserted = nodes_[idx];

    for (int layer = std::min(inserted.level, max_level_); layer >= 0; --layer) {
        auto found = search_layer(vec, inserted.norm, ep, params_.ef_construction, layer);
        connect(idx, layer, found, vec, inserted.norm);
        if (!found.empty()) ep = found.front();
    }
    if (inserted.level > max_level_) {
        max_level_ = inserted.level;
        entry_point_ = idx;
    }
}

void VectorIndex::erase(const RecordId& id) {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return;
    if (!nodes_[it->second].dead) {
        nodes_[it->second].dead = true;
        --live_count_;
    }
    by_id_.erase(it);
}

bool VectorIndex::contains(const RecordId& id) const { return by_id_.count(id) > 0; }

std::optional<std::vector<float>> VectorIndex::vector_of(const RecordId& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return nodes_[it->second].vec;
}

std::vector<ScoredId> VectorIndex::knn(const std::vector<float>& query, size_t k,
                                       KnnMode mode) const {
    if (query.size() != dim_) throw KnowledgeError("dimension mismatch");
    double qnorm = l2_norm(query);
    if (qnorm == 0.0) throw KnowledgeError("undefined direction");

    std::vector<ScoredId> scored;
    if (mode == KnnMode::exact || live_count_ == 0) {
        scored.reserve(by_id_.size());
        for (const auto& [id, idx] : by_id_) {
            if (nodes_[idx].dead) continue;
            scored.push_back({id, sim(query, qnorm, idx)});
        }
    } else {
        // Over-fetch so tombstoned routing nodes don't starve results.
        size_t ef = std::max(params_.ef_search, k * 2);
        uint32_t ep = entry_point_;
        for (int layer = max_level_; layer > 0; --layer) {
            bool improved = true;
            double best = sim(query, qnorm, ep);
            while (improved) {
                improved = false;
                for (uint32_t nb : nodes_[ep].links[layer]) {
                    double s = sim(query, qnorm, nb);
                    if (s > best) {
                        best = s;
                        ep = nb;
                        improved = true;
                    }
                }
            }
        }
        for (uint32_t idx : search_layer(query, qnorm, ep, ef, 0)) {
            if (nodes_[idx].dead) continue;
            scored.push_back({nodes_[idx].id, sim(query, qnorm, idx)});
        }
    }
    std::sort(scored.begin(), scored.end(), scored_before);
    if (scored.size() > k) scored.resize(k);
    return scored;
}

} // namespace colma::kb
