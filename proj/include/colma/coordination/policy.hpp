#pragma once
// Retention policy: bounded convex combination of recency decay, saturating
// access frequency, and salience. Scores live in [0, 1] so the promote and
// archive thresholds compare across tiers.

#include "colma/knowledge/types.hpp"

#include <cmath>
#include <stdexcept>

namespace colma::coord {

struct PolicyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RetentionPolicy {
    double lambda_short = 2.0;    // decay per day
    double lambda_medium = 0.2;
    double lambda_long = 0.02;
    double promote_threshold = 0.6;
    double archive_threshold = 0.05;
    size_t short_capacity = 64;
    double w_recency = 0.3;
    double w_frequency = 0.3;
    double w_salience = 0.4;

    void validate() const {
        if (!(lambda_short > lambda_medium && lambda_medium > lambda_long && lambda_long > 0))
            throw PolicyError("decay rates must satisfy short > medium > long > 0");
        if (!(archive_threshold > 0 && archive_threshold < promote_threshold &&
              promote_threshold < 1))
            throw PolicyError("thresholds must satisfy 0 < archive < promote < 1");
        if (w_recency < 0 || w_frequency < 0 || w_salience < 0 ||
            std::abs(w_recency + w_frequency + w_salience - 1.0) > 1e-9)
            throw PolicyError("weights must be non-negative and sum to 1");
        if (short_capacity == 0) throw PolicyError("short capacity must be positive");
    }

    double lambda_for(kb::Tier tier) const {
        switch (tier) {
            case kb::Tier::short_term: return lambda_short;
            case kb::Tier::medium_term: return lambda_medium;
            case kb::Tier::long_term:
            case kb::Tier::archived: return lambda_long;
        }
        return lambda_long;
    }
};

// R = w_r * exp(-lambda_tier * dt_days)
//   + w_f * (1 - exp(-access_count / 5))
//   + w_s * salience
inline double retention_score(const RetentionPolicy& p, kb::Tier tier, int64_t last_access_us,
                              uint64_t access_count, double salience, int64_t now_us) {
    double dt_days = static_cast<double>(now_us - last_access_us) / (86'400.0 * 1e6);
    if (dt_days < 0) dt_days = 0;
    double recency = std::exp(-p.lambda_for(tier) * dt_days);
    double frequency = 1.0 - std::exp(-static_cast<double>(access_count) / 5.0);
    return p.w_recency * recency + p.w_frequency * frequency + p.w_salience * salience;
}

inline double retention_score(const RetentionPolicy& p, const kb::MemoryRecord& r,
                              int64_t now_us) {
    return retention_score(p, r.tier, r.last_access, r.access_count, r.salience, now_us);
}

} // namespace colma::coord
