#pragma once
// Injectable microsecond clock. Scenarios and tests drive a synthetic
// clock so every timestamp-dependent behavior is reproducible.

#include <chrono>
#include <cstdint>
#include <functional>

namespace colma {

using Clock = std::function<int64_t()>;

inline int64_t wall_clock_us() {
    return std::chrono::duration_cast<std::chrono::microseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

constexpr int64_t kMicrosPerSecond = 1'000'000;
constexpr double kMicrosPerDay = 86'400.0 * 1e6;

} // namespace colma
