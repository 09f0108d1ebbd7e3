#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "colma/storage/segment.hpp"
#include "colma/storage/store.hpp"
#include "test_util.hpp"

#include <fstream>
#include <random>

using namespace colma;
using namespace colma::storage;
using colma::test::TempDir;

namespace {

std::vector<SegmentEntry> sample_entries(int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<SegmentEntry> entries;
    for (int i = 0; i < n; ++i) {
        SegmentEntry e;
        e.coord.partition = "ns\x1F"
                            "entity" +
                            std::to_string(rng() % 5);
        e.coord.clustering = "key-common-prefix-" + std::to_string(rng() % 100);
        e.coord.column = "col" + std::to_string(rng() % 3);
        e.version.timestamp_us = static_cast<int64_t>(rng() % 10'000);
        e.version.seqno = i + 1;
        e.version.value = "value-" + std::to_string(rng());
        e.version.tombstone = rng() % 13 == 0;
        if (e.version.tombstone) e.version.value.clear();
        entries.push_back(std::move(e));
    }
    std::sort(entries.begin(), entries.end());
    return entries;
}

std::vector<SegmentEntry> read_all(const std::string& path) {
    SegmentReader r;
    r.open(path, 1);
    std::vector<SegmentEntry> out;
    r.scan_all([&](const SegmentEntry& e) { out.push_back(e); });
    return out;
}

bool same_entries(const std::vector<SegmentEntry>& a, const std::vector<SegmentEntry>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (!(a[i].coord == b[i].coord)) return false;
        if (!(a[i].version == b[i].version)) return false;
    }
    return true;
}

} // namespace

TEST_CASE("codec 1 decodes to the same contents as codec 0") {
    TempDir dir("seg-codec");
    auto entries = sample_entries(500, 7);
    std::string p0 = dir.str() + "/seg-1.colm";
    std::string p1 = dir.str() + "/seg-2.colm";
    REQUIRE(write_segment(p0, 1, 0, entries, nullptr));
    REQUIRE(write_segment(p1, 2, 1, entries, nullptr));

    auto from0 = read_all(p0);
    auto from1 = read_all(p1);
    CHECK(same_entries(from0, from1));
    CHECK(same_entries(from0, entries));

    // Prefix coding should actually shrink the file for these keys.
    CHECK(std::filesystem::file_size(p1) < std::filesystem::file_size(p0));
}

TEST_CASE("segment scan respects coordinate bounds") {
    TempDir dir("seg-scan");
    auto entries = sample_entries(300, 11);
    std::string path = dir.str() + "/seg-1.colm";
    REQUIRE(write_segment(path, 1, 1, entries, nullptr));

    SegmentReader r;
    r.open(path, 1);
    CoordBound low{entries[50].coord.partition, entries[50].coord.clustering, std::nullopt};
    CoordBound high{entries[50].coord.partition, std::nullopt, std::nullopt};
    std::vector<SegmentEntry> got;
    r.scan(low, high, [&](const SegmentEntry& e) { got.push_back(e); });

    std::vector<SegmentEntry> expect;
    for (const auto& e : entries)
        if (!coord_before_low(e.coord, low) && !coord_after_high(e.coord, high))
            expect.push_back(e);
    CHECK(same_entries(got, expect));
}

TEST_CASE("a corrupted block fails reads and store open") {
    TempDir dir("seg-corrupt");
    StoreConfig cfg;
    cfg.dir = dir.str();
    {
        auto store = Store::open(cfg);
        for (int i = 0; i < 50; ++i) {
            Cell c;
            c.clustering = "k" + std::to_string(i);
            c.column = "c";
            c.value = "v" + std::to_string(i);
            c.timestamp_us = i + 1;
            store->put({"ns", "e"}, c);
        }
        store->flush();
    }
    std::string seg = dir.str() + "/seg-1.colm";
    REQUIRE(std::filesystem::exists(seg));
    {
        std::fstream f(seg, std::ios::in | std::ios::out | std::ios::binary);
        f.seekg(40);  // inside the first block payload
        char byte = 0;
        f.read(&byte, 1);
        byte = static_cast<char>(byte ^ 0xFF);
        f.seekp(40);
        f.write(&byte, 1);
    }
    CHECK_THROWS_AS(Store::open(cfg), IntegrityError);
}
