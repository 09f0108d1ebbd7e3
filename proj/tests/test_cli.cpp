#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_util.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

using colma::test::TempDir;

namespace {

std::string sh(const std::string& cmd, int* exit_code = nullptr) {
    FILE* pipe = ::popen((cmd + " 2>/dev/null").c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = ::fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
    int rc = ::pclose(pipe);
    if (exit_code) *exit_code = WEXITSTATUS(rc);
    return out;
}

std::string cli() { return COLMA_CLI_PATH; }

void write_config(const std::string& path, const std::string& store_dir) {
    std::ofstream out(path);
    out << R"({"store_dir":")" << store_dir << R"(","seed":77})";
}

} // namespace

TEST_CASE("exit codes: 0 success, 1 usage error, 2 engine error") {
    int rc = 0;
    sh(cli() + " --help", &rc);
    CHECK(rc == 0);
    sh(cli() + " scenario", &rc);  // missing required argument
    CHECK(rc == 1);
    sh(cli() + " --bogus-flag stats", &rc);
    CHECK(rc == 1);
    sh(cli() + " --config /nonexistent/cfg.json stats", &rc);
    CHECK(rc == 2);
    sh(cli() + " scenario S1 --seed 4", &rc);
    CHECK(rc == 0);
}

TEST_CASE("export then import into a fresh store round-trips byte-identically") {
    TempDir work("cli-roundtrip");
    std::string cfg_a = work.str() + "/a.json", cfg_b = work.str() + "/b.json";
    write_config(cfg_a, work.str() + "/store-a");
    write_config(cfg_b, work.str() + "/store-b");

    // Seed through ingest (records) plus a triple-bearing JSONL line.
    std::string data = work.str() + "/in.jsonl";
    {
        std::ofstream out(data);
        out << R"({"content":"alpha note","modality":"text"})" << "\n";
        out << R"({"content":"beta note","modality":"text"})" << "\n";
        out << R"({"kind":"triple","subject":"ent:a","predicate":"knows","object":"ent:b","asserted_at":5})"
            << "\n";
        out << R"({"kind":"fact","key":"color","value":"red","updated_at":9})" << "\n";
    }
    int rc = 0;
    sh(cli() + " --config " + cfg_a + " ingest " + data + " --namespace team", &rc);
    REQUIRE(rc == 0);

    std::string exp_a = sh(cli() + " --config " + cfg_a + " export --namespace team", &rc);
    REQUIRE(rc == 0);
    REQUIRE(!exp_a.empty());

    std::string dump = work.str() + "/dump.jsonl";
    {
        std::ofstream out(dump);
        out << exp_a;
    }
    sh(cli() + " --config " + cfg_b + " import " + dump + " --namespace team", &rc);
    REQUIRE(rc == 0);
    std::string exp_b = sh(cli() + " --config " + cfg_b + " export --namespace team", &rc);
    CHECK(exp_a == exp_b);
}

TEST_CASE("COLMA_CONFIG env var supplies the config") {
    TempDir work("cli-env");
    std::string cfg = work.str() + "/cfg.json";
    write_config(cfg, work.str() + "/store");
    int rc = 0;
    std::string out = sh("COLMA_CONFIG=" + cfg + " " + cli() + " stats", &rc);
    CHECK(rc == 0);
    CHECK(out.find("max_seqno") != std::string::npos);
}

TEST_CASE("query subcommand covers both triple patterns and vector search") {
    TempDir work("cli-query");
    std::string cfg = work.str() + "/cfg.json";
    write_config(cfg, work.str() + "/store");
    std::string data = work.str() + "/in.jsonl";
    {
        std::ofstream out(data);
        out << R"({"kind":"triple","subject":"ent:m1","predicate":"isA","object":"ent:mushroom","asserted_at":2})"
            << "\n";
    }
    int rc = 0;
    sh(cli() + " --config " + cfg + " ingest " + data + " --namespace team", &rc);
    REQUIRE(rc == 0);
    std::string out =
        sh(cli() + " --config " + cfg + " query --namespace team --pattern 'ent:m1,,'", &rc);
    CHECK(rc == 0);
    CHECK(out.find("ent:mushroom") != std::string::npos);
}
