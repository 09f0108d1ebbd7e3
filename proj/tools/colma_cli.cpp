// colma: administrative CLI for the layered memory engine.
//
// Subcommands: serve, ingest, query, tick, export, import, scenario, eval,
// stats. Exit codes: 0 success, 1 usage error, 2 engine error.

#include "colma/engine.hpp"
#include "colma/scenario/capability.hpp"
#include "colma/scenario/scenarios.hpp"
#include "colma/service/net_server.hpp"

#include "CLI11.hpp"

#include <unistd.h>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using namespace colma;

namespace {

std::atomic<bool> g_stop{false};
void handle_signal(int) { g_stop = true; }

EngineConfig resolve_config(const std::string& config_path) {
    std::string path = config_path;
    if (path.empty()) {
        const char* env = std::getenv("COLMA_CONFIG");
        if (env) path = env;
    }
    if (path.empty()) {
        EngineConfig c;
        c.store_dir = "colma-data";
        return c;
    }
    return EngineConfig::load_file(path);
}

std::unique_ptr<std::istream> open_input(const std::string& file) {
    if (file.empty() || file == "-") return nullptr;  // caller uses stdin
    auto in = std::make_unique<std::ifstream>(file);
    if (!*in) throw std::runtime_error("cannot open input file: " + file);
    return in;
}

int run_serve(const EngineConfig& config) {
    if (config.auth_file.empty())
        throw std::runtime_error("serve requires auth_file in the config");
    Engine engine(config);
    service::ServiceCore core(engine, service::load_auth_file(config.auth_file));
    service::NetServer server(core, config.listen);
    server.start();
    std::cerr << "colma serving on " << server.endpoint() << "\n";
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop) ::usleep(100'000);
    server.stop();
    return 0;
}

int run_ingest(const EngineConfig& config, const std::string& ns, const std::string& file) {
    Engine engine(config);
    auto& h = engine.ns(ns);
    auto in = open_input(file);
    std::istream& stream = in ? *in : std::cin;
    size_t count = 0;
    std::string line;
    while (std::getline(stream, line)) {
        if (line.empty()) continue;
        kb::Json j = kb::Json::parse(line);
        if (!j.contains("kind")) j["kind"] = "record";
        if (j.at("kind") == "record") {
            if (!j.contains("id")) j["id"] = engine.gen_id().hex();
            if (!j.contains("namespace")) j["namespace"] = ns;
            if (!j.contains("created_at")) j["created_at"] = engine.now();
            if (!j.contains("last_access")) j["last_access"] = j["created_at"];
            if (!j.contains("access_count")) j["access_count"] = 0;
            if (!j.contains("salience")) j["salience"] = 0.5;
            if (!j.contains("tier")) j["tier"] = "short";
            if (!j.contains("version")) j["version"] = 1;
            if (!j.contains("modality")) j["modality"] = "text";
        }
        std::istringstream one(j.dump() + "\n");
        h.base->import_jsonl(one);
        ++count;
    }
    std::cout << count << " lines ingested into " << ns << "\n";
    return 0;
}

int run_query(Engine& engine, const std::string& ns, const std::string& pattern,
              const std::string& text, size_t k, const std::string& mode, int64_t as_of) {
    auto& h = engine.ns(ns);
    if (!text.empty()) {
        auto hits = h.base->knn(engine.config().embedder(text), k,
                                mode == "approx" ? kb::KnnMode::approx : kb::KnnMode::exact);
        for (const auto& hit : hits) {
            kb::Json j{{"id", hit.id.hex()}, {"score", hit.score}};
            if (auto r = h.base->peek_record(hit.id)) j["content"] = r->content;
            std::cout << j.dump() << "\n";
        }
        return 0;
    }
    kb::TriplePattern p;
    std::stringstream ss(pattern);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, ',')) parts.push_back(part);
    parts.resize(3);
    if (!parts[0].empty() && parts[0] != "?") p.subject = parts[0];
    if (!parts[1].empty() && parts[1] != "?") p.predicate = parts[1];
    if (!parts[2].empty() && parts[2] != "?") p.object = parts[2];
    std::optional<int64_t> at;
    if (as_of > 0) at = as_of;
    for (const auto& t : h.base->query_triples(p, at))
        std::cout << kb::export_line(t) << "\n";
    return 0;
}

int run_export(Engine& engine, const std::string& ns, const std::string& out_path) {
    auto& h = engine.ns(ns);
    if (out_path.empty() || out_path == "-") {
        h.base->export_jsonl(std::cout);
    } else {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open output file: " + out_path);
        h.base->export_jsonl(out);
    }
    return 0;
}

int run_import(Engine& engine, const std::string& ns, const std::string& file) {
    auto& h = engine.ns(ns);
    auto in = open_input(file);
    size_t n = h.base->import_jsonl(in ? *in : std::cin);
    std::cout << n << " lines imported into " << ns << "\n";
    return 0;
}

int run_tick(Engine& engine, const std::string& ns, int64_t now_us, bool forget,
             const std::string& format) {
    auto& h = engine.ns(ns);
    int64_t now = now_us > 0 ? now_us : engine.now();
    auto report = h.coordinator->consolidate_tick(now);
    std::vector<kb::RecordId> forgotten;
    if (forget) forgotten = h.coordinator->forget_tick(now);
    kb::Json promoted = kb::Json::array();
    for (const auto& p : report.promoted)
        promoted.push_back(kb::Json::array(
            {p.id.hex(), kb::to_string(p.from), kb::to_string(p.to)}));
    kb::Json archived = kb::Json::array();
    for (const auto& id : report.archived) archived.push_back(id.hex());
    for (const auto& id : forgotten) archived.push_back(id.hex());
    if (format == "text") {
        std::cout << "evaluated " << report.evaluated << ", promoted " << promoted.size()
                  << ", archived " << archived.size() << "\n";
    } else {
        kb::Json j;
        j["promoted"] = std::move(promoted);
        j["archived"] = std::move(archived);
        j["evaluated"] = report.evaluated;
        std::cout << j.dump() << "\n";
    }
    return 0;
}

int run_scenario_cmd(const std::string& which, uint64_t seed) {
    // Scenarios demand a fresh namespace; run in a scratch store.
    std::string dir =
        (fs::temp_directory_path() /
         ("colma-scenario-" + std::to_string(::getpid()) + "-" + which + "-" +
          std::to_string(std::random_device{}())))
            .string();
    fs::create_directories(dir);
    auto transcript = scenario::run_scenario(which, seed, dir);
    std::cout << transcript.to_jsonl();
    std::error_code ec;
    fs::remove_all(dir, ec);
    return 0;
}

int run_eval(EngineConfig config, bool no_graph, const std::string& format) {
    if (no_graph) config.graph_enabled = false;
    auto report = scenario::eval_capabilities(config);
    if (format == "text") {
        for (const auto& name : scenario::kCapabilityDimensions)
            std::cout << name << ": " << scenario::to_string(report.dimensions.at(name))
                      << "\n";
        for (const auto& note : report.footnotes) std::cout << "note: " << note << "\n";
    } else {
        std::cout << report.to_json().dump(2) << "\n";
    }
    return 0;
}

int run_stats(Engine& engine, const std::string& format) {
    auto j = engine.stats();
    if (format == "text") {
        std::cout << "max_seqno " << j["max_seqno"] << ", segments " << j["segments"] << "\n";
        for (const auto& [name, n] : j["namespaces"].items())
            std::cout << name << ": records " << n["records"] << ", triples "
                      << n["triples_live"] << ", facts " << n["facts"] << "\n";
    } else {
        std::cout << j.dump() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"colma layered memory engine"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags work after the subcommand too

    std::string config_path, ns = "default", format = "json";
    std::string token;  // parity with the wire protocol; local calls skip auth
    app.add_option("--config", config_path, "config file (or COLMA_CONFIG env)");
    app.add_option("--namespace", ns, "namespace to operate on");
    app.add_option("--token", token, "principal token (service parity; unused locally)");
    app.add_option("--format", format, "output format: json|text")
        ->check(CLI::IsMember({"json", "text"}));

    auto* serve = app.add_subcommand("serve", "run the line-protocol service");

    std::string ingest_file;
    auto* ingest = app.add_subcommand("ingest", "ingest JSONL records (file or stdin)");
    ingest->add_option("file", ingest_file, "input file, '-' for stdin");

    std::string pattern, query_text, knn_mode = "exact";
    size_t query_k = 10;
    int64_t as_of = 0;
    auto* query = app.add_subcommand("query", "query triples or vector neighbors");
    query->add_option("--pattern", pattern, "triple pattern 's,p,o' ('?' or empty = any)");
    query->add_option("--text", query_text, "knn by embedded text");
    query->add_option("--k", query_k, "neighbors to return");
    query->add_option("--mode", knn_mode, "exact|approx")
        ->check(CLI::IsMember({"exact", "approx"}));
    query->add_option("--as-of", as_of, "historical read time (microseconds)");

    int64_t tick_now = 0;
    bool tick_forget = false;
    auto* tick = app.add_subcommand("tick", "run a consolidation tick");
    tick->add_option("--now", tick_now, "tick time in microseconds (default: clock)");
    tick->add_flag("--forget", tick_forget, "also run a forgetting pass");

    std::string export_out;
    auto* exp = app.add_subcommand("export", "export a namespace as JSONL");
    exp->add_option("--out", export_out, "output file (default stdout)");

    std::string import_file;
    auto* imp = app.add_subcommand("import", "import JSONL into a namespace");
    imp->add_option("file", import_file, "input file, '-' for stdin");

    std::string which;
    uint64_t seed = 1;
    auto* scen = app.add_subcommand("scenario", "run a scripted scenario");
    scen->add_option("which", which, "S1|S2|S3|S4")->required();
    scen->add_option("--seed", seed, "determinism seed");

    bool no_graph = false;
    auto* eval = app.add_subcommand("eval", "evaluate the capability matrix");
    eval->add_flag("--no-graph", no_graph, "evaluate with the graph layer disabled");

    auto* stats = app.add_subcommand("stats", "engine statistics");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // usage error
    }

    try {
        EngineConfig config = resolve_config(config_path);
        if (serve->parsed()) return run_serve(config);
        if (ingest->parsed()) return run_ingest(config, ns, ingest_file);
        if (scen->parsed()) return run_scenario_cmd(which, seed);
        if (eval->parsed()) return run_eval(config, no_graph, format);

        Engine engine(config);
        if (query->parsed())
            return run_query(engine, ns, pattern, query_text, query_k, knn_mode, as_of);
        if (tick->parsed()) return run_tick(engine, ns, tick_now, tick_forget, format);
        if (exp->parsed()) return run_export(engine, ns, export_out);
        if (imp->parsed()) return run_import(engine, ns, import_file);
        if (stats->parsed()) return run_stats(engine, format);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
