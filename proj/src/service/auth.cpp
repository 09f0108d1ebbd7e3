#include "colma/service/auth.hpp"

#include <fstream>
#include <set>

namespace colma::service {

std::vector<Principal> parse_auth(const kb::Json& j) {
    if (!j.is_array()) throw AuthError("auth file must be a JSON list of principals");
    std::vector<Principal> out;
    std::set<std::string> seen;
    for (const auto& p : j) {
        Principal pr;
        pr.token = p.at("token").get<std::string>();
        if (pr.token.empty()) throw AuthError("principal token must be non-empty");
        if (!seen.insert(pr.token).second)
            throw AuthError("duplicate token: requests must resolve to exactly one principal");
        std::string role = p.at("role").get<std::string>();
        if (role == "reader") pr.role = Role::reader;
        else if (role == "writer") pr.role = Role::writer;
        else if (role == "admin") pr.role = Role::admin;
        else throw AuthError("unknown role: " + role);
        pr.namespaces = p.value("namespaces", std::vector<std::string>{});
        out.push_back(std::move(pr));
    }
    return out;
}

std::vector<Principal> load_auth_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw AuthError("cannot open auth file: " + path);
    return parse_auth(kb::Json::parse(in));
}

bool glob_match(const std::string& pattern, const std::string& text) {
    // Iterative wildcard match with star backtracking.
    size_t p = 0, t = 0, star = std::string::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

bool token_equal(const std::string& a, const std::string& b) {
    // Compare without early exit; length feeds the accumulator too.
    unsigned diff = static_cast<unsigned>(a.size() ^ b.size());
    size_t n = std::max(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
        unsigned char ca = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
        unsigned char cb = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
        diff |= static_cast<unsigned>(ca ^ cb);
    }
    return diff == 0;
}

std::optional<Principal> resolve_principal(const std::vector<Principal>& principals,
                                           const std::string& token) {
    const Principal* found = nullptr;
    for (const auto& p : principals)
        if (token_equal(p.token, token)) found = &p;
    if (!found) return std::nullopt;
    return *found;
}

bool op_mutates(const std::string& op) {
    static const std::set<std::string> mutating = {
        "put_record",  "assert_triple", "update_memory", "consolidate_tick",
        "forget_tick", "apply_delta",   "reflect",
    };
    return mutating.count(op) > 0;
}

bool authorize(const Principal& principal, const std::string& ns, const std::string& op) {
    bool ns_ok = false;
    for (const auto& glob : principal.namespaces)
        if (glob_match(glob, ns)) ns_ok = true;
    if (!ns_ok) return false;  // admins do not bypass namespace checks
    if (principal.role == Role::reader && op_mutates(op)) return false;
    return true;
}

} // namespace colma::service
