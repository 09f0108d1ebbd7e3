#pragma once
// Token-based principals with namespace globs. Every request resolves to
// exactly one principal or is rejected; readers get no mutating ops;
// admins bypass role checks but never namespace checks.

#include "colma/knowledge/json_codec.hpp"

#include <optional>
#include <string>
#include <vector>

namespace colma::service {

enum class Role { reader, writer, admin };

struct Principal {
    std::string token;
    Role role = Role::reader;
    std::vector<std::string> namespaces;  // glob patterns, e.g. "teamA.*"
};

struct AuthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Auth file: JSON list of {"token": "...", "role": "reader|writer|admin",
// "namespaces": ["glob", ...]}.
std::vector<Principal> parse_auth(const kb::Json& j);
std::vector<Principal> load_auth_file(const std::string& path);

// '*' matches any run, '?' one char; otherwise literal.
bool glob_match(const std::string& pattern, const std::string& text);

// Constant-time token comparison.
bool token_equal(const std::string& a, const std::string& b);

std::optional<Principal> resolve_principal(const std::vector<Principal>& principals,
                                           const std::string& token);

bool op_mutates(const std::string& op);

// Deny is a value, not an error.
bool authorize(const Principal& principal, const std::string& ns, const std::string& op);

} // namespace colma::service
