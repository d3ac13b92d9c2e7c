#pragma once

#include <stdexcept>
#include <string>

namespace arf {

// Error taxonomy. Configuration errors are construction-time misuse
// (bad shapes, unsupported degrees); usage errors are API misuse at
// call time (stale cache, mismatched batches); input/parse errors come
// from external data; render errors carry the offending ray.

struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

struct UsageError : std::logic_error {
    explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct RenderError : std::runtime_error {
    explicit RenderError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace arf
