#pragma once

#include <stdexcept>
#include <string>

namespace agmon {

// Exit-code taxonomy used by the CLI: 1 config, 2 hypothesis/domain, 3 numerics.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct hypothesis_error : std::runtime_error {
    explicit hypothesis_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace agmon
