#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace biharm {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad user input: invalid grid, hypotheses violated, malformed config
struct config_error : error {
    using error::error;
};

// |u| exceeded the overflow cap before exp() was taken
struct overflow_error : error {
    using error::error;
};

// scaling projection could not bracket a zero
struct projection_error : error {
    using error::error;
};

struct convergence_error : error {
    using error::error;
};

struct parse_error : error {
    parse_error(const std::string& msg, std::size_t offset)
        : error(msg + " at offset " + std::to_string(offset)), offset(offset) {}
    std::size_t offset;
};

}  // namespace biharm
