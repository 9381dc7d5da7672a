#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace impedscope {

inline constexpr const char* kVersion = "0.1.0";

/// Raised when a config, manifest, or mask registry fails validation.
/// The CLI maps this to exit code 2; all other runtime errors map to 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void validate(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

} // namespace impedscope
