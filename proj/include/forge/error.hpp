#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

/// Exception carrying a module-specific error code alongside the message.
template <typename Code>
class CodedError : public std::runtime_error {
public:
    CodedError(Code code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    [[nodiscard]] Code code() const noexcept { return code_; }

private:
    Code code_;
};

} // namespace forge
