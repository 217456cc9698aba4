#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ybsde {

/// Rejected input: bad parameters, mismatched shapes, invalid configuration.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation left the finite range or failed to converge.
/// `index` carries the offending step / path / cell when one is known.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(what), index_(index) {}

    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    std::optional<std::size_t> index_;
};

}  // namespace ybsde
