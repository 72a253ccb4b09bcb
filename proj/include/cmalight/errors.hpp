#pragma once

#include <stdexcept>
#include <string>

namespace cml {

/// Violated precondition or interface contract (bad dimension, bad range, ...).
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

/// Non-finite value produced during evaluation. Carries the component index
/// (and, inside an epoch, the position in the visiting order) when known.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what, int component = -1, int position = -1)
        : std::runtime_error(what), component_(component), position_(position) {}

    int component() const noexcept { return component_; }
    int position() const noexcept { return position_; }

private:
    int component_;
    int position_;
};

/// Filesystem failure; carries the offending path.
class IoError : public std::runtime_error {
public:
    IoError(const std::string& what, std::string path)
        : std::runtime_error(what + ": " + path), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace cml
