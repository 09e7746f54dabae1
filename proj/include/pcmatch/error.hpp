#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcm {

enum class ErrorKind {
    validation, // malformed or out-of-range input
    undefined,  // quantity not defined for the given counts
    infeasible, // an assumption cannot hold for the given counts
    io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &message)
        : std::runtime_error{message}, kind_{kind} {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string &message)
        : Error{ErrorKind::validation, message} {}
};

class UndefinedError : public Error {
  public:
    explicit UndefinedError(const std::string &message) : Error{ErrorKind::undefined, message} {}
};

class InfeasibleError : public Error {
  public:
    explicit InfeasibleError(const std::string &message)
        : Error{ErrorKind::infeasible, message} {}
};

class IoError : public Error {
  public:
    explicit IoError(const std::string &message) : Error{ErrorKind::io, message} {}
};

} // namespace pcm
