#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace higcn {

// Base of every error the library throws. `kind()` is a short stable tag used
// by the CLI for machine-readable diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& message) : Error("shape", message) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& message) : Error("numeric", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io", message) {}
};

// Schema violation in a loaded or constructed sample.
class ValidationError : public Error {
public:
    ValidationError(const std::string& sample_id, const std::string& field, const std::string& detail)
        : Error("validation", "sample '" + sample_id + "': field '" + field + "': " + detail),
          sample_id_(sample_id),
          field_(field) {}

    const std::string& sample_id() const noexcept { return sample_id_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::string sample_id_;
    std::string field_;
};

class TrainingError : public Error {
public:
    TrainingError(std::size_t step, const std::string& message)
        : Error("training", "step " + std::to_string(step) + ": " + message), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace higcn
