#ifndef GROUPER_ERRORS_HPP
#define GROUPER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace grouper {

// Input outside a documented domain (feature bounds, unsupported Sobol
// dimension, K > N, ...).
class RangeError : public std::invalid_argument {
public:
    explicit RangeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Tensor/vector dimensions do not chain or do not match declared shapes.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Operation requires state that is not present (e.g. backward without a
// cached forward pass).
class StateError : public std::logic_error {
public:
    explicit StateError(const std::string& msg) : std::logic_error(msg) {}
};

// Malformed document or file; `where` carries the offending location
// (field name, layer index, CSV line number).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, const std::string& where)
        : std::runtime_error(msg + " (at " + where + ")"), where_(where) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

// Training diverged; carries the epoch (or step) index where loss became
// non-finite.
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& msg, long epoch)
        : std::runtime_error(msg + " (epoch " + std::to_string(epoch) + ")"),
          epoch_(epoch) {}
    long epoch() const { return epoch_; }

private:
    long epoch_;
};

class IoError : public std::runtime_error {
public:
    IoError(const std::string& msg, const std::string& path)
        : std::runtime_error(msg + ": " + path), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

} // namespace grouper

#endif // GROUPER_ERRORS_HPP
