#pragma once

#include <stdexcept>
#include <string>

namespace pairpose {

struct DegenerateGeometry : std::runtime_error {
    explicit DegenerateGeometry(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroScale : std::runtime_error {
    explicit ZeroScale(const std::string& what) : std::runtime_error(what) {}
};

struct EmptySelection : std::runtime_error {
    explicit EmptySelection(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroVector : std::runtime_error {
    explicit ZeroVector(const std::string& what) : std::runtime_error(what) {}
};

struct NoValidHypothesis : std::runtime_error {
    explicit NoValidHypothesis(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientCorrespondences : std::runtime_error {
    explicit InsufficientCorrespondences(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyView : std::runtime_error {
    explicit EmptyView(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pairpose
