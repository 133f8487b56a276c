#pragma once

#include <stdexcept>
#include <string>

namespace spomix {

/// Base class for all library errors. `code()` is a stable machine-readable
/// name used by the sweep harness to record failures in-band.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class EmptyDataset : public Error {
public:
    explicit EmptyDataset(const std::string& what) : Error("EmptyDataset", what) {}
};

class EmptyArm : public Error {
public:
    explicit EmptyArm(const std::string& what) : Error("EmptyArm", what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error("DimensionMismatch", what) {}
};

class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& what) : Error("LengthMismatch", what) {}
};

/// An arm-conditional cross-moment matrix failed the conditioning check.
class SingularMomentMatrix : public Error {
public:
    explicit SingularMomentMatrix(const std::string& what) : Error("SingularMomentMatrix", what) {}
};

class RankDeficient : public Error {
public:
    explicit RankDeficient(const std::string& what) : Error("RankDeficient", what) {}
};

/// The Hankel moment matrix is numerically singular: fewer than k
/// distinguishable mixture components.
class DegenerateHankel : public Error {
public:
    explicit DegenerateHankel(const std::string& what) : Error("DegenerateHankel", what) {}
};

/// Recovered atoms have imaginary parts beyond tolerance (noise-corrupted
/// moment sequence).
class ComplexAtoms : public Error {
public:
    explicit ComplexAtoms(const std::string& what) : Error("ComplexAtoms", what) {}
};

class NonBinaryData : public Error {
public:
    explicit NonBinaryData(const std::string& what) : Error("NonBinaryData", what) {}
};

class OutOfRange : public Error {
public:
    explicit OutOfRange(const std::string& what) : Error("OutOfRange", what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("IoError", what) {}
};

} // namespace spomix
