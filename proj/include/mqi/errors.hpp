#pragma once

#include <stdexcept>
#include <string>

namespace mqi {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct SingularMatrix : Error {
    explicit SingularMatrix(const std::string& what) : Error(what) {}
};

struct ChainLengthMismatch : Error {
    explicit ChainLengthMismatch(const std::string& what) : Error(what) {}
};

struct NotASolution : Error {
    explicit NotASolution(const std::string& what) : Error(what) {}
};

struct InvalidScalars : Error {
    explicit InvalidScalars(const std::string& what) : Error(what) {}
};

struct NotSurjective : Error {
    explicit NotSurjective(const std::string& what) : Error(what) {}
};

struct DeterminantFixupFailed : Error {
    explicit DeterminantFixupFailed(const std::string& what) : Error(what) {}
};

struct NotUnitriangularLeading : Error {
    explicit NotUnitriangularLeading(const std::string& what) : Error(what) {}
};

struct ZeroDiagonal : Error {
    explicit ZeroDiagonal(const std::string& what) : Error(what) {}
};

struct InvalidRootIndex : Error {
    explicit InvalidRootIndex(const std::string& what) : Error(what) {}
};

struct NotUnipotent : Error {
    explicit NotUnipotent(const std::string& what) : Error(what) {}
};

struct NotBorel : Error {
    explicit NotBorel(const std::string& what) : Error(what) {}
};

struct ZeroE : Error {
    explicit ZeroE(const std::string& what) : Error(what) {}
};

struct NotUnitary : Error {
    explicit NotUnitary(const std::string& what) : Error(what) {}
};

struct NotUnitModulus : Error {
    explicit NotUnitModulus(const std::string& what) : Error(what) {}
};

struct InvalidQuiver : Error {
    explicit InvalidQuiver(const std::string& what) : Error(what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(what) {}
};

} // namespace mqi
