#pragma once

#include <stdexcept>
#include <string>

namespace phfem {

enum class ErrorKind {
    InvalidArgument,
    UnsupportedSpec,
    DegenerateWeights,
    SingularHodge,
    StructureViolation,
    RankDeficiency,
    NumericalFailure,
    InternalConsistency,
    ConfigError,
    MissingArtifact,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::UnsupportedSpec: return "unsupported-spec";
    case ErrorKind::DegenerateWeights: return "degenerate-weights";
    case ErrorKind::SingularHodge: return "singular-hodge";
    case ErrorKind::StructureViolation: return "structure-violation";
    case ErrorKind::RankDeficiency: return "rank-deficiency";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::InternalConsistency: return "internal-consistency";
    case ErrorKind::ConfigError: return "config-error";
    case ErrorKind::MissingArtifact: return "missing-artifact";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Process exit codes used by the command line front end.
inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::StructureViolation:
    case ErrorKind::RankDeficiency:
    case ErrorKind::InternalConsistency:
        return 1;
    case ErrorKind::InvalidArgument:
    case ErrorKind::UnsupportedSpec:
    case ErrorKind::DegenerateWeights:
    case ErrorKind::SingularHodge:
    case ErrorKind::ConfigError:
        return 2;
    case ErrorKind::MissingArtifact:
        return 3;
    case ErrorKind::NumericalFailure:
        return 4;
    }
    return 1;
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) throw Error(kind, message);
}

} // namespace phfem
