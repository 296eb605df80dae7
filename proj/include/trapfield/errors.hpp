#ifndef TRAPFIELD_ERRORS_HPP
#define TRAPFIELD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace trapfield {

// exit codes used by the CLI
enum class ExitCode : int { ok = 0, config = 2, physics = 3, convergence = 4 };

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
    virtual ExitCode code() const noexcept = 0;
};

struct ConfigError : Error {
    using Error::Error;
    ExitCode code() const noexcept override { return ExitCode::config; }
};

// argument outside the mathematical/physical domain of an operation
struct DomainError : Error {
    using Error::Error;
    ExitCode code() const noexcept override { return ExitCode::physics; }
};

struct ResonanceError : DomainError {
    ResonanceError(const std::string& what, int mode = -1) : DomainError(what), mode_index(mode) {}
    int mode_index;
};

struct InstabilityError : DomainError {
    InstabilityError(const std::string& what, double eig, double ratio)
        : DomainError(what), min_eigenvalue(eig), critical_ratio(ratio) {}
    double min_eigenvalue;
    double critical_ratio;
};

struct CapacityError : DomainError {
    using DomainError::DomainError;
};

struct ConvergenceError : Error {
    ConvergenceError(const std::string& what, double est) : Error(what), estimate(est) {}
    ExitCode code() const noexcept override { return ExitCode::convergence; }
    double estimate;
};

} // namespace trapfield

#endif
