#ifndef CPARK_ERROR_HPP
#define CPARK_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cpark {

/// Process exit codes shared by every command.
enum class ExitCode : int {
    Ok = 0,
    Internal = 1,
    Infeasible = 2,
    OracleLimit = 3,
    Config = 4,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::Internal; }
};

class InvalidConfig : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Config; }
};

/// Malformed input document.
class ParseError : public InvalidConfig {
public:
    using InvalidConfig::InvalidConfig;
};

class IoError : public Error {
public:
    using Error::Error;
};

class GenerationFailure : public Error {
public:
    using Error::Error;
};

class InstanceInfeasible : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Infeasible; }
};

/// An AV has no facility satisfying its per-vehicle constraints.
class AvInfeasible : public InstanceInfeasible {
public:
    explicit AvInfeasible(int av)
        : InstanceInfeasible("AV " + std::to_string(av) + " has no feasible facility"), av_(av) {}
    int av() const noexcept { return av_; }

private:
    int av_;
};

class OracleLimit : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::OracleLimit; }
};

}  // namespace cpark

#endif  // CPARK_ERROR_HPP
