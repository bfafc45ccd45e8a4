#pragma once

#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "fluxent/resonance.hpp"

namespace fluxent {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class ResonantDenominator : public Error {
public:
    explicit ResonantDenominator(ResonanceInfo info)
        : Error("resonant denominator: " + info.describe()), info_(info) {}
    const ResonanceInfo& info() const { return info_; }

private:
    ResonanceInfo info_;
};

class StepSizeUnderflow : public Error {
public:
    explicit StepSizeUnderflow(double t)
        : Error(fmt::format("adaptive step size underflow at t = {:.9g}", t)), time_(t) {}
    double time() const { return time_; }

private:
    double time_;
};

class DegenerateFixedPoint : public Error {
public:
    using Error::Error;
};

class NonPhysicalState : public Error {
public:
    using Error::Error;
};

class NoEntanglementWindow : public Error {
public:
    using Error::Error;
};

class OutOfTheory : public Error {
public:
    OutOfTheory(const std::string& what, ResonanceInfo info) : Error(what), info_(info) {}
    const ResonanceInfo& info() const { return info_; }

private:
    ResonanceInfo info_;
};

class ConfigError : public Error {
public:
    ConfigError(int line, std::string field, const std::string& msg)
        : Error(line > 0 ? fmt::format("line {}: {}: {}", line, field, msg)
                         : fmt::format("{}: {}", field, msg)),
          line_(line), field_(std::move(field)) {}
    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    int line_;
    std::string field_;
};

}  // namespace fluxent
