#pragma once

#include <stdexcept>
#include <string>

namespace todp {

// All library errors derive from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

class EncodingError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class MisuseError : public Error {
public:
    using Error::Error;
};

// Raised when the reservoir reaches jam accumulation with vehicles inside.
class SimulationStall : public Error {
public:
    SimulationStall(double time_min, int accumulation)
        : Error("simulation stalled at t=" + std::to_string(time_min) +
                " min with accumulation " + std::to_string(accumulation)),
          time_(time_min),
          accumulation_(accumulation) {}

    double time() const noexcept { return time_; }
    int accumulation() const noexcept { return accumulation_; }

private:
    double time_;
    int accumulation_;
};

}  // namespace todp
