#pragma once

#include <stdexcept>
#include <string>

namespace gbbtrade {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Value outside its admissible domain (valuation, price, weight, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Grid resolution below 2.
class ResolutionError : public Error {
public:
    using Error::Error;
};

// Corruption schedule inconsistent with the horizon or its declared budget.
class ScheduleError : public Error {
public:
    using Error::Error;
};

// Requested computation is outside what the implementation supports.
class CapabilityError : public Error {
public:
    using Error::Error;
};

// Linear program has no feasible point.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// Caller broke a pairing contract (e.g. feedback from another round).
class ContractViolation : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class HorizonMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace gbbtrade
