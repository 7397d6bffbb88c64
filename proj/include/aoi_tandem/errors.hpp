#pragma once

#include <stdexcept>
#include <string>

namespace aoit {

/// Scenario, config, or file content rejected; names the first violated
/// constraint and, when applicable, the offending source index.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field_, int source_index_, const std::string& message)
        : std::runtime_error(message), field(std::move(field_)), source_index(source_index_) {}

    std::string field;
    int source_index;  // -1 when not tied to a single source
};

/// Cumulative processing load at priority `priority` reached 1: this class
/// and every lower-priority class has unbounded waiting time.
class UnstableClass : public std::runtime_error {
public:
    explicit UnstableClass(int priority_)
        : std::runtime_error("processing queue unstable at priority class " +
                             std::to_string(priority_)),
          priority(priority_) {}

    int priority;
};

/// Offered transmission load rho_T >= 1.
class UnstableTransmission : public std::runtime_error {
public:
    explicit UnstableTransmission(double load_)
        : std::runtime_error("transmission queue unstable: load " +
                             std::to_string(load_) + " >= 1"),
          load(load_) {}

    double load;
};

/// Adaptive quadrature exhausted its subdivision budget before reaching tolerance.
class QuadratureNonConvergence : public std::runtime_error {
public:
    QuadratureNonConvergence(double value_, double error_, int subdivisions_)
        : std::runtime_error("quadrature did not converge: estimate " + std::to_string(value_) +
                             ", error " + std::to_string(error_) + " after " +
                             std::to_string(subdivisions_) + " subdivisions"),
          value(value_), error(error_), subdivisions(subdivisions_) {}

    double value;
    double error;
    int subdivisions;
};

/// A transmission-time expectation or sample was requested with gain_floor = 0.
/// Without a positive floor the mean transmission time is infinite.
class FloorRequired : public std::runtime_error {
public:
    FloorRequired() : std::runtime_error("channel gain_floor must be > 0 for transmission-time computations") {}
};

/// Total processing load is zero, so the residual service time is undefined.
class DegenerateLoad : public std::runtime_error {
public:
    DegenerateLoad() : std::runtime_error("total processing load is zero") {}
};

/// A packet trace violates timestamp ordering or per-source FIFO order.
class MalformedTrace : public std::runtime_error {
public:
    explicit MalformedTrace(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace aoit
