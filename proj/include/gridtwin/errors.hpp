#pragma once

#include <stdexcept>
#include <string>

#include "gridtwin/physics.hpp"

namespace gridtwin {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Concentration left [0, c_max] at a node.
class SaturationError : public SolverError {
public:
    SaturationError(Electrode e, int node, double value)
        : SolverError(std::string("concentration out of range in ") + electrode_name(e) +
                      " at node " + std::to_string(node) + " (" + std::to_string(value) +
                      " mol/m3)"),
          electrode(e), node(node) {}
    Electrode electrode;
    int node;
};

class RatingExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gridtwin
