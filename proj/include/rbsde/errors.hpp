#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rbsde {

/// Invalid user input (malformed scenario, out-of-range parameter).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A path-valued input failed the martingale property.
class RepresentationError : public std::runtime_error {
 public:
  RepresentationError(const std::string& msg, int node, double defect)
      : std::runtime_error(msg), worst_node(node), worst_defect(defect) {}
  int worst_node;
  double worst_defect;
};

/// A decomposition produced a negative nondecreasing-part increment.
class DecompositionError : public std::runtime_error {
 public:
  DecompositionError(const std::string& msg, int node, double value)
      : std::runtime_error(msg), node(node), value(value) {}
  int node;
  double value;
};

/// Exhaustive stopping-rule enumeration would exceed the guard.
class OracleTooLargeError : public std::runtime_error {
 public:
  OracleTooLargeError(const std::string& msg, double count, double guard)
      : std::runtime_error(msg), rule_count(count), guard(guard) {}
  double rule_count;
  double guard;
};

/// Fixed-point iteration hit max_iter without meeting the tolerance.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& msg, std::vector<double> distances)
      : std::runtime_error(msg), distances(std::move(distances)) {}
  std::vector<double> distances;  // successive-iterate distances, weighted norm
};

}  // namespace rbsde
