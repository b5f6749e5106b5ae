#pragma once

// Common scalar/vector types and the error hierarchy shared by all modules.

#include <Eigen/Dense>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cerebra {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Input file is syntactically broken (reports 1-based line number when known).
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, long line = -1)
      : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

// Input parsed but violates a model invariant (bad mesh, bad config value, ...).
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A required input file or option is absent.
class MissingInputError : public std::runtime_error {
public:
  explicit MissingInputError(const std::string& what) : std::runtime_error(what) {}
};

// A nonlinear or linear solve failed to converge.
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what, std::vector<double> residual_history = {})
      : std::runtime_error(what), residual_history_(std::move(residual_history)) {}
  const std::vector<double>& residual_history() const { return residual_history_; }

private:
  std::vector<double> residual_history_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string join_ids(const std::vector<int>& ids, std::size_t max_listed = 10) {
  std::ostringstream os;
  for (std::size_t i = 0; i < ids.size() && i < max_listed; ++i) {
    if (i) os << ", ";
    os << ids[i];
  }
  if (ids.size() > max_listed) os << ", ... (" << ids.size() << " total)";
  return os.str();
}

}  // namespace detail

}  // namespace cerebra
