#pragma once

#include <stdexcept>
#include <string>

namespace rejuv {

struct NotHurwitz : std::runtime_error {
  explicit NotHurwitz(const std::string& what) : std::runtime_error(what) {}
};

struct SolverFailure : std::runtime_error {
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateConstraints : std::runtime_error {
  explicit DegenerateConstraints(const std::string& what) : std::runtime_error(what) {}
};

struct NotCertificate : std::runtime_error {
  explicit NotCertificate(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct Overflow : std::runtime_error {
  explicit Overflow(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureError : std::runtime_error {
  explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

struct UnboundedPolytope : std::runtime_error {
  explicit UnboundedPolytope(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleAtZero : std::runtime_error {
  explicit InfeasibleAtZero(const std::string& what) : std::runtime_error(what) {}
};

struct TuningExhausted : std::runtime_error {
  explicit TuningExhausted(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct NonFinite : std::runtime_error {
  explicit NonFinite(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rejuv
