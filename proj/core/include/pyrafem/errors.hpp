#pragma once

#include <stdexcept>
#include <string>

namespace pyrafem {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Integral over the reference pyramid does not exist.
struct DivergentIntegral : Error {
  explicit DivergentIntegral(const std::string& what) : Error(what) {}
};

/// Point evaluation hit the pole at the apex.
struct SingularEvaluation : Error {
  explicit SingularEvaluation(const std::string& what) : Error(what) {}
};

struct DegenerateElement : Error {
  explicit DegenerateElement(const std::string& what) : Error(what) {}
};

struct InvalidOrder : Error {
  explicit InvalidOrder(const std::string& what) : Error(what) {}
};

struct DegreeError : Error {
  explicit DegreeError(const std::string& what) : Error(what) {}
};

struct NotInSpace : Error {
  explicit NotInSpace(const std::string& what) : Error(what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

struct SingularSystem : Error {
  explicit SingularSystem(const std::string& what) : Error(what) {}
};

struct NonconformingMesh : Error {
  explicit NonconformingMesh(const std::string& what) : Error(what) {}
};

struct IndefiniteSystem : Error {
  explicit IndefiniteSystem(const std::string& what) : Error(what) {}
};

}  // namespace pyrafem
