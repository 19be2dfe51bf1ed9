#pragma once

#include <stdexcept>
#include <string>

namespace glc {

struct TooFarFromManifold : std::runtime_error {
  explicit TooFarFromManifold(const std::string& what) : std::runtime_error(what) {}
};

struct OnComplex : std::runtime_error {
  explicit OnComplex(const std::string& what) : std::runtime_error(what) {}
};

struct Undersampled : std::runtime_error {
  explicit Undersampled(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidDescriptor : std::runtime_error {
  explicit InvalidDescriptor(const std::string& what) : std::runtime_error(what) {}
};

struct SimplexTouchesBoundary : std::runtime_error {
  explicit SimplexTouchesBoundary(const std::string& what) : std::runtime_error(what) {}
};

struct NonZeroTotalClass : std::runtime_error {
  explicit NonZeroTotalClass(const std::string& what) : std::runtime_error(what) {}
};

struct Degenerate : std::runtime_error {
  explicit Degenerate(const std::string& what) : std::runtime_error(what) {}
};

struct SkeletonTooClose : std::runtime_error {
  explicit SkeletonTooClose(const std::string& what) : std::runtime_error(what) {}
};

struct BoundaryTouch : std::runtime_error {
  explicit BoundaryTouch(const std::string& what) : std::runtime_error(what) {}
};

struct NotAdmissible : std::runtime_error {
  explicit NotAdmissible(const std::string& what) : std::runtime_error(what) {}
};

struct NonFiniteEnergy : std::runtime_error {
  explicit NonFiniteEnergy(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace glc
