#pragma once

#include <span>

#include "kramers/common.hpp"

namespace kramers {

enum class DomainKind { Torus, Euclidean };

/// Position space: either the flat torus of edge length L (all coordinates
/// reduced mod L, displacements by minimal image) or R^d.
struct Domain {
  DomainKind kind = DomainKind::Euclidean;
  int dim = 1;
  double length = 0.0;  // L, torus only

  static Domain torus(int dim, double length);
  static Domain euclidean(int dim);

  bool is_torus() const { return kind == DomainKind::Torus; }

  /// Reduce a coordinate into [0, L). Identity on Euclidean domains.
  double wrap(double x) const;
  void wrap(std::span<double> x) const;

  /// Minimal-image signed displacement a - b (per coordinate).
  double displacement(double a, double b) const;

  /// Euclidean norm of the minimal-image displacement vector.
  double distance(std::span<const double> a, std::span<const double> b) const;
};

}  // namespace kramers
