#include "kramers/domain.hpp"

#include <cmath>

namespace kramers {

Domain Domain::torus(int dim, double length) {
  if (dim <= 0) throw ValidationError("domain dimension must be positive");
  if (!(length > 0.0)) throw ValidationError("torus edge length must be > 0");
  return Domain{DomainKind::Torus, dim, length};
}

Domain Domain::euclidean(int dim) {
  if (dim <= 0) throw ValidationError("domain dimension must be positive");
  return Domain{DomainKind::Euclidean, dim, 0.0};
}

double Domain::wrap(double x) const {
  if (kind == DomainKind::Euclidean) return x;
  double y = std::fmod(x, length);
  if (y < 0.0) y += length;
  // fmod can return exactly `length` after the correction when x is a tiny
  // negative number; fold that back.
  if (y >= length) y -= length;
  return y;
}

void Domain::wrap(std::span<double> x) const {
  if (kind == DomainKind::Euclidean) return;
  for (double& xi : x) xi = wrap(xi);
}

double Domain::displacement(double a, double b) const {
  double d = a - b;
  if (kind == DomainKind::Euclidean) return d;
  d = std::remainder(d, length);  // into [-L/2, L/2]
  return d;
}

double Domain::distance(std::span<const double> a,
                        std::span<const double> b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = displacement(a[i], b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace kramers
