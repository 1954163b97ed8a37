#include "pcgrad/vecmath.hpp"

#include <algorithm>
#include <cmath>

namespace pcgrad {

bool all_finite(const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

void require_finite(const Vec& v, const std::string& what) {
  if (!all_finite(v)) throw NonFiniteValue(what + ": non-finite entry");
}

void require_same_dim(const Vec& a, const Vec& b, const std::string& what) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(what + ": dimensions " + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()));
  }
}

double dot(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "dot");
  return a.dot(b);
}

double norm(const Vec& a) { return a.norm(); }

double cosine(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "cosine");
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= kNormEpsilon || nb <= kNormEpsilon) {
    throw DegenerateGradient("cosine: near-zero norm");
  }
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

Vec project_out(const Vec& g, const Vec& onto) {
  require_same_dim(g, onto, "project_out");
  const double n2 = onto.squaredNorm();
  if (std::sqrt(n2) <= kNormEpsilon) {
    throw DegenerateGradient("project_out: near-zero target");
  }
  return g - (g.dot(onto) / n2) * onto;
}

}  // namespace pcgrad
