#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace pcgrad {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Degeneracy threshold for norms: far below any gradient scale in the bundled
// problems, above accumulation noise.
inline constexpr double kNormEpsilon = 1e-12;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct NonFiniteValue : Error {
  using Error::Error;
};
struct DegenerateGradient : Error {
  using Error::Error;
};
struct DegenerateSum : Error {
  using Error::Error;
};
struct UnsupportedProblem : Error {
  using Error::Error;
};
struct OutOfOrderIteration : Error {
  using Error::Error;
};
struct DataFormatError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

bool all_finite(const Vec& v);
void require_finite(const Vec& v, const std::string& what);
void require_same_dim(const Vec& a, const Vec& b, const std::string& what);

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);

// (a.b)/(|a||b|), clamped to [-1, 1]; throws DegenerateGradient when either
// norm is at or below kNormEpsilon.
double cosine(const Vec& a, const Vec& b);

// g - (g.onto / |onto|^2) onto; throws DegenerateGradient on near-zero onto.
Vec project_out(const Vec& g, const Vec& onto);

}  // namespace pcgrad
