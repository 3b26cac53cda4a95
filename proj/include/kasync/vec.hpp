#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace kasync {

/// Flat vector of model parameters (or a gradient over them).
using ParamVector = std::vector<double>;

inline double dotn(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double dot(const ParamVector& a, const ParamVector& b) {
  return dotn(a.data(), b.data(), a.size());
}

inline double norm2(const ParamVector& v) { return std::sqrt(dot(v, v)); }

/// y += a * x
inline void axpy(double a, const ParamVector& x, ParamVector& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline ParamVector scaled(const ParamVector& v, double s) {
  ParamVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = s * v[i];
  return out;
}

inline void scale_inplace(ParamVector& v, double s) {
  for (auto& x : v) x *= s;
}

inline bool all_finite(const ParamVector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace kasync
