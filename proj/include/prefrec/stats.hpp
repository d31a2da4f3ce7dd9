#pragma once

#include <cmath>
#include <vector>

namespace prefrec {

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
inline double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  return sample_std(v) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace prefrec
