#pragma once

#include <cstddef>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace oracle {

/// Pearson statistic of observed counts against expected counts.
inline double chi_square(const std::vector<double>& observed, const std::vector<double>& expected) {
  double s = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    s += d * d / expected[i];
  }
  return s;
}

/// Upper-tail p-value of a chi-square statistic.
inline double chi_square_p(double statistic, double dof) {
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

inline double chi_square_uniform_p(const std::vector<double>& counts) {
  double total = 0;
  for (double c : counts) total += c;
  const std::vector<double> expected(counts.size(), total / static_cast<double>(counts.size()));
  return chi_square_p(chi_square(counts, expected), static_cast<double>(counts.size() - 1));
}

}  // namespace oracle
