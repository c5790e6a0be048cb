#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "neurovec/error.hpp"

namespace neurovec {

/// Fraction of (predicted, actual) pairs that agree.
inline double accuracy(std::span<const std::pair<std::string, std::string>> pairs) {
  if (pairs.empty()) throw Error("accuracy of an empty prediction list");
  std::size_t correct = 0;
  for (const auto& [p, a] : pairs) correct += p == a ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

/// Mean absolute error over (predicted, actual) pairs.
inline double mae(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw Error("MAE of an empty prediction list");
  double sum = 0.0;
  for (const auto& [p, a] : pairs) sum += std::abs(p - a);
  return sum / static_cast<double>(pairs.size());
}

/// Root mean squared error over (predicted, actual) pairs.
inline double rmse(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw Error("RMSE of an empty prediction list");
  double sum = 0.0;
  for (const auto& [p, a] : pairs) sum += (p - a) * (p - a);
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

}  // namespace neurovec
