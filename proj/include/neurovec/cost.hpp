#pragma once

#include <cstddef>
#include <cstdint>

namespace neurovec {

/// Logical operation counts gathered while a store is queried or grown.
/// Counters only ever increase; merge shards with `+=`.
struct CostCounters {
  /// Token hash computations (one per query token).
  std::uint64_t hashOps = 0;
  /// Posting-set lookups (one per query token).
  std::uint64_t indexLookups = 0;
  /// Candidate searches (one per query, i.e. per predicted row).
  std::uint64_t searches = 0;
  /// Neurovectors created.
  std::uint64_t nvCreations = 0;
  /// Candidates examined while selecting the winning neurovector.
  std::uint64_t candidateComparisons = 0;

  CostCounters& operator+=(const CostCounters& o) noexcept {
    hashOps += o.hashOps;
    indexLookups += o.indexLookups;
    searches += o.searches;
    nvCreations += o.nvCreations;
    candidateComparisons += o.candidateComparisons;
    return *this;
  }
  friend CostCounters operator+(CostCounters a, const CostCounters& b) noexcept { return a += b; }
  friend bool operator==(const CostCounters&, const CostCounters&) = default;
};

/// Per-operation FLOP weights of the analytic cost model. Defaults: one FLOP
/// per token hash, two per candidate search, one per token link of a new
/// neurovector (d per creation).
struct FlopCoefficients {
  double perHash = 1.0;
  double perSearch = 2.0;
  double perCreationToken = 1.0;
};

/// Modelled FLOPs: hashOps*perHash + searches*perSearch + nvCreations*d*perCreationToken.
inline std::uint64_t flop_estimate(const CostCounters& c, std::size_t featureCount,
                                   const FlopCoefficients& k = {}) {
  const double flops = static_cast<double>(c.hashOps) * k.perHash +
                       static_cast<double>(c.searches) * k.perSearch +
                       static_cast<double>(c.nvCreations) * static_cast<double>(featureCount) *
                           k.perCreationToken;
  return static_cast<std::uint64_t>(flops + 0.5);
}

}  // namespace neurovec
