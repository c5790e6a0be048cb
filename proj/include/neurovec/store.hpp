#pragma once

// =============================================================================
// Neurovector store: an inverted index from feature/value tokens to stored
// training instances ("neurovectors"), plus the per-neurovector use/success
// bookkeeping that drives energy-based tie-breaking.
//
// Prediction: every query token is looked up once; each neurovector found in
// a posting set scores one match per token. The winner maximises
// (matchCount, energy, -id) lexicographically.
//
// Energy: success^2 / use for classification, additionally damped by
// exp(-alpha * cumulative absolute error) for regression. A neurovector that
// was never selected (use == 0) has energy 0.
// =============================================================================

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "neurovec/cost.hpp"
#include "neurovec/dataset.hpp"
#include "neurovec/error.hpp"
#include "neurovec/token.hpp"

namespace neurovec {

using NeurovectorId = std::uint32_t;

struct EnergyParams {
  /// Error-decay rate of the regression energy; must be positive.
  double alpha = 1.0;
  /// A regression prediction counts as a success when |error| <= this.
  double regressionSuccessTolerance = 0.0;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("alpha must be a positive number");
    if (!(regressionSuccessTolerance >= 0.0)) throw Error("success tolerance must be >= 0");
  }

  friend bool operator==(const EnergyParams&, const EnergyParams&) = default;
};

struct NeurovectorRecord {
  NeurovectorId id = 0;
  TargetValue target;
  /// Times selected as the predicting neurovector during training.
  std::uint64_t use = 0;
  /// Times that selection produced a correct prediction.
  std::uint64_t success = 0;
  /// Sum of absolute regression errors; always 0 for classification.
  double cumAbsError = 0.0;
  std::optional<std::size_t> sourceRow;

  friend bool operator==(const NeurovectorRecord&, const NeurovectorRecord&) = default;
};

inline double energy(const NeurovectorRecord& r, Task task, const EnergyParams& params) {
  if (r.use == 0) return 0.0;
  const double s = static_cast<double>(r.success);
  const double base = s * s / static_cast<double>(r.use);
  if (task == Task::kClassification) return base;
  return base * std::exp(-params.alpha * r.cumAbsError);
}

/// Classification: labels equal. Regression: |predicted - actual| within the
/// success tolerance (exact equality at the default tolerance 0).
inline bool prediction_correct(const TargetValue& predicted, const TargetValue& actual,
                               const EnergyParams& params) {
  if (const auto* p = std::get_if<std::string>(&predicted)) {
    const auto* a = std::get_if<std::string>(&actual);
    return a && *p == *a;
  }
  const auto* a = std::get_if<double>(&actual);
  return a && std::abs(std::get<double>(predicted) - *a) <= params.regressionSuccessTolerance;
}

struct Candidate {
  NeurovectorId id = 0;
  std::uint32_t matchCount = 0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Candidates ordered by id.
using CandidateSet = std::vector<Candidate>;

struct Selection {
  NeurovectorId id = 0;
  std::uint32_t matchCount = 0;
  double energy = 0.0;
};

class NeurovectorStore {
public:
  explicit NeurovectorStore(Task task = Task::kClassification) : task_(task) {}

  Task task() const noexcept { return task_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  /// Number of distinct tokens (posting sets) in the index.
  std::size_t token_count() const noexcept { return index_.size(); }

  std::span<const NeurovectorRecord> records() const noexcept { return records_; }

  const NeurovectorRecord& record(NeurovectorId id) const {
    check_id(id);
    return records_[id];
  }

  std::span<const Token> tokens_of(NeurovectorId id) const {
    check_id(id);
    return tokens_[id];
  }

  /// Posting set of a token, or nullptr when the token was never indexed.
  const std::vector<NeurovectorId>* postings(const Token& token) const {
    const auto it = index_.find(token);
    return it == index_.end() ? nullptr : &it->second;
  }

  /// Appends a fresh neurovector (use = success = 0) linked to every token.
  NeurovectorId insert(std::span<const Token> tokens, TargetValue target,
                       std::optional<std::size_t> sourceRow = std::nullopt,
                       CostCounters* counters = nullptr) {
    NeurovectorRecord rec;
    rec.target = std::move(target);
    rec.sourceRow = sourceRow;
    const auto id = restore(std::vector<Token>(tokens.begin(), tokens.end()), std::move(rec));
    if (counters) ++counters->nvCreations;
    return id;
  }

  /// Appends a neurovector with existing counters (used when loading models).
  /// The record id is assigned from the current size.
  NeurovectorId restore(std::vector<Token> tokens, NeurovectorRecord rec) {
    if (tokens.empty()) throw StoreError("a neurovector needs at least one token");
    if (task_of(rec.target) != task_) {
      throw StoreError("target kind does not match the store task (" +
                       std::string(to_string(task_)) + ")");
    }
    if (rec.success > rec.use) throw StoreError("success exceeds use");
    if (!(rec.cumAbsError >= 0.0) || (task_ == Task::kClassification && rec.cumAbsError != 0.0)) {
      throw StoreError("invalid cumulative absolute error");
    }
    if (records_.size() >= UINT32_MAX) throw StoreError("store is full");
    const auto id = static_cast<NeurovectorId>(records_.size());
    rec.id = id;
    for (const auto& t : tokens) {
      auto& post = index_[t];
      if (post.empty() || post.back() != id) post.push_back(id);
    }
    records_.push_back(std::move(rec));
    tokens_.push_back(std::move(tokens));
    return id;
  }

  /// Updates use/success (and the absolute-error sum for regression) of the
  /// neurovector that predicted `actual`.
  const NeurovectorRecord& record_outcome(NeurovectorId id, const TargetValue& actual,
                                          const EnergyParams& params) {
    check_id(id);
    if (task_of(actual) != task_) throw StoreError("actual value kind does not match the store task");
    auto& r = records_[id];
    ++r.use;
    if (task_ == Task::kRegression) {
      r.cumAbsError += std::abs(std::get<double>(r.target) - std::get<double>(actual));
    }
    if (prediction_correct(r.target, actual, params)) ++r.success;
    return r;
  }

private:
  void check_id(NeurovectorId id) const {
    if (id >= records_.size()) throw StoreError("unknown neurovector id " + std::to_string(id));
  }

  Task task_;
  std::vector<NeurovectorRecord> records_;
  std::vector<std::vector<Token>> tokens_;
  std::unordered_map<Token, std::vector<NeurovectorId>> index_;
};

/// Match count of every neurovector sharing at least one token with the query.
/// Performs exactly one index lookup per query token.
inline CandidateSet candidate_set(const NeurovectorStore& store, std::span<const Token> tokens,
                                  CostCounters* counters = nullptr) {
  std::unordered_map<NeurovectorId, std::uint32_t> counts;
  for (const auto& t : tokens) {
    if (const auto* post = store.postings(t)) {
      for (auto id : *post) ++counts[id];
    }
  }
  if (counters) {
    counters->hashOps += tokens.size();
    counters->indexLookups += tokens.size();
    ++counters->searches;
  }
  CandidateSet out;
  out.reserve(counts.size());
  for (const auto& [id, n] : counts) out.push_back({id, n});
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
  return out;
}

/// Highest match count wins; ties go to higher energy, then to the lowest id.
inline std::optional<Selection> select_neurovector(std::span<const Candidate> candidates,
                                                   const NeurovectorStore& store,
                                                   const EnergyParams& params,
                                                   CostCounters* counters = nullptr) {
  std::optional<Selection> best;
  for (const auto& c : candidates) {
    const double e = energy(store.record(c.id), store.task(), params);
    if (!best || c.matchCount > best->matchCount ||
        (c.matchCount == best->matchCount &&
         (e > best->energy || (e == best->energy && c.id < best->id)))) {
      best = Selection{c.id, c.matchCount, e};
    }
  }
  if (counters) counters->candidateComparisons += candidates.size();
  return best;
}

enum class FallbackMode {
  /// Training-set majority class.
  kMajority,
  /// Training-set target mean.
  kMean,
  /// No fallback: a query without candidates is an error.
  kError,
};

inline std::string_view to_string(FallbackMode m) {
  switch (m) {
    case FallbackMode::kMajority: return "majority";
    case FallbackMode::kMean: return "mean";
    case FallbackMode::kError: return "error";
  }
  return "error";
}

inline std::optional<FallbackMode> parse_fallback_mode(std::string_view s) {
  if (s == "majority") return FallbackMode::kMajority;
  if (s == "mean") return FallbackMode::kMean;
  if (s == "error") return FallbackMode::kError;
  return std::nullopt;
}

/// Prediction used when no stored token matches the query.
struct FallbackPolicy {
  FallbackMode mode = FallbackMode::kError;
  std::optional<TargetValue> value;

  static FallbackPolicy none() { return {}; }
  static FallbackPolicy constant(TargetValue v) {
    const auto mode = task_of(v) == Task::kClassification ? FallbackMode::kMajority : FallbackMode::kMean;
    return {mode, std::move(v)};
  }

  friend bool operator==(const FallbackPolicy&, const FallbackPolicy&) = default;
};

/// The conventional fallback for a task: majority class or target mean.
inline FallbackMode default_fallback_mode(Task task) {
  return task == Task::kClassification ? FallbackMode::kMajority : FallbackMode::kMean;
}

/// Derives the fallback value from training data. Majority ties resolve to the
/// lexicographically smallest label.
inline FallbackPolicy fit_fallback(FallbackMode mode, const Dataset& train) {
  if (mode == FallbackMode::kError) return FallbackPolicy::none();
  const auto task = train.schema.task;
  if ((mode == FallbackMode::kMajority) != (task == Task::kClassification)) {
    throw Error("fallback '" + std::string(to_string(mode)) + "' does not apply to " +
                std::string(to_string(task)));
  }
  if (train.empty()) throw NoModelError("cannot fit a fallback on an empty training set");
  if (task == Task::kClassification) {
    std::map<std::string, std::size_t> freq;
    for (const auto& row : train.rows) ++freq[std::get<std::string>(target_value(row, train.schema))];
    const auto best = std::max_element(freq.begin(), freq.end(), [](const auto& a, const auto& b) {
      return a.second < b.second;
    });
    return {mode, best->first};
  }
  double sum = 0.0;
  for (const auto& row : train.rows) sum += std::get<double>(target_value(row, train.schema));
  return {mode, sum / static_cast<double>(train.size())};
}

struct PredictionOutcome {
  TargetValue predicted;
  std::optional<NeurovectorId> selectedId;
  std::uint32_t matchCount = 0;
  double selectedEnergy = 0.0;
  std::size_t candidateCount = 0;
  bool usedFallback = false;
};

/// Candidate retrieval plus selection; the prediction is the selected
/// neurovector's target, or the fallback value when nothing matches.
inline PredictionOutcome predict_one(const NeurovectorStore& store, std::span<const Token> tokens,
                                     const EnergyParams& params, const FallbackPolicy& fallback,
                                     CostCounters* counters = nullptr) {
  const bool canFallBack = fallback.mode != FallbackMode::kError && fallback.value.has_value();
  if (store.empty() && !canFallBack) throw NoModelError("the neurovector store is empty");
  const auto candidates = candidate_set(store, tokens, counters);
  const auto sel = select_neurovector(candidates, store, params, counters);
  PredictionOutcome out;
  out.candidateCount = candidates.size();
  if (sel) {
    out.predicted = store.record(sel->id).target;
    out.selectedId = sel->id;
    out.matchCount = sel->matchCount;
    out.selectedEnergy = sel->energy;
    return out;
  }
  if (!canFallBack) throw NoModelError("no stored neurovector matches the query");
  if (task_of(*fallback.value) != store.task()) throw StoreError("fallback value kind does not match the store task");
  out.predicted = *fallback.value;
  out.usedFallback = true;
  return out;
}

}  // namespace neurovec
