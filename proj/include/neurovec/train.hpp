#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "neurovec/cost.hpp"
#include "neurovec/dataset.hpp"
#include "neurovec/error.hpp"
#include "neurovec/model.hpp"
#include "neurovec/rng.hpp"
#include "neurovec/store.hpp"

namespace neurovec {

struct TrainConfig {
  std::size_t epochs = 1;
  EnergyParams energy;
  /// Fallback stored with the model for queries without candidates. Training
  /// itself treats a query without candidates as a failure regardless.
  std::optional<FallbackMode> fallback;  // default: majority / mean by task
  /// Absent: rows are visited in dataset order.
  std::optional<std::uint64_t> shuffleSeed;
  TokenizeOptions tokenize;
};

struct EpochStats {
  std::size_t rowsSeen = 0;
  std::size_t successes = 0;
  /// Rows that created a neurovector (wrong prediction or no candidate).
  std::size_t failures = 0;
  /// Failures caused by a query without candidates.
  std::size_t noCandidate = 0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

/// Store-wide statistics of energy and success.
struct EnergySummary {
  std::size_t count = 0;
  double energyMean = 0.0;
  double energyStdev = 0.0;
  double successMean = 0.0;
  double successStdev = 0.0;
  double maxEnergy = 0.0;
  NeurovectorId maxEnergyId = 0;
  std::optional<std::size_t> maxEnergySourceRow;

  friend bool operator==(const EnergySummary&, const EnergySummary&) = default;
};

struct TrainReport {
  std::size_t rowsSeen = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::size_t finalStoreSize = 0;
  std::vector<EpochStats> perEpoch;
  EnergySummary summary;
  CostCounters counters;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

struct TrainResult {
  Model model;
  TrainReport report;
};

/// Mean and population standard deviation over all records; the max-energy
/// record is the lowest id among those with maximal energy.
inline EnergySummary training_summary(const NeurovectorStore& store, const EnergyParams& params) {
  if (store.empty()) throw NoModelError("cannot summarise an empty neurovector store");
  EnergySummary s;
  s.count = store.size();
  const double n = static_cast<double>(s.count);
  double eSum = 0.0, sSum = 0.0;
  bool first = true;
  for (const auto& r : store.records()) {
    const double e = energy(r, store.task(), params);
    eSum += e;
    sSum += static_cast<double>(r.success);
    if (first || e > s.maxEnergy) {
      s.maxEnergy = e;
      s.maxEnergyId = r.id;
      s.maxEnergySourceRow = r.sourceRow;
      first = false;
    }
  }
  s.energyMean = eSum / n;
  s.successMean = sSum / n;
  double eVar = 0.0, sVar = 0.0;
  for (const auto& r : store.records()) {
    const double de = energy(r, store.task(), params) - s.energyMean;
    const double ds = static_cast<double>(r.success) - s.successMean;
    eVar += de * de;
    sVar += ds * ds;
  }
  s.energyStdev = std::sqrt(eVar / n);
  s.successStdev = std::sqrt(sVar / n);
  return s;
}

/// Failure-driven training: each row is predicted with the current store; the
/// selected neurovector's counters are updated, and a new neurovector is
/// created for the row only when the prediction is wrong or nothing matched.
inline TrainResult train(const Dataset& data, const TrainConfig& config) {
  if (data.empty()) throw DataError("training set is empty");
  if (config.epochs == 0) throw Error("epochs must be at least 1");
  config.energy.validate();
  data.schema.validate();

  TrainResult result;
  auto& model = result.model;
  auto& report = result.report;
  model.schema = data.schema;
  model.tokenize = config.tokenize;
  model.params = config.energy;
  model.fallback = fit_fallback(config.fallback.value_or(default_fallback_mode(data.schema.task)), data);
  model.store = NeurovectorStore(data.schema.task);

  // Tokenize once up front; row errors surface before the store is touched.
  std::vector<std::vector<Token>> tokens;
  std::vector<TargetValue> targets;
  tokens.reserve(data.size());
  targets.reserve(data.size());
  for (const auto& row : data.rows) {
    tokens.push_back(tokenize_instance(row, data.schema, config.tokenize));
    targets.push_back(target_value(row, data.schema));
  }

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (config.shuffleSeed) order = shuffled_indices(data.size(), *config.shuffleSeed);

  auto& store = model.store;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochStats stats;
    for (auto i : order) {
      ++stats.rowsSeen;
      const auto candidates = candidate_set(store, tokens[i], &report.counters);
      const auto sel = select_neurovector(candidates, store, config.energy, &report.counters);
      bool correct = false;
      if (sel) {
        correct = prediction_correct(store.record(sel->id).target, targets[i], config.energy);
        store.record_outcome(sel->id, targets[i], config.energy);
      } else {
        ++stats.noCandidate;
      }
      if (correct) {
        ++stats.successes;
      } else {
        ++stats.failures;
        store.insert(tokens[i], targets[i], data.rows[i].sourceRow, &report.counters);
      }
    }
    report.rowsSeen += stats.rowsSeen;
    report.successes += stats.successes;
    report.failures += stats.failures;
    report.perEpoch.push_back(stats);
  }
  report.finalStoreSize = store.size();
  report.summary = training_summary(store, config.energy);
  return result;
}

}  // namespace neurovec
