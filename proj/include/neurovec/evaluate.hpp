#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "neurovec/cost.hpp"
#include "neurovec/dataset.hpp"
#include "neurovec/error.hpp"
#include "neurovec/metrics.hpp"
#include "neurovec/model.hpp"
#include "neurovec/store.hpp"

namespace neurovec {

struct EvalReport {
  Task task = Task::kClassification;
  std::optional<double> accuracy;
  std::optional<double> mae;
  std::optional<double> rmse;
  std::size_t n = 0;
  std::size_t fallbackCount = 0;
  std::size_t featureCount = 0;
  CostCounters counters;
  std::uint64_t flopEstimate = 0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct EvalOptions {
  /// Worker threads; rows are split into contiguous shards. Results do not
  /// depend on the thread count.
  unsigned threads = 1;
  FlopCoefficients flops;
};

struct Evaluation {
  EvalReport report;
  std::vector<PredictionOutcome> predictions;
};

/// Throws SchemaMismatchError naming the first column or setting that differs.
inline void check_compatible(const Schema& model, const Schema& data) {
  if (model.task != data.task) {
    throw SchemaMismatchError("task mismatch: model is " + std::string(to_string(model.task)) +
                              ", data is " + std::string(to_string(data.task)));
  }
  if (model.target_name() != data.target_name()) {
    throw SchemaMismatchError("target column mismatch: model uses '" + model.target_name() +
                              "', data uses '" + data.target_name() + "'");
  }
  for (const auto& col : model.columns) {
    const auto j = data.find(col.name);
    if (!j) throw SchemaMismatchError("column '" + col.name + "' is missing from the data");
    if (data.columns[*j].kind != col.kind) {
      throw SchemaMismatchError("column '" + col.name + "' is " +
                                std::string(to_string(data.columns[*j].kind)) + " in the data but " +
                                std::string(to_string(col.kind)) + " in the model");
    }
  }
  if (data.columns.size() != model.columns.size()) {
    for (const auto& col : data.columns) {
      if (!model.find(col.name)) {
        throw SchemaMismatchError("column '" + col.name + "' is not known to the model");
      }
    }
  }
}

/// Predicts every row of `rows` (schema order must match the model's) and
/// returns the outcomes in row order. Counters are summed over all shards.
inline std::vector<PredictionOutcome> predict_rows(const Model& model, std::span<const Row> rows,
                                                   CostCounters* counters = nullptr,
                                                   unsigned threads = 1) {
  std::vector<PredictionOutcome> out(rows.size());
  const std::size_t shards = std::max<std::size_t>(1, std::min<std::size_t>(threads, rows.size()));
  std::vector<CostCounters> shardCounters(shards);
  std::vector<std::exception_ptr> errors(shards);
  auto work = [&](std::size_t s) {
    try {
      const std::size_t begin = rows.size() * s / shards;
      const std::size_t end = rows.size() * (s + 1) / shards;
      for (std::size_t i = begin; i < end; ++i) {
        const auto tokens = model.tokenize_row(rows[i]);
        out[i] = predict_one(model.store, tokens, model.params, model.fallback, &shardCounters[s]);
      }
    } catch (...) {
      errors[s] = std::current_exception();
    }
  };
  if (shards == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(shards);
    for (std::size_t s = 0; s < shards; ++s) pool.emplace_back(work, s);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  if (counters) {
    for (const auto& c : shardCounters) *counters += c;
  }
  return out;
}

/// Predicts a held-out set and fills the task's metrics plus cost counters.
inline Evaluation evaluate(const Model& model, const Dataset& test, const EvalOptions& opts = {}) {
  if (test.empty()) throw DataError("test set is empty");
  check_compatible(model.schema, test.schema);
  const Dataset* rows = &test;
  Dataset reordered;
  if (!(test.schema.columns == model.schema.columns)) {
    // Same columns in a different order: lay rows out in model order.
    reordered.schema = model.schema;
    for (const auto& r : test.rows) {
      Row nr;
      nr.sourceRow = r.sourceRow;
      for (const auto& col : model.schema.columns) {
        const auto j = *test.schema.find(col.name);
        nr.cells.push_back(r.cells[j]);
        nr.numeric.push_back(r.numeric[j]);
      }
      reordered.rows.push_back(std::move(nr));
    }
    rows = &reordered;
  }

  Evaluation ev;
  auto& rep = ev.report;
  rep.task = model.schema.task;
  rep.n = rows->size();
  rep.featureCount = model.schema.feature_count();
  ev.predictions = predict_rows(model, rows->rows, &rep.counters, opts.threads);

  if (rep.task == Task::kClassification) {
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(rep.n);
    for (std::size_t i = 0; i < rep.n; ++i) {
      pairs.emplace_back(std::get<std::string>(ev.predictions[i].predicted),
                         std::get<std::string>(target_value(rows->rows[i], model.schema)));
    }
    rep.accuracy = accuracy(pairs);
  } else {
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(rep.n);
    for (std::size_t i = 0; i < rep.n; ++i) {
      pairs.emplace_back(std::get<double>(ev.predictions[i].predicted),
                         std::get<double>(target_value(rows->rows[i], model.schema)));
    }
    rep.mae = mae(pairs);
    rep.rmse = rmse(pairs);
  }
  for (const auto& p : ev.predictions) rep.fallbackCount += p.usedFallback ? 1 : 0;
  rep.flopEstimate = flop_estimate(rep.counters, rep.featureCount, opts.flops);
  return ev;
}

}  // namespace neurovec
