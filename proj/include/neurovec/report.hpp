#pragma once

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>

#include "neurovec/evaluate.hpp"
#include "neurovec/train.hpp"
#include "neurovec/value.hpp"

namespace neurovec {

enum class OutputFormat { kTable, kMachine };

inline std::optional<OutputFormat> parse_output_format(std::string_view s) {
  if (s == "table") return OutputFormat::kTable;
  if (s == "machine") return OutputFormat::kMachine;
  return std::nullopt;
}

namespace detail {

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

/// Writes `key=value` lines or a two-column table with aligned keys.
class ReportWriter {
public:
  explicit ReportWriter(OutputFormat fmt) : fmt_(fmt) {}

  void heading(std::string_view title) {
    if (fmt_ == OutputFormat::kTable) os_ << title << '\n';
  }
  /// `machine` is printed in machine mode, `human` in table mode.
  void put(std::string_view key, const std::string& machine, const std::string& human) {
    if (fmt_ == OutputFormat::kMachine) {
      os_ << key << '=' << machine << '\n';
    } else {
      os_ << "  " << key;
      for (std::size_t i = key.size(); i < 24; ++i) os_ << ' ';
      os_ << human << '\n';
    }
  }
  void put(std::string_view key, const std::string& value) { put(key, value, value); }
  void put(std::string_view key, double v, int decimals) {
    put(key, format_shortest(v), fixed(v, decimals));
  }
  template <typename Int>
    requires std::is_integral_v<Int>
  void put(std::string_view key, Int v) {
    put(key, std::to_string(v));
  }

  std::string str() const { return os_.str(); }

private:
  OutputFormat fmt_;
  std::ostringstream os_;
};

inline void put_counters(ReportWriter& w, const CostCounters& c) {
  w.put("hash_ops", c.hashOps);
  w.put("index_lookups", c.indexLookups);
  w.put("searches", c.searches);
  w.put("nv_creations", c.nvCreations);
  w.put("candidate_comparisons", c.candidateComparisons);
}

}  // namespace detail

/// Training summary: store size, energy and success statistics (mean +- stdev)
/// and the maximum-energy neurovector, followed by per-epoch counts. Source
/// rows are printed 1-based (first data row after the header is #1).
inline std::string format_train_report(const TrainReport& r, const Model& m, OutputFormat fmt,
                                       const FlopCoefficients& k = {}) {
  detail::ReportWriter w(fmt);
  const auto& s = r.summary;
  w.heading("training");
  w.put("task", std::string(to_string(m.schema.task)));
  w.put("features", m.schema.feature_count());
  w.put("rows_seen", r.rowsSeen);
  w.put("successes", r.successes);
  w.put("failures", r.failures);
  w.put("neurovectors", r.finalStoreSize);
  const std::size_t rowsPerEpoch = r.perEpoch.empty() ? 0 : r.perEpoch.front().rowsSeen;
  const double ratio = rowsPerEpoch ? static_cast<double>(r.finalStoreSize) / rowsPerEpoch : 0.0;
  w.put("store_ratio", ratio, 4);
  w.put("distinct_tokens", m.store.token_count());
  if (fmt == OutputFormat::kTable) {
    w.put("energy", detail::fixed(s.energyMean, 3) + " +- " + detail::fixed(s.energyStdev, 3));
    w.put("success", detail::fixed(s.successMean, 3) + " +- " + detail::fixed(s.successStdev, 3));
    w.put("max_energy", detail::fixed(s.maxEnergy, 3) + " (nv " + std::to_string(s.maxEnergyId) +
                            (s.maxEnergySourceRow ? ", row #" + std::to_string(*s.maxEnergySourceRow + 1)
                                                  : std::string()) +
                            ")");
  } else {
    w.put("energy_mean", s.energyMean, 3);
    w.put("energy_stdev", s.energyStdev, 3);
    w.put("success_mean", s.successMean, 3);
    w.put("success_stdev", s.successStdev, 3);
    w.put("max_energy", s.maxEnergy, 3);
    w.put("max_energy_id", s.maxEnergyId);
    w.put("max_energy_source_row",
          s.maxEnergySourceRow ? std::to_string(*s.maxEnergySourceRow + 1) : std::string("-"));
  }
  for (std::size_t e = 0; e < r.perEpoch.size(); ++e) {
    const auto& ep = r.perEpoch[e];
    const auto p = "epoch" + std::to_string(e + 1) + "_";
    w.put(p + "successes", ep.successes);
    w.put(p + "failures", ep.failures);
    w.put(p + "no_candidate", ep.noCandidate);
  }
  detail::put_counters(w, r.counters);
  w.put("flop_estimate", flop_estimate(r.counters, m.schema.feature_count(), k));
  return w.str();
}

inline std::string format_eval_report(const EvalReport& r, OutputFormat fmt) {
  detail::ReportWriter w(fmt);
  w.heading("evaluation");
  w.put("task", std::string(to_string(r.task)));
  w.put("n", r.n);
  if (r.accuracy) w.put("accuracy", *r.accuracy, 4);
  if (r.mae) w.put("mae", *r.mae, 4);
  if (r.rmse) w.put("rmse", *r.rmse, 4);
  w.put("fallbacks", r.fallbackCount);
  detail::put_counters(w, r.counters);
  w.put("flop_estimate", r.flopEstimate);
  return w.str();
}

}  // namespace neurovec
