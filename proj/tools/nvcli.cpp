// nvcli: train, evaluate, inspect and query neurovector models from CSV files.
//
// Exit codes: 0 success, 2 usage, 3 data error, 4 model error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "neurovec/neurovec.hpp"

namespace nv = neurovec;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitModel = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string format = "table";
  char delimiter = ',';
};

struct TrainFlags {
  std::string data;
  std::string target;
  std::string task = "classification";
  std::string split = "0.7,0,0.3";
  std::uint64_t seed = 1;
  double alpha = 1.0;
  double tolerance = 0.0;
  std::size_t epochs = 1;
  std::string fallback;
  std::optional<std::uint64_t> shuffleSeed;
  std::optional<int> quantize;
  std::string missing = "reject";
  std::vector<std::string> columnKinds;
  std::string model;
  std::string testOut;
};

struct EvalFlags {
  std::string model;
  std::string data;
  std::string task;
  std::string split;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

struct PredictFlags {
  std::string model;
  std::string data;
  bool explain = false;
};

struct InspectFlags {
  std::string model;
  std::size_t top = 0;
};

struct BenchFlags {
  TrainFlags train;
  std::size_t seeds = 10;
  std::uint64_t firstSeed = 1;
};

nv::OutputFormat output_format(const CommonFlags& c) {
  const auto f = nv::parse_output_format(c.format);
  if (!f) throw UsageError("--format must be 'table' or 'machine'");
  return *f;
}

nv::Task parse_task_flag(const std::string& s) {
  const auto t = nv::parse_task(s);
  if (!t) throw UsageError("--task must be 'classification' or 'regression'");
  return *t;
}

nv::SplitSpec parse_split(const std::string& s, std::uint64_t seed) {
  std::vector<double> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = nv::parse_decimal(item);
    if (!v) throw UsageError("--split expects numbers like 0.7,0,0.3");
    parts.push_back(*v);
  }
  if (parts.size() == 2) parts.insert(parts.begin() + 1, 0.0);
  if (parts.size() != 3) throw UsageError("--split expects train,validation,test or train,test");
  nv::SplitSpec spec{parts[0], parts[1], parts[2], seed};
  try {
    spec.validate();
  } catch (const nv::SplitError& e) {
    throw UsageError(std::string("--split: ") + e.what());
  }
  return spec;
}

struct PreparedTraining {
  nv::Task task;
  nv::SplitSpec split;
  nv::TrainConfig config;
  nv::LoadOptions load;
};

PreparedTraining prepare_training(const TrainFlags& f, const CommonFlags& c) {
  PreparedTraining p;
  p.task = parse_task_flag(f.task);
  p.split = parse_split(f.split, f.seed);
  p.config.epochs = f.epochs;
  if (f.epochs == 0) throw UsageError("--epochs must be at least 1");
  p.config.energy = {f.alpha, f.tolerance};
  try {
    p.config.energy.validate();
  } catch (const nv::Error& e) {
    throw UsageError(e.what());
  }
  if (!f.fallback.empty()) {
    const auto m = nv::parse_fallback_mode(f.fallback);
    if (!m) throw UsageError("--fallback must be majority, mean or error");
    if (*m == nv::FallbackMode::kMajority && p.task != nv::Task::kClassification) {
      throw UsageError("--fallback majority requires --task classification");
    }
    if (*m == nv::FallbackMode::kMean && p.task != nv::Task::kRegression) {
      throw UsageError("--fallback mean requires --task regression");
    }
    p.config.fallback = *m;
  }
  p.config.shuffleSeed = f.shuffleSeed;
  if (f.quantize && (*f.quantize < 0 || *f.quantize > 17)) {
    throw UsageError("--quantize must be between 0 and 17");
  }
  p.config.tokenize.format.quantizeDecimals = f.quantize;
  if (f.missing == "reject") {
    p.config.tokenize.missing = nv::MissingPolicy::kReject;
  } else if (f.missing == "skip") {
    p.config.tokenize.missing = nv::MissingPolicy::kSkipToken;
  } else {
    throw UsageError("--missing must be 'reject' or 'skip'");
  }
  for (const auto& ck : f.columnKinds) {
    const auto eq = ck.rfind('=');
    if (eq == std::string::npos) throw UsageError("--column-kind expects NAME=numeric|categorical");
    const auto kind = ck.substr(eq + 1);
    if (kind == "numeric") {
      p.load.kindOverrides[ck.substr(0, eq)] = nv::ColumnKind::kNumeric;
    } else if (kind == "categorical") {
      p.load.kindOverrides[ck.substr(0, eq)] = nv::ColumnKind::kCategorical;
    } else {
      throw UsageError("--column-kind expects NAME=numeric|categorical");
    }
  }
  p.load.csv.delimiter = c.delimiter;
  return p;
}

void write_csv(const nv::Dataset& ds, const std::filesystem::path& path, char delim) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw nv::DataError("cannot write '" + path.string() + "'");
  for (std::size_t c = 0; c < ds.schema.columns.size(); ++c) {
    out << (c ? std::string(1, delim) : "") << nv::csv_escape(ds.schema.columns[c].name, delim);
  }
  out << '\n';
  for (const auto& row : ds.rows) {
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
      out << (c ? std::string(1, delim) : "") << nv::csv_escape(row.cells[c], delim);
    }
    out << '\n';
  }
}

int cmd_train(const TrainFlags& f, const CommonFlags& c) {
  const auto fmt = output_format(c);
  const auto p = prepare_training(f, c);
  const auto data = nv::load_csv(f.data, f.target, p.task, p.load);
  const auto parts = nv::split(data, p.split);
  const auto result = nv::train(parts.train, p.config);
  const auto checksum = nv::save_model(result.model, f.model);
  if (!f.testOut.empty()) write_csv(parts.test, f.testOut, c.delimiter);
  std::cout << nv::format_train_report(result.report, result.model, fmt);
  if (fmt == nv::OutputFormat::kMachine) {
    std::cout << "checksum=" << checksum << '\n';
  } else {
    std::cout << "  checksum                " << checksum << '\n';
  }
  return 0;
}

nv::Dataset read_bound(const std::string& path, const nv::Schema& schema, bool requireTarget,
                       char delim) {
  const auto table = nv::read_csv(path, nv::CsvOptions{delim});
  return nv::bind_table(table, schema, requireTarget);
}

int cmd_evaluate(const EvalFlags& f, const CommonFlags& c) {
  const auto fmt = output_format(c);
  std::optional<nv::Task> task;
  if (!f.task.empty()) task = parse_task_flag(f.task);
  std::optional<nv::SplitSpec> split;
  // Either flag re-creates the training-time split; the other takes the train default.
  if (!f.split.empty() || f.seed) {
    split = parse_split(f.split.empty() ? "0.7,0,0.3" : f.split, f.seed.value_or(1));
  }

  const auto model = nv::load_model(f.model);
  if (task && *task != model.schema.task) {
    throw nv::SchemaMismatchError("task mismatch: model is " +
                                  std::string(nv::to_string(model.schema.task)) + ", requested " +
                                  std::string(nv::to_string(*task)));
  }
  auto data = read_bound(f.data, model.schema, true, c.delimiter);
  if (split) data = nv::split(data, *split).test;
  const auto ev = nv::evaluate(model, data, {f.threads, {}});
  std::cout << nv::format_eval_report(ev.report, fmt);
  return 0;
}

int cmd_predict(const PredictFlags& f, const CommonFlags& c) {
  output_format(c);
  const auto model = nv::load_model(f.model);
  const auto data = read_bound(f.data, model.schema, false, c.delimiter);
  const auto preds = nv::predict_rows(model, data.rows);
  const char d = c.delimiter;
  std::cout << "row" << d << "prediction" << d << "origin";
  if (f.explain) std::cout << d << "nv_id" << d << "match_count" << d << "energy" << d << "source_row" << d << "candidates";
  std::cout << '\n';
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    std::cout << data.rows[i].sourceRow + 1 << d << nv::csv_escape(nv::format_target(p.predicted), d)
              << d << (p.usedFallback ? "fallback" : "neurovector");
    if (f.explain) {
      if (p.selectedId) {
        const auto& rec = model.store.record(*p.selectedId);
        std::cout << d << *p.selectedId << d << p.matchCount << d
                  << nv::format_shortest(p.selectedEnergy) << d
                  << (rec.sourceRow ? std::to_string(*rec.sourceRow + 1) : std::string("-"));
      } else {
        std::cout << d << '-' << d << 0 << d << 0 << d << '-';
      }
      std::cout << d << p.candidateCount;
    }
    std::cout << '\n';
  }
  return 0;
}

int cmd_inspect(const InspectFlags& f, const CommonFlags& c) {
  const auto fmt = output_format(c);
  const auto model = nv::load_model(f.model);
  const auto s = nv::training_summary(model.store, model.params);
  std::ostringstream os;
  if (fmt == nv::OutputFormat::kMachine) {
    os << "task=" << nv::to_string(model.schema.task) << '\n'
       << "target=" << model.schema.target_name() << '\n'
       << "features=" << model.schema.feature_count() << '\n'
       << "neurovectors=" << s.count << '\n'
       << "distinct_tokens=" << model.store.token_count() << '\n'
       << "energy_mean=" << nv::format_shortest(s.energyMean) << '\n'
       << "energy_stdev=" << nv::format_shortest(s.energyStdev) << '\n'
       << "success_mean=" << nv::format_shortest(s.successMean) << '\n'
       << "success_stdev=" << nv::format_shortest(s.successStdev) << '\n'
       << "max_energy=" << nv::format_shortest(s.maxEnergy) << '\n'
       << "max_energy_id=" << s.maxEnergyId << '\n'
       << "max_energy_source_row="
       << (s.maxEnergySourceRow ? std::to_string(*s.maxEnergySourceRow + 1) : std::string("-"))
       << '\n';
  } else {
    char line[256];
    os << "dataset target '" << model.schema.target_name() << "' (" << nv::to_string(model.schema.task)
       << ", " << model.schema.feature_count() << " features, " << model.store.token_count()
       << " distinct tokens)\n";
    os << "neurovectors  energy               success              max_energy\n";
    std::snprintf(line, sizeof line, "%-12zu  %.3f +- %-10.3f  %.3f +- %-10.3f  %.3f (row #%s)\n",
                  s.count, s.energyMean, s.energyStdev, s.successMean, s.successStdev, s.maxEnergy,
                  s.maxEnergySourceRow ? std::to_string(*s.maxEnergySourceRow + 1).c_str() : "-");
    os << line;
  }
  if (f.top > 0) {
    std::vector<nv::NeurovectorId> ids;
    for (const auto& r : model.store.records()) ids.push_back(r.id);
    const auto task = model.schema.task;
    std::stable_sort(ids.begin(), ids.end(), [&](auto a, auto b) {
      return nv::energy(model.store.record(a), task, model.params) >
             nv::energy(model.store.record(b), task, model.params);
    });
    ids.resize(std::min(ids.size(), f.top));
    for (auto id : ids) {
      const auto& r = model.store.record(id);
      os << (fmt == nv::OutputFormat::kMachine ? "nv=" : "  nv ") << id
         << " target=" << nv::format_target(r.target) << " use=" << r.use
         << " success=" << r.success
         << " energy=" << nv::format_shortest(nv::energy(r, task, model.params))
         << " source_row=" << (r.sourceRow ? std::to_string(*r.sourceRow + 1) : std::string("-"))
         << '\n';
    }
  }
  std::cout << os.str();
  return 0;
}

int cmd_benchmark(const BenchFlags& f, const CommonFlags& c) {
  const auto fmt = output_format(c);
  if (f.seeds == 0) throw UsageError("--seeds must be at least 1");
  auto p = prepare_training(f.train, c);
  const auto data = nv::load_csv(f.train.data, f.train.target, p.task, p.load);
  const auto start = std::chrono::steady_clock::now();
  double metric1 = 0, metric2 = 0, storeRatio = 0;
  std::size_t storeSize = 0;
  for (std::size_t s = 0; s < f.seeds; ++s) {
    p.split.seed = f.firstSeed + s;
    const auto parts = nv::split(data, p.split);
    const auto trained = nv::train(parts.train, p.config);
    const auto ev = nv::evaluate(trained.model, parts.test);
    if (ev.report.accuracy) metric1 += *ev.report.accuracy;
    if (ev.report.mae) metric1 += *ev.report.mae;
    if (ev.report.rmse) metric2 += *ev.report.rmse;
    storeSize += trained.report.finalStoreSize;
    storeRatio += static_cast<double>(trained.report.finalStoreSize) / parts.train.size();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double n = static_cast<double>(f.seeds);
  std::ostringstream os;
  auto put = [&](const std::string& k, const std::string& v) {
    if (fmt == nv::OutputFormat::kMachine) {
      os << k << '=' << v << '\n';
    } else {
      os << "  " << k << std::string(k.size() < 24 ? 24 - k.size() : 1, ' ') << v << '\n';
    }
  };
  if (fmt == nv::OutputFormat::kTable) os << "benchmark\n";
  put("task", std::string(nv::to_string(p.task)));
  put("rows", std::to_string(data.size()));
  put("seeds", std::to_string(f.seeds));
  if (p.task == nv::Task::kClassification) {
    put("mean_accuracy", nv::format_shortest(metric1 / n));
  } else {
    put("mean_mae", nv::format_shortest(metric1 / n));
    put("mean_rmse", nv::format_shortest(metric2 / n));
  }
  put("mean_neurovectors", nv::format_shortest(static_cast<double>(storeSize) / n));
  put("mean_store_ratio", nv::format_shortest(storeRatio / n));
  // Wall time varies between runs; keep it on stderr so stdout stays reproducible.
  std::cerr << "elapsed_seconds=" << secs << '\n';
  std::cout << os.str();
  return 0;
}

void add_training_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--data", f.data, "CSV file with a header row")->required();
  cmd->add_option("--target", f.target, "Target column name")->required();
  cmd->add_option("--task", f.task, "classification | regression")->capture_default_str();
  cmd->add_option("--split", f.split, "train,validation,test fractions")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Split seed")->capture_default_str();
  cmd->add_option("--alpha", f.alpha, "Regression energy decay (> 0)")->capture_default_str();
  cmd->add_option("--tolerance", f.tolerance, "Regression success tolerance (>= 0)")->capture_default_str();
  cmd->add_option("--epochs", f.epochs, "Training passes")->capture_default_str();
  cmd->add_option("--fallback", f.fallback, "majority | mean | error (default by task)");
  cmd->add_option("--shuffle-seed", f.shuffleSeed, "Shuffle training rows with this seed");
  cmd->add_option("--quantize", f.quantize, "Round numeric values to N decimals before tokenizing");
  cmd->add_option("--missing", f.missing, "reject | skip empty feature cells")->capture_default_str();
  cmd->add_option("--column-kind", f.columnKinds, "Override inferred kind: NAME=numeric|categorical");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neurovector models for tabular data"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with default flag values (flags win)");
  CommonFlags common;
  std::string delimiter = ",";
  app.add_option("--format", common.format, "table | machine")->capture_default_str();
  app.add_option("--delimiter", delimiter, "CSV delimiter character")->capture_default_str();

  TrainFlags trainFlags;
  auto* train = app.add_subcommand("train", "Train a model on the training split and save it");
  add_training_flags(train, trainFlags);
  train->add_option("--model", trainFlags.model, "Output model file")->required();
  train->add_option("--test-out", trainFlags.testOut, "Write the held-out test rows to this CSV");

  EvalFlags evalFlags;
  auto* evaluate = app.add_subcommand("evaluate", "Score a saved model on labelled rows");
  evaluate->add_option("--model", evalFlags.model, "Model file")->required();
  evaluate->add_option("--data", evalFlags.data, "CSV with features and target")->required();
  evaluate->add_option("--task", evalFlags.task, "Expected task; mismatches are errors");
  evaluate->add_option("--split", evalFlags.split, "Re-split --data and score only the test part");
  evaluate->add_option("--seed", evalFlags.seed, "Split seed (implies --split 0.7,0,0.3 if absent)");
  evaluate->add_option("--threads", evalFlags.threads, "Worker threads")->capture_default_str();

  PredictFlags predictFlags;
  auto* predict = app.add_subcommand("predict", "Predict one value per CSV row");
  predict->add_option("--model", predictFlags.model, "Model file")->required();
  predict->add_option("--data", predictFlags.data, "CSV with feature columns")->required();
  predict->add_flag("--explain", predictFlags.explain, "Add the selected neurovector and its source row");

  InspectFlags inspectFlags;
  auto* inspect = app.add_subcommand("inspect", "Store statistics of a saved model");
  inspect->add_option("--model", inspectFlags.model, "Model file")->required();
  inspect->add_option("--top", inspectFlags.top, "List the N highest-energy neurovectors");

  BenchFlags benchFlags;
  auto* bench = app.add_subcommand("benchmark", "Train and evaluate over several split seeds");
  add_training_flags(bench, benchFlags.train);
  bench->add_option("--seeds", benchFlags.seeds, "Number of split seeds")->capture_default_str();
  bench->add_option("--first-seed", benchFlags.firstSeed, "First split seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
    common.delimiter = delimiter[0];
    if (*train) return cmd_train(trainFlags, common);
    if (*evaluate) return cmd_evaluate(evalFlags, common);
    if (*predict) return cmd_predict(predictFlags, common);
    if (*inspect) return cmd_inspect(inspectFlags, common);
    if (*bench) return cmd_benchmark(benchFlags, common);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nv::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const nv::TokenError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const nv::ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kExitModel;
  } catch (const nv::NoModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kExitModel;
  } catch (const nv::StoreError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kExitModel;
  } catch (const nv::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
