#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "neurovec/csv.hpp"
#include "neurovec/error.hpp"
#include "neurovec/rng.hpp"
#include "neurovec/token.hpp"
#include "neurovec/value.hpp"

namespace neurovec {

enum class Task { kClassification, kRegression };

inline std::string_view to_string(Task t) {
  return t == Task::kClassification ? "classification" : "regression";
}

inline std::optional<Task> parse_task(std::string_view s) {
  if (s == "classification") return Task::kClassification;
  if (s == "regression") return Task::kRegression;
  return std::nullopt;
}

/// Class label for classification, real value for regression.
using TargetValue = std::variant<std::string, double>;

inline Task task_of(const TargetValue& v) {
  return std::holds_alternative<std::string>(v) ? Task::kClassification : Task::kRegression;
}

inline std::string format_target(const TargetValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return format_shortest(std::get<double>(v));
}

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;

  friend bool operator==(const Column&, const Column&) = default;
};

struct Schema {
  std::vector<Column> columns;
  std::size_t targetIndex = 0;
  Task task = Task::kClassification;

  const std::string& target_name() const { return columns.at(targetIndex).name; }
  /// Number of features d.
  std::size_t feature_count() const { return columns.size() - 1; }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i].name == name) return i;
    }
    return std::nullopt;
  }

  /// Throws DataError when names repeat, the target is out of range, or the
  /// target kind disagrees with the task.
  void validate() const {
    if (columns.size() < 2) throw DataError("schema needs a target and at least one feature");
    if (targetIndex >= columns.size()) throw DataError("target column index out of range");
    std::unordered_set<std::string_view> seen;
    for (const auto& c : columns) {
      if (c.name.empty()) throw DataError("empty column name");
      if (!seen.insert(c.name).second) throw DataError("duplicate column name '" + c.name + "'");
    }
    const auto want = task == Task::kClassification ? ColumnKind::kCategorical : ColumnKind::kNumeric;
    if (columns[targetIndex].kind != want) {
      throw DataError("target column '" + target_name() + "' must be " +
                      std::string(to_string(want)) + " for " + std::string(to_string(task)));
    }
  }

  friend bool operator==(const Schema&, const Schema&) = default;
};

/// One data row in schema column order.
struct Row {
  std::vector<std::string> cells;
  std::vector<std::optional<double>> numeric;
  /// 0-based position of the row in the file it was read from.
  std::size_t sourceRow = 0;
};

struct Dataset {
  Schema schema;
  std::vector<Row> rows;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
};

enum class MissingPolicy { kReject, kSkipToken };

/// Everything that decides how a row becomes tokens. Persisted with a model.
struct TokenizeOptions {
  char separator = kDefaultSeparator;
  ValueFormat format;
  MissingPolicy missing = MissingPolicy::kReject;

  friend bool operator==(const TokenizeOptions& a, const TokenizeOptions& b) {
    return a.separator == b.separator && a.format.quantizeDecimals == b.format.quantizeDecimals &&
           a.missing == b.missing;
  }
};

inline TargetValue target_value(const Row& row, const Schema& schema) {
  const auto& cell = row.cells.at(schema.targetIndex);
  if (schema.task == Task::kClassification) {
    auto label = trim(cell);
    if (label.empty()) throw RowError(row.sourceRow + 1, "missing target value");
    return std::string(label);
  }
  const auto v = parse_decimal(cell);
  if (!v) throw RowError(row.sourceRow + 1, "target '" + cell + "' is not a number");
  return *v;
}

/// One token per non-target column, in schema order. Empty cells are
/// rejected or skipped according to `opts.missing`.
inline std::vector<Token> tokenize_instance(const Row& row, const Schema& schema,
                                            const TokenizeOptions& opts = {}) {
  if (row.cells.size() != schema.columns.size()) {
    throw RowError(row.sourceRow + 1, "expected " + std::to_string(schema.columns.size()) +
                                          " cells, found " + std::to_string(row.cells.size()));
  }
  std::vector<Token> tokens;
  tokens.reserve(schema.feature_count());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (c == schema.targetIndex) continue;
    const auto& col = schema.columns[c];
    if (trim(row.cells[c]).empty()) {
      if (opts.missing == MissingPolicy::kSkipToken) continue;
      throw RowError(row.sourceRow + 1, "missing value for column '" + col.name + "'");
    }
    std::string value;
    try {
      value = canonical_value(row.cells[c], col.kind, opts.format);
    } catch (const DataError& e) {
      throw RowError(row.sourceRow + 1, "column '" + col.name + "': " + e.what());
    }
    tokens.push_back(make_token(col.name, value, opts.separator));
  }
  if (tokens.empty()) throw RowError(row.sourceRow + 1, "row has no usable feature values");
  return tokens;
}

/// Schema inference: a column is numeric iff every non-empty cell parses as a
/// decimal number. Overrides win over inference; the target kind follows the task.
inline Schema infer_schema(const CsvTable& table, std::string_view targetColumn, Task task,
                           const std::map<std::string, ColumnKind>& overrides = {}) {
  Schema schema;
  schema.task = task;
  bool found = false;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    Column col{std::string(trim(table.header[c])), ColumnKind::kNumeric};
    for (const auto& r : table.rows) {
      if (c < r.size() && !trim(r[c]).empty() && !parse_decimal(r[c])) {
        col.kind = ColumnKind::kCategorical;
        break;
      }
    }
    if (auto it = overrides.find(col.name); it != overrides.end()) col.kind = it->second;
    if (col.name == targetColumn) {
      schema.targetIndex = c;
      col.kind = task == Task::kClassification ? ColumnKind::kCategorical : ColumnKind::kNumeric;
      found = true;
    }
    schema.columns.push_back(std::move(col));
  }
  if (!found) throw DataError("target column '" + std::string(targetColumn) + "' not in header");
  schema.validate();
  return schema;
}

namespace detail {

inline Row make_row(std::vector<std::string> cells, const Schema& schema, std::size_t sourceRow) {
  Row row;
  row.sourceRow = sourceRow;
  row.numeric.resize(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (schema.columns[c].kind == ColumnKind::kNumeric && !trim(cells[c]).empty()) {
      row.numeric[c] = parse_decimal(cells[c]);
      if (!row.numeric[c]) {
        throw RowError(sourceRow + 1, "column '" + schema.columns[c].name + "': cell '" +
                                          cells[c] + "' is not a number");
      }
    }
  }
  row.cells = std::move(cells);
  return row;
}

}  // namespace detail

/// Rows of `table` laid out by an existing schema (for example the one stored in a
/// model). Columns are matched by name; extra columns are ignored. When the target
/// column is absent and not required, its cells are left empty.
inline Dataset bind_table(const CsvTable& table, const Schema& schema, bool requireTarget) {
  std::vector<std::optional<std::size_t>> source(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    for (std::size_t h = 0; h < table.header.size(); ++h) {
      if (trim(table.header[h]) == schema.columns[c].name) {
        source[c] = h;
        break;
      }
    }
    if (!source[c] && (c != schema.targetIndex || requireTarget)) {
      throw SchemaMismatchError("column '" + schema.columns[c].name + "' is missing from the data");
    }
  }
  Dataset ds{schema, {}};
  ds.rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& raw = table.rows[r];
    if (raw.size() != table.header.size()) {
      throw RowError(r + 1, "expected " + std::to_string(table.header.size()) + " cells, found " +
                                std::to_string(raw.size()));
    }
    std::vector<std::string> cells(schema.columns.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (source[c]) cells[c] = raw[*source[c]];
    }
    ds.rows.push_back(detail::make_row(std::move(cells), schema, r));
  }
  return ds;
}

struct LoadOptions {
  CsvOptions csv;
  std::map<std::string, ColumnKind> kindOverrides;
};

/// Reads a CSV file, infers its schema and validates every row. Errors name the
/// 1-based data row.
inline Dataset load_csv(const std::filesystem::path& path, std::string_view targetColumn, Task task,
                        const LoadOptions& opts = {}) {
  const auto table = read_csv(path, opts.csv);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != table.header.size()) {
      throw RowError(r + 1, "expected " + std::to_string(table.header.size()) + " cells, found " +
                                std::to_string(table.rows[r].size()));
    }
  }
  if (table.rows.empty()) throw DataError("'" + path.string() + "' contains no data rows");
  const auto schema = infer_schema(table, targetColumn, task, opts.kindOverrides);
  auto ds = bind_table(table, schema, true);
  for (const auto& row : ds.rows) target_value(row, ds.schema);
  return ds;
}

struct SplitSpec {
  double train = 0.7;
  double validation = 0.0;
  double test = 0.3;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(train > 0.0) || validation < 0.0 || test < 0.0) {
      throw SplitError("split fractions must be non-negative with a positive training share");
    }
    if (std::abs(train + validation + test - 1.0) > 1e-9) {
      throw SplitError("split fractions must sum to 1");
    }
  }
};

struct SplitIndices {
  std::vector<std::size_t> train, validation, test;
};

/// Seeded shuffle, then contiguous cuts at floor(N*train) and floor(N*(train+validation)).
inline SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  const auto perm = shuffled_indices(n, spec.seed);
  // The epsilon absorbs representation error such as 10 * 0.6 = 5.999...
  const auto cut1 = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train + 1e-9));
  const auto cut2 = std::min(
      n, static_cast<std::size_t>(
             std::floor(static_cast<double>(n) * (spec.train + spec.validation) + 1e-9)));
  SplitIndices out;
  out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(cut1));
  out.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(cut1),
                        perm.begin() + static_cast<std::ptrdiff_t>(cut2));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(cut2), perm.end());
  auto check = [](const std::vector<std::size_t>& part, double frac, const char* name) {
    if (frac > 0.0 && part.empty()) {
      throw SplitError(std::string(name) + " partition is empty; dataset too small for the split");
    }
  };
  check(out.train, spec.train, "training");
  check(out.validation, spec.validation, "validation");
  check(out.test, spec.test, "test");
  return out;
}

struct SplitDatasets {
  Dataset train, validation, test;
};

inline SplitDatasets split(const Dataset& ds, const SplitSpec& spec) {
  const auto idx = split_indices(ds.size(), spec);
  auto take = [&](const std::vector<std::size_t>& ids) {
    Dataset part{ds.schema, {}};
    part.rows.reserve(ids.size());
    for (auto i : ids) part.rows.push_back(ds.rows[i]);
    return part;
  };
  return {take(idx.train), take(idx.validation), take(idx.test)};
}

}  // namespace neurovec
