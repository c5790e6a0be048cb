#pragma once

#include <string>
#include <string_view>

#include "neurovec/csv.hpp"
#include "neurovec/dataset.hpp"

namespace fixtures {

// In-memory dataset built from CSV text, same path as load_csv minus the file.
inline neurovec::Dataset dataset(std::string_view csv, std::string_view target,
                                 neurovec::Task task = neurovec::Task::kClassification) {
  const auto table = neurovec::parse_csv(csv);
  const auto schema = neurovec::infer_schema(table, target, task);
  return neurovec::bind_table(table, schema, true);
}

}  // namespace fixtures
