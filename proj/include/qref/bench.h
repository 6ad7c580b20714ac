// Copyright 2026 The qref Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QREF_BENCH_H_
#define QREF_BENCH_H_

#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qref/constraints.h"
#include "qref/dataset.h"
#include "qref/engine.h"
#include "qref/query.h"

namespace qref {

// A constraint whose bound scales with the sweep's k: n = max(1, floor(f * k)).
struct ScenarioConstraint {
  std::map<std::string, std::string> group;
  Sense sense = Sense::kLower;
  double n_fraction = 0.5;
};

struct ScenarioPoint {
  int k = 10;
  Rational epsilon{1, 2};
  std::string constraint_set;
  int constraint_count = 1;
  double scale = 1.0;
};

struct Sweep {
  std::string axis;  // k | epsilon | constraint_count | constraint_type | scale
  std::vector<nlohmann::json> values;
  // The defaults with the sweep's "with" overrides applied.
  ScenarioPoint base;
};

struct Scenario {
  std::string name;
  std::filesystem::path file;
  std::map<std::string, std::filesystem::path> data;
  std::map<std::string, std::filesystem::path> schemas;
  std::filesystem::path query;
  std::map<std::string, std::vector<ScenarioConstraint>> constraint_sets;
  ScenarioPoint defaults;
  std::vector<DistanceKind> distances{DistanceKind::kPred};
  std::vector<EngineKind> engines{EngineKind::kMilpOpt};
  std::vector<Sweep> sweeps;
  double timeout_s = 60;
  // Relations the scale axis shrinks; all of them when empty.
  std::set<std::string> scaled;
};

class ScenarioError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Paths inside the file are relative to its directory.
Scenario load_scenario(const std::filesystem::path& path);
// Every *.json file of the directory, by file name.
std::vector<Scenario> load_suite(const std::filesystem::path& dir);

// The first `point.constraint_count` constraints of the named set at k.
ConstraintSet instantiate_constraints(const Scenario& s, const ScenarioPoint& point);

// Keeps the first floor(scale * |R|) rows (at least one) of every relation
// named in `only`, or of every relation when `only` is empty.
Database scale_database(const Database& db, double scale, const std::set<std::string>& only = {});

struct BenchRow {
  std::string scenario;
  std::string axis;  // "default" for the unswept point
  std::string axis_value;
  std::string engine;
  std::string distance;
  ScenarioPoint point;
  int repeats = 0;
  std::string status;  // refine status, or "error"
  std::string error;
  double distance_value = 0;
  double setup_ms = 0;
  double solve_ms = 0;
  double total_ms = 0;
  ModelStats model;
};

struct BenchOptions {
  int repeats = 5;
  // Run points concurrently. Timings are then not comparable.
  bool parallel = false;
  // Overrides every scenario's timeout when positive.
  double timeout_s = 0;
  // Called once per finished row, never concurrently.
  std::function<void(const BenchRow&)> progress;
};

// One row per scenario x point x engine x distance. Each row averages
// `repeats` runs after one discarded warm-up run. Failures become rows with
// status "error".
std::vector<BenchRow> run_scenario(const Scenario& s, const BenchOptions& options);
std::vector<BenchRow> run_suite(const std::vector<Scenario>& suite, const BenchOptions& options);

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);
// Fixed-width table of the rows' timing breakdown.
void write_bench_summary(const std::vector<BenchRow>& rows, std::ostream& out);

}  // namespace qref

#endif  // QREF_BENCH_H_
