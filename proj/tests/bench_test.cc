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

#include "qref/bench.h"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "test_util.h"

namespace qref {
namespace {

std::filesystem::path suite_dir() { return testing::data_dir() / "bench" / "suite"; }

Scenario astronauts_without_sweeps() {
  Scenario s = load_scenario(suite_dir() / "astronauts.json");
  s.sweeps.clear();
  return s;
}

TEST(ScenarioTest, LoadsBundledSuite) {
  auto suite = load_suite(suite_dir());
  ASSERT_EQ(suite.size(), 4u);
  for (const auto& s : suite) {
    std::set<std::string> axes;
    for (const auto& sw : s.sweeps) axes.insert(sw.axis);
    EXPECT_EQ(axes, (std::set<std::string>{"k", "epsilon", "constraint_count", "constraint_type",
                                           "scale"}))
        << s.name;
    EXPECT_EQ(s.defaults.k, 10);
    EXPECT_EQ(s.defaults.epsilon, Rational(1, 2));
    EXPECT_EQ(s.distances.size(), 3u);
  }
}

TEST(ScenarioTest, KSweepRunsFromTenToHundred) {
  Scenario s = load_scenario(suite_dir() / "astronauts.json");
  const Sweep* k = nullptr;
  for (const auto& sw : s.sweeps) {
    if (sw.axis == "k") k = &sw;
  }
  ASSERT_NE(k, nullptr);
  ASSERT_EQ(k->values.size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(k->values[i].get<int>(), 10 * (i + 1));
}

TEST(ScenarioTest, SweepOverridesApplyToTheSweepOnly) {
  Scenario s = load_scenario(suite_dir() / "law.json");
  for (const auto& sw : s.sweeps) {
    if (sw.axis == "constraint_count") EXPECT_EQ(sw.base.constraint_set, "adjusted");
    if (sw.axis == "constraint_type") EXPECT_EQ(sw.base.constraint_count, 2);
    if (sw.axis == "k") EXPECT_EQ(sw.base.constraint_set, s.defaults.constraint_set);
  }
}

TEST(ScenarioTest, ConstraintBoundsScaleWithK) {
  Scenario s = load_scenario(suite_dir() / "astronauts.json");
  ScenarioPoint p = s.defaults;
  p.constraint_set = "adjusted";
  p.constraint_count = 3;
  p.k = 10;
  ConstraintSet cs = instantiate_constraints(s, p);
  ASSERT_EQ(cs.constraints.size(), 3u);
  EXPECT_EQ(cs.constraints[0].n, 3);  // floor(10 / 3)
  EXPECT_EQ(cs.constraints[2].n, 2);  // floor(10 / 5)
  p.k = 1;
  EXPECT_EQ(instantiate_constraints(s, p).constraints[2].n, 1);
  p.constraint_count = 6;
  EXPECT_THROW(instantiate_constraints(s, p), ScenarioError);
  p.constraint_set = "missing";
  p.constraint_count = 1;
  EXPECT_THROW(instantiate_constraints(s, p), ScenarioError);
}

TEST(ScenarioTest, RejectsUnknownAxis) {
  auto path = std::filesystem::temp_directory_path() / "qref_bad_axis.json";
  {
    std::ofstream out(path);
    out << R"({"data": {"R": "r.csv"}, "query": "q.sql",
              "constraint_sets": {"a": [{"group": {"G": "x"}, "sense": "lower", "n_fraction": 0.5}]},
              "sweeps": [{"axis": "lambda", "values": [1]}]})";
  }
  EXPECT_THROW(load_scenario(path), ScenarioError);
  std::filesystem::remove(path);
}

TEST(ScaleTest, ShrinksOnlyNamedRelations) {
  Database db;
  db["Big"] = Relation{"Big", Schema({{"A", AttrKind::kNumerical}}), {}};
  db["Small"] = Relation{"Small", Schema({{"A", AttrKind::kNumerical}}), {}};
  for (int i = 0; i < 8; ++i) {
    db["Big"].rows.push_back({i + 1, {Value::number(Decimal::from_int(i))}, {}});
  }
  for (int i = 0; i < 2; ++i) {
    db["Small"].rows.push_back({i + 1, {Value::number(Decimal::from_int(i))}, {}});
  }
  Database all = scale_database(db, 0.25);
  EXPECT_EQ(all["Big"].rows.size(), 2u);
  EXPECT_EQ(all["Small"].rows.size(), 1u);
  Database some = scale_database(db, 0.25, {"Big"});
  EXPECT_EQ(some["Big"].rows.size(), 2u);
  EXPECT_EQ(some["Small"].rows.size(), 2u);
  EXPECT_THROW(scale_database(db, 0), ScenarioError);
}

TEST(BenchTest, AstronautsDefaultSolvesEveryDistance) {
  BenchOptions o;
  o.repeats = 1;
  auto rows = run_scenario(astronauts_without_sweeps(), o);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "refined") << r.distance << " " << r.error;
    EXPECT_EQ(r.engine, "milp+opt");
    EXPECT_GT(r.model.rows, 0);
    EXPECT_GE(r.total_ms, r.setup_ms + r.solve_ms - 1.0);
  }
}

TEST(BenchTest, OneRowPerSweepValue) {
  Scenario s = load_scenario(suite_dir() / "astronauts.json");
  std::vector<Sweep> k_only;
  for (const auto& sw : s.sweeps) {
    if (sw.axis == "k") k_only.push_back(sw);
  }
  s.sweeps = k_only;
  s.distances = {DistanceKind::kPred};
  BenchOptions o;
  o.repeats = 1;
  auto rows = run_scenario(s, o);
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0].axis, "default");
  for (int i = 1; i <= 10; ++i) {
    EXPECT_EQ(rows[i].axis, "k");
    EXPECT_EQ(rows[i].point.k, 10 * i);
    EXPECT_EQ(rows[i].axis_value, std::to_string(10 * i));
    EXPECT_NE(rows[i].status, "error") << rows[i].error;
  }
}

TEST(BenchTest, RepeatCountIsReported) {
  Scenario s = astronauts_without_sweeps();
  s.distances = {DistanceKind::kPred};
  for (int repeats : {1, 3}) {
    BenchOptions o;
    o.repeats = repeats;
    auto rows = run_scenario(s, o);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].repeats, repeats);
  }
}

TEST(BenchTest, FailuresAreRecordedAndTheSuiteContinues) {
  Scenario s = astronauts_without_sweeps();
  s.distances = {DistanceKind::kPred};
  Sweep bad;
  bad.axis = "constraint_count";
  bad.values = {nlohmann::json(1), nlohmann::json(9)};
  bad.base = s.defaults;
  s.sweeps = {bad};
  BenchOptions o;
  o.repeats = 1;
  auto rows = run_suite({s, astronauts_without_sweeps()}, o);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[1].status, "refined");
  EXPECT_EQ(rows[2].status, "error");
  EXPECT_NE(rows[2].error.find("9 requested"), std::string::npos);
  EXPECT_EQ(rows[3].scenario, "astronauts");
}

TEST(BenchTest, ParallelRunsKeepJobOrder) {
  Scenario s = load_scenario(suite_dir() / "astronauts.json");
  std::vector<Sweep> eps_only;
  for (const auto& sw : s.sweeps) {
    if (sw.axis == "epsilon") eps_only.push_back(sw);
  }
  s.sweeps = eps_only;
  s.distances = {DistanceKind::kPred};
  BenchOptions o;
  o.repeats = 1;
  auto serial = run_scenario(s, o);
  o.parallel = true;
  int reported = 0;
  o.progress = [&](const BenchRow&) { ++reported; };
  auto parallel = run_scenario(s, o);
  ASSERT_EQ(serial.size(), parallel.size());
  EXPECT_EQ(reported, static_cast<int>(parallel.size()));
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].axis_value, parallel[i].axis_value);
    EXPECT_EQ(serial[i].distance_value, parallel[i].distance_value);
  }
}

TEST(BenchTest, CsvHasOneLinePerRow) {
  Scenario s = astronauts_without_sweeps();
  BenchOptions o;
  o.repeats = 1;
  auto rows = run_scenario(s, o);
  std::ostringstream csv;
  write_bench_csv(rows, csv);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("scenario,axis,axis_value,engine,distance,", 0), 0u);
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, static_cast<int>(rows.size()));
  std::ostringstream table;
  write_bench_summary(rows, table);
  EXPECT_NE(table.str().find("setup_ms"), std::string::npos);
}

}  // namespace
}  // namespace qref
