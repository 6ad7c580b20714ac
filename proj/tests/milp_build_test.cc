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

#include "qref/milp_build.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "qref/oracle.h"
#include "qref/solver.h"
#include "random_instance.h"
#include "test_util.h"

namespace qref {
namespace {

const Row& row_named(const Model& m, const std::string& name) {
  for (const auto& r : m.rows) {
    if (r.name == name) return r;
  }
  throw std::out_of_range("no row " + name);
}

double coef(const Row& r, int var) {
  for (const auto& t : r.terms) {
    if (t.var == var) return t.coef;
  }
  return 0;
}

int var_named(const Model& m, const std::string& name) {
  for (std::size_t i = 0; i < m.vars.size(); ++i) {
    if (m.vars[i].name == name) return static_cast<int>(i);
  }
  throw std::out_of_range("no variable " + name);
}

TEST(MilpBuildTest, NumericValueRowsForGpa) {
  Annotation a = annotate(testing::scholarship_query(), testing::running_example());
  MilpBuild b = build_model(a, testing::running_constraints(), {});
  ASSERT_EQ(b.numeric.size(), 1u);
  // M exceeds every GPA value in the data.
  EXPECT_DOUBLE_EQ(b.numeric[0].big_m, 5);
  EXPECT_EQ(b.numeric[0].delta, Decimal::parse("0.05"));
  const Model& m = b.model;
  int c = var_named(m, "C[GPA,>=]");
  int ind = var_named(m, "GPA[3.7,>=]");
  const Row& on = row_named(m, "on[GPA>=3.7]");
  EXPECT_EQ(on.sense, RowSense::kGe);
  EXPECT_DOUBLE_EQ(coef(on, c), 1);
  EXPECT_DOUBLE_EQ(coef(on, ind), 5);
  EXPECT_NEAR(on.rhs, 3.75, 1e-12);
  const Row& off = row_named(m, "off[GPA>=3.7]");
  EXPECT_EQ(off.sense, RowSense::kLe);
  EXPECT_NEAR(off.rhs, 3.7 + 5, 1e-12);
}

TEST(MilpBuildTest, SelectionRowWithDistinctShadow) {
  Annotation a = annotate(testing::scholarship_query(), testing::running_example());
  MilpBuild b = build_model(a, testing::running_constraints(), {});
  // Joined tuple 5 is t4's TU row, shadowed by the RB row (id 4).
  const Row& lo = row_named(b.model, "select_lo[5]");
  EXPECT_DOUBLE_EQ(coef(lo, b.select_var.at(4)), -1);
  EXPECT_DOUBLE_EQ(coef(lo, b.select_var.at(5)), -3);  // |Preds| + |S(t)|
  EXPECT_DOUBLE_EQ(lo.rhs, -1);
  const Row& hi = row_named(b.model, "select_hi[5]");
  EXPECT_DOUBLE_EQ(hi.rhs, 1);  // |Preds| + |S(t)| - 1 - |S(t)|
}

TEST(MilpBuildTest, PositionRowsUseConfiguredDelta) {
  Annotation a = annotate(testing::scholarship_query(), testing::running_example());
  BuildOptions opt;
  opt.position_delta = 0.001;
  MilpBuild b = build_model(a, testing::running_constraints(), opt);
  // Joined tuple 7 is t6 (female), so it carries l_{t,6}.
  const Row& beyond = row_named(b.model, "beyond[7,6]");
  EXPECT_NEAR(beyond.rhs, 6.001, 1e-12);
  EXPECT_DOUBLE_EQ(coef(beyond, b.prefix_var.at({7, 6})), 2 * 14 + 1);
  const Row& pos = row_named(b.model, "position[7]");
  EXPECT_EQ(pos.sense, RowSense::kEq);
  EXPECT_DOUBLE_EQ(pos.rhs, 15);
  EXPECT_DOUBLE_EQ(coef(pos, b.select_var.at(7)), 14);
  for (TupleId better = 1; better < 7; ++better) {
    EXPECT_DOUBLE_EQ(coef(pos, b.select_var.at(better)), -1);
  }
}

TEST(MilpBuildTest, PruningDropsTuplesBehindTheirClass) {
  Query q = parse_query(
      "SELECT * FROM Students NATURAL JOIN Activities "
      "WHERE GPA >= 3.7 AND Activity = 'RB' ORDER BY SAT DESC");
  Annotation a = annotate(q, testing::running_example());
  ConstraintSet cs = parse_constraints(R"([{"group":{"Gender":"F"},"k":2,"n":1,"sense":"lower"}])");
  BuildOptions opt;
  opt.relevancy_prune = true;
  MilpBuild b = build_model(a, cs, opt);
  // t14 follows t7 and t10 in its lineage class (RB, GPA 3.7).
  EXPECT_EQ(std::count(b.encoded.begin(), b.encoded.end(), 14), 0);
  EXPECT_EQ(std::count(b.encoded.begin(), b.encoded.end(), 8), 1);   // t7
  EXPECT_EQ(std::count(b.encoded.begin(), b.encoded.end(), 11), 1);  // t10
  EXPECT_EQ(b.pruned_count + static_cast<int>(b.encoded.size()), 14);
}

TEST(MilpBuildTest, MergedSelectionHasOneVariablePerClass) {
  Query q = parse_query(
      "SELECT * FROM Students NATURAL JOIN Activities "
      "WHERE GPA >= 3.7 AND Activity = 'RB' ORDER BY SAT DESC");
  Annotation a = annotate(q, testing::running_example());
  BuildOptions opt;
  opt.merge_lineage = true;
  MilpBuild b = build_model(a, testing::running_constraints(), opt);
  std::set<int> vars;
  for (const auto& [id, var] : b.select_var) vars.insert(var);
  EXPECT_EQ(static_cast<int>(vars.size()), a.class_count);
  EXPECT_EQ(b.select_var.at(8), b.select_var.at(14));  // t7 and t14
  // DISTINCT disables merging.
  MilpBuild d = build_model(annotate(testing::scholarship_query(), testing::running_example()),
                            testing::running_constraints(), opt);
  EXPECT_FALSE(d.merged);
}

TEST(MilpBuildTest, RelaxationIsOneSidedOnlyForSingleTypeTuples) {
  Annotation a = annotate(testing::scholarship_query(), testing::running_example());
  BuildOptions opt;
  opt.relax_single_type = true;
  MilpBuild b = build_model(a, testing::running_constraints(), opt);
  ASSERT_TRUE(b.relaxed);
  // t6 (id 7): female, low income: lower group only.
  EXPECT_EQ(row_named(b.model, "position[7]").sense, RowSense::kGe);
  // t4 (id 4): male, high income: upper group only.
  EXPECT_EQ(row_named(b.model, "position[4]").sense, RowSense::kLe);
  // t8 (id 9): female and high income: both.
  EXPECT_EQ(row_named(b.model, "position[9]").sense, RowSense::kEq);
  opt.distance.kind = DistanceKind::kJaccard;
  EXPECT_FALSE(build_model(a, testing::running_constraints(), opt).relaxed);
}

TEST(MilpBuildTest, DeviationRowIsScaledToIntegers) {
  Annotation a = annotate(testing::scholarship_query(), testing::running_example());
  BuildOptions opt;
  opt.epsilon = Rational(1, 2);
  MilpBuild b = build_model(a, testing::running_constraints(), opt);
  const Row& dev = row_named(b.model, "max_deviation");
  // n = 3 and n = 1: lcm 3, coefficients 1 and 3, budget floor(1/2 * 2 * 3).
  EXPECT_DOUBLE_EQ(coef(dev, b.deviation_vars[0]), 1);
  EXPECT_DOUBLE_EQ(coef(dev, b.deviation_vars[1]), 3);
  EXPECT_DOUBLE_EQ(dev.rhs, 3);
}

TEST(MilpBuildTest, RejectsUndefinedDistances) {
  Database db = testing::running_example();
  Annotation zero = annotate(parse_query("SELECT * FROM Students NATURAL JOIN Activities "
                                         "WHERE GPA >= 0 ORDER BY SAT DESC"),
                             db);
  EXPECT_THROW(build_model(zero, testing::running_constraints(), {}), DistanceError);
  Annotation tiny = annotate(parse_query("SELECT * FROM Students NATURAL JOIN Activities "
                                         "WHERE GPA >= 3.9 ORDER BY SAT DESC"),
                             db);
  BuildOptions opt;
  opt.distance.kind = DistanceKind::kJaccard;
  EXPECT_THROW(build_model(tiny, testing::running_constraints(), opt), PreconditionError);
}

TEST(MilpBuildTest, RunningExampleMatchesExhaustiveSearch) {
  Database db = testing::running_example();
  Query q = testing::scholarship_query();
  Annotation a = annotate(q, db);
  ConstraintSet cs = testing::running_constraints();
  for (DistanceKind kind : {DistanceKind::kPred, DistanceKind::kJaccard, DistanceKind::kKendall}) {
    DistanceSpec dist{kind, 0, 1.0};
    BuildOptions opt;
    opt.distance = dist;
    opt.epsilon = Rational(0);
    MilpBuild b = build_model(a, cs, opt);
    Solution s = solve(b.model);
    ASSERT_EQ(s.status, SolveStatus::kOptimal) << to_string(kind);
    Refinement r = extract_refinement(b, a, s.values);
    check_consistency(b, a, cs, Rational(0), r, s.values);
    Query q2 = apply_refinement(q, r);
    SearchResult ref = exhaustive_search(db, a, cs, dist, Rational(0));
    ASSERT_TRUE(ref.found);
    EXPECT_NEAR(refinement_distance(q, q2, evaluate(q, db), evaluate(q2, db), dist, cs.k_star()),
                ref.distance, 1e-9)
        << to_string(kind) << " " << render_sql(q2);
  }
}

TEST(MilpBuildTest, InfeasibleWithoutToleranceFeasibleWithIt) {
  auto dir = testing::data_dir() / "no_perfect";
  Database db;
  db["Items"] = testing::load(dir / "items.csv", "Items");
  Query q = parse_query(testing::slurp(dir / "query.sql"));
  ConstraintSet cs = load_constraints(dir / "constraints.json");
  Annotation a = annotate(q, db);
  BuildOptions opt;
  opt.epsilon = Rational(0);
  EXPECT_EQ(solve(build_model(a, cs, opt).model).status, SolveStatus::kInfeasible);
  opt.epsilon = Rational(1, 2);
  EXPECT_EQ(solve(build_model(a, cs, opt).model).status, SolveStatus::kOptimal);
}

// Solving, extracting and re-evaluating must agree with the exhaustive
// oracle on every configuration of the optimizations.
TEST(MilpBuildTest, RandomInstancesAgreeWithExhaustiveSearch) {
  testing::Rng rng(4242);
  int refined = 0;
  for (int round = 0; round < 40; ++round) {
    testing::Instance inst = testing::random_instance(rng);
    Annotation a = annotate(inst.query, inst.db);
    for (DistanceKind kind : {DistanceKind::kPred, DistanceKind::kJaccard, DistanceKind::kKendall}) {
      DistanceSpec dist{kind, 0, 1.0};
      SearchResult ref = exhaustive_search(inst.db, a, inst.constraints, dist, inst.epsilon);
      for (int flags = 0; flags < 8; ++flags) {
        BuildOptions opt;
        opt.distance = dist;
        opt.epsilon = inst.epsilon;
        opt.relevancy_prune = flags & 1;
        opt.merge_lineage = flags & 2;
        opt.relax_single_type = flags & 4;
        MilpBuild b = build_model(a, inst.constraints, opt);
        Solution s = solve(b.model);
        ASSERT_EQ(s.status == SolveStatus::kOptimal, ref.found)
            << inst.describe() << " kind=" << to_string(kind) << " flags=" << flags;
        if (!ref.found) continue;
        Refinement r = extract_refinement(b, a, s.values);
        ASSERT_NO_THROW(check_consistency(b, a, inst.constraints, inst.epsilon, r, s.values))
            << inst.describe();
        Query q2 = apply_refinement(inst.query, r);
        Ranking original = evaluate(inst.query, inst.db);
        double d = refinement_distance(inst.query, q2, original, evaluate(q2, inst.db), dist,
                                       inst.constraints.k_star());
        EXPECT_NEAR(d, ref.distance, 1e-6)
            << inst.describe() << " kind=" << to_string(kind) << " flags=" << flags
            << " milp=" << render_sql(q2) << " oracle=" << render_sql(ref.refined);
        if (kind == DistanceKind::kKendall) EXPECT_NEAR(s.objective, d, 1e-6);
        ++refined;
      }
    }
  }
  EXPECT_GT(refined, 100);
}

}  // namespace
}  // namespace qref
