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

#include "qref/solver.h"

#include <gtest/gtest.h>

#include <cmath>

#include "random_milp.h"
#include "test_util.h"

namespace qref {
namespace {

TEST(LpTest, TextbookMaximization) {
  // max x + y  s.t.  x + 2y <= 4, 3x + y <= 6.
  Model m;
  int x = m.add_var("x", VarType::kContinuous, 0, 10);
  int y = m.add_var("y", VarType::kContinuous, 0, 10);
  m.add_row("a", {{x, 1}, {y, 2}}, RowSense::kLe, 4);
  m.add_row("b", {{x, 3}, {y, 1}}, RowSense::kLe, 6);
  m.set_objective({{x, -1}, {y, -1}});
  Solution s = solve_lp(m);
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_NEAR(s.objective, -2.8, 1e-9);
  EXPECT_NEAR(s.values[x], 1.6, 1e-9);
  EXPECT_NEAR(s.values[y], 1.2, 1e-9);
}

TEST(LpTest, EqualityAndGreaterRows) {
  Model m;
  int x = m.add_var("x", VarType::kContinuous, -5, 5);
  int y = m.add_var("y", VarType::kContinuous, -5, 5);
  m.add_row("sum", {{x, 1}, {y, 1}}, RowSense::kEq, 1);
  m.add_row("diff", {{x, 1}, {y, -1}}, RowSense::kGe, 2);
  m.set_objective({{x, 1}, {y, 2}}, 10);
  Solution s = solve_lp(m);
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  // y as small as possible: y = -5, x = 6 is out of bounds, so x = 5, y = -4.
  EXPECT_NEAR(s.objective, 10 + 5 - 8, 1e-9);
}

TEST(LpTest, DetectsInfeasibility) {
  Model m;
  int x = m.add_var("x", VarType::kContinuous, 0, 1);
  int y = m.add_var("y", VarType::kContinuous, 0, 1);
  m.add_row("big", {{x, 1}, {y, 1}}, RowSense::kGe, 3);
  EXPECT_EQ(solve_lp(m).status, SolveStatus::kInfeasible);
  EXPECT_EQ(solve(m).status, SolveStatus::kInfeasible);
}

// Reference optimum by vertex enumeration: every choice of `n` tight
// constraints among rows and bounds, solved by Gaussian elimination.
double vertex_optimum(const Model& m, bool& feasible) {
  int n = static_cast<int>(m.vars.size());
  struct Plane {
    std::vector<double> a;
    double b;
  };
  std::vector<Plane> planes;
  for (const auto& r : m.rows) {
    Plane p{std::vector<double>(n, 0), r.rhs};
    for (const auto& t : r.terms) p.a[t.var] = t.coef;
    planes.push_back(p);
  }
  for (int j = 0; j < n; ++j) {
    Plane lo{std::vector<double>(n, 0), m.vars[j].lower};
    lo.a[j] = 1;
    planes.push_back(lo);
    Plane up{std::vector<double>(n, 0), m.vars[j].upper};
    up.a[j] = 1;
    planes.push_back(up);
  }
  int p = static_cast<int>(planes.size());
  double best = INFINITY;
  feasible = false;
  std::vector<int> pick(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      std::vector<std::vector<double>> a(n, std::vector<double>(n + 1));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a[i][j] = planes[pick[i]].a[j];
        a[i][n] = planes[pick[i]].b;
      }
      for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int i = c + 1; i < n; ++i) {
          if (std::abs(a[i][c]) > std::abs(a[piv][c])) piv = i;
        }
        if (std::abs(a[piv][c]) < 1e-9) return;
        std::swap(a[c], a[piv]);
        for (int i = 0; i < n; ++i) {
          if (i == c) continue;
          double f = a[i][c] / a[c][c];
          for (int j = c; j <= n; ++j) a[i][j] -= f * a[c][j];
        }
      }
      std::vector<double> x(n);
      for (int i = 0; i < n; ++i) x[i] = a[i][n] / a[i][i];
      if (m.max_violation(x) > 1e-7) return;
      feasible = true;
      best = std::min(best, m.objective_value(x));
      return;
    }
    for (int i = start; i < p; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

Model random_lp(testing::Rng& rng, int n, int rows) {
  Model m;
  for (int j = 0; j < n; ++j) {
    int lo = rng.uniform(-5, 2);
    m.add_var("x" + std::to_string(j), VarType::kContinuous, lo, lo + rng.uniform(0, 8));
  }
  for (int i = 0; i < rows; ++i) {
    std::vector<Term> terms;
    for (int j = 0; j < n; ++j) {
      if (rng.coin(0.7)) terms.push_back({j, static_cast<double>(rng.uniform(-6, 6))});
    }
    RowSense sense = static_cast<RowSense>(rng.uniform(0, 2));
    if (sense == RowSense::kEq && !rng.coin(0.3)) sense = RowSense::kLe;
    m.add_row("r" + std::to_string(i), terms, sense, rng.uniform(-10, 10));
  }
  std::vector<Term> obj;
  for (int j = 0; j < n; ++j) obj.push_back({j, static_cast<double>(rng.uniform(-5, 5))});
  m.set_objective(obj);
  return m;
}

TEST(LpTest, RandomLpsMatchVertexEnumeration) {
  testing::Rng rng(101);
  int feasible_count = 0;
  for (int round = 0; round < 400; ++round) {
    Model m = random_lp(rng, rng.uniform(1, 4), rng.uniform(0, 5));
    bool feasible = false;
    double ref = vertex_optimum(m, feasible);
    Solution s = solve_lp(m);
    if (!feasible) {
      EXPECT_EQ(s.status, SolveStatus::kInfeasible) << to_lp_string(m);
      continue;
    }
    ++feasible_count;
    ASSERT_EQ(s.status, SolveStatus::kOptimal) << to_lp_string(m);
    EXPECT_NEAR(s.objective, ref, 1e-6) << to_lp_string(m);
    EXPECT_LE(m.max_violation(s.values), 1e-6);
  }
  EXPECT_GT(feasible_count, 100);
}

TEST(MilpTest, RandomMilpsMatchBruteForce) {
  testing::Rng rng(202);
  int feasible_count = 0;
  for (int round = 0; round < 300; ++round) {
    Model m = testing::random_milp(rng);
    bool feasible = false;
    double ref = testing::brute_force(m, feasible);
    for (bool heuristics : {true, false}) {
      SolverOptions opt;
      opt.propagate = heuristics;
      opt.rounding_heuristic = heuristics;
      Solution s = solve(m, opt);
      if (!feasible) {
        EXPECT_EQ(s.status, SolveStatus::kInfeasible) << to_lp_string(m);
        continue;
      }
      ASSERT_EQ(s.status, SolveStatus::kOptimal) << to_lp_string(m);
      EXPECT_NEAR(s.objective, ref, 1e-6) << to_lp_string(m);
      EXPECT_LE(m.max_violation(s.values), 1e-6);
      for (std::size_t j = 0; j < m.vars.size(); ++j) {
        if (m.vars[j].type == VarType::kBinary) {
          EXPECT_TRUE(s.values[j] == 0 || s.values[j] == 1);
        }
      }
    }
    feasible_count += feasible;
  }
  EXPECT_GT(feasible_count, 100);
}

TEST(MilpTest, BoundsNeverDecreaseAlongTheSearch) {
  testing::Rng rng(303);
  for (int round = 0; round < 50; ++round) {
    Model m = testing::random_milp(rng);
    SolverOptions opt;
    opt.record_bounds = true;
    Solution s = solve(m, opt);
    const auto& trace = s.stats.bound_trace;
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_GE(trace[i], trace[i - 1] - 1e-9);
  }
}

TEST(MilpTest, NodeLimitReturnsIncumbentStatus) {
  // Knapsack with many ties so that the search is not trivial.
  Model m;
  std::vector<Term> w, obj;
  for (int j = 0; j < 20; ++j) {
    int v = m.add_binary("b" + std::to_string(j));
    w.push_back({v, 3.0 + j % 4});
    obj.push_back({v, -(2.0 + j % 5)});
  }
  m.add_row("cap", w, RowSense::kLe, 23.5);
  m.set_objective(obj);
  SolverOptions opt;
  opt.node_limit = 1;
  Solution s = solve(m, opt);
  EXPECT_TRUE(s.status == SolveStatus::kNodeLimit || s.status == SolveStatus::kOptimal);
  if (s.has_solution) EXPECT_LE(m.max_violation(s.values), 1e-6);
  Solution full = solve(m);
  ASSERT_EQ(full.status, SolveStatus::kOptimal);
  EXPECT_LE(full.objective, s.has_solution ? s.objective + 1e-9 : INFINITY);
}

}  // namespace
}  // namespace qref
