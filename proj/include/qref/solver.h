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

#ifndef QREF_SOLVER_H_
#define QREF_SOLVER_H_

#include <cstdint>
#include <utility>
#include <vector>

#include "qref/lp_model.h"

namespace qref {

struct SolverOptions {
  double timeout_s = 0;         // 0 disables the wall-clock limit
  std::int64_t node_limit = 0;  // 0 disables the node limit
  double integrality_tol = 1e-6;
  double objective_tol = 1e-9;
  double feasibility_tol = 1e-6;
  bool propagate = true;
  bool rounding_heuristic = true;
  // Keep the bound of every processed node in SolveStats::bound_trace.
  bool record_bounds = false;
  // Binaries branched on before any other, and the only ones the rounding
  // heuristic rounds; the rest are left to propagation and the LP.
  std::vector<int> branch_first;
  // Partial assignments completed by propagation and an LP, then offered as
  // incumbents. Infeasible completions are ignored.
  std::vector<std::vector<std::pair<int, double>>> starts;
};

enum class SolveStatus { kOptimal, kInfeasible, kTimeout, kNodeLimit };

const char* to_string(SolveStatus status);

struct SolveStats {
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
  double wall_ms = 0;
  std::vector<double> bound_trace;
};

struct Solution {
  SolveStatus status = SolveStatus::kInfeasible;
  // False when no feasible point is known (infeasible, or a limit hit first).
  bool has_solution = false;
  std::vector<double> values;
  double objective = 0;
  double best_bound = 0;
  SolveStats stats;
};

// LP relaxation (binaries relaxed to [0, 1]).
Solution solve_lp(const Model& model, const SolverOptions& options = {});

// Branch-and-bound: best-first by bound, newest node first on ties (a dive),
// branching on the most fractional binary (lowest id on ties), down child first.
Solution solve(const Model& model, const SolverOptions& options = {});

}  // namespace qref

#endif  // QREF_SOLVER_H_
