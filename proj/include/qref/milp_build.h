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

#ifndef QREF_MILP_BUILD_H_
#define QREF_MILP_BUILD_H_

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qref/constraints.h"
#include "qref/distances.h"
#include "qref/lp_model.h"
#include "qref/numeric.h"
#include "qref/query.h"
#include "qref/ranking.h"

namespace qref {

struct BuildOptions {
  DistanceSpec distance;
  Rational epsilon{1, 2};
  // Drop tuples that cannot reach the top-k* of any refinement.
  bool relevancy_prune = false;
  // One selection variable per lineage class. Ignored for DISTINCT queries.
  bool merge_lineage = false;
  // One-sided position rows for tuples whose groups carry only lower or
  // only upper constraints. Only used with the predicate distance.
  bool relax_single_type = false;
  // Gap forcing l_{t,k} = 0 when the position exceeds k.
  double position_delta = 0.5;
  // Extra rows implied by the model that tighten its LP relaxation:
  // r_t <= each lineage atom, monotone indicator chains, l_{t,k} <= r_t and
  // sum_t l_{t,k} <= k. They remove no integer solution.
  bool tighten = false;
};

// The solver's assignment does not describe a refinement that evaluates to
// what the model claims.
class ConsistencyError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericFamily {
  CmpOp op = CmpOp::kGe;  // never kEq
  // Indicator per domain value: 1 iff `value op C`.
  std::vector<std::pair<Decimal, int>> indicators;
};

struct NumericVars {
  std::size_t predicate = 0;
  int constant_var = -1;
  int distance_var = -1;  // |C - C0| / C0, predicate distance only
  Decimal original;
  Decimal delta;  // half the smallest gap among domain values and C0
  Decimal lower;  // bounds of the constant variable
  Decimal upper;
  double big_m = 0;
  std::vector<NumericFamily> families;
};

struct CategoricalVars {
  std::size_t predicate = 0;
  std::map<std::string, int> value_vars;
};

struct MilpBuild {
  Model model;
  int k_star = 0;
  int outcome_k = 0;
  // Encoded tuples in base-rank order.
  std::vector<TupleId> encoded;
  std::map<TupleId, int> select_var;  // r_t, or the class variable when merged
  std::map<TupleId, int> position_var;
  std::map<std::pair<TupleId, int>, int> prefix_var;  // l_{t,k}
  std::vector<int> deviation_vars;                    // E per constraint
  std::vector<NumericVars> numeric;
  std::vector<CategoricalVars> categorical;
  // Original top-k at the outcome k (outcome distances only).
  Ranking original_top;
  int pruned_count = 0;
  int lineage_classes = 0;
  bool merged = false;
  bool relaxed = false;
  // Per constraint: tuples of the group that carry l_{t,k}.
  std::vector<std::vector<TupleId>> group_members;
  std::vector<int> group_k;
};

// Throws PreconditionError when the outcome distance needs more original
// output than exists, DistanceError for the predicate distance over a
// non-positive constant.
MilpBuild build_model(const Annotation& annotation, const ConstraintSet& cs,
                      const BuildOptions& options);

// Reads the refinement off a solver assignment. Numeric constants are the
// original constant clamped into the interval allowed by the indicators.
Refinement extract_refinement(const MilpBuild& build, const Annotation& annotation,
                              const std::vector<double>& values);

// Indicator and categorical value binaries. Fixing them determines every
// other binary of the model.
std::vector<int> decision_vars(const MilpBuild& build);

// Values of the decision binaries that describe `refinement`, which must
// keep the query's predicate skeleton.
std::vector<std::pair<int, double>> decision_assignment(const MilpBuild& build,
                                                        const Annotation& annotation,
                                                        const Refinement& refinement);

// sum_t l_{t,k} over each constraint's group, as claimed by the assignment.
std::vector<int> model_group_counts(const MilpBuild& build, const std::vector<double>& values);

// Re-evaluates `refinement` and compares it with the assignment: output size
// at least k*, group counts equal to the model's (one-sided when relaxed),
// deviation within epsilon. Throws ConsistencyError.
void check_consistency(const MilpBuild& build, const Annotation& annotation,
                       const ConstraintSet& cs, const Rational& epsilon,
                       const Refinement& refinement, const std::vector<double>& values);

}  // namespace qref

#endif  // QREF_MILP_BUILD_H_
