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

#ifndef QREF_ENGINE_H_
#define QREF_ENGINE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qref/constraints.h"
#include "qref/distances.h"
#include "qref/numeric.h"
#include "qref/query.h"
#include "qref/ranking.h"

namespace qref {

enum class EngineKind {
  kMilp,       // plain model
  kMilpOpt,    // pruning, lineage merge and relaxation where they apply
  kNaive,      // exhaustive search with re-evaluation
  kNaiveProv,  // exhaustive search over the annotated join
};

const char* to_string(EngineKind kind);
EngineKind parse_engine_kind(const std::string& name);

struct EngineOptions {
  EngineKind engine = EngineKind::kMilpOpt;
  DistanceSpec distance;
  Rational epsilon{1, 2};
  // Switches for kMilpOpt.
  bool prune = true;
  bool merge = true;
  bool relax = true;
  double position_delta = 0.5;
  // Add implied rows that tighten the LP relaxation (both MILP engines).
  bool tighten = false;
  double timeout_s = 0;
  std::int64_t max_candidates = 2000000;
  // Write the generated model here in LP format (MILP engines).
  std::string lp_dump;
};

enum class RefineStatus { kRefined, kNoRefinement, kTimeout };

const char* to_string(RefineStatus status);

struct TopEntry {
  int rank = 0;
  TupleId tuple_id = 0;
  std::map<std::string, std::string> values;
  std::vector<std::string> groups;  // labels of constraints whose group holds it
};

struct ModelStats {
  int variables = 0;
  int rows = 0;
  int binaries = 0;
  int encoded_tuples = 0;
  int pruned_tuples = 0;
  int lineage_classes = 0;
};

struct RefineResult {
  RefineStatus status = RefineStatus::kNoRefinement;
  EngineKind engine = EngineKind::kMilpOpt;
  Query original;
  Query refined;  // meaningful when has_refinement
  bool has_refinement = false;
  Refinement refinement;
  DistanceSpec distance;
  int outcome_k = 0;
  int k_star = 0;
  double distance_value = 0;
  Rational deviation;
  Rational epsilon;
  std::vector<TopEntry> top_k;
  ModelStats model;
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
  std::int64_t candidates = 0;
  double setup_ms = 0;
  double solve_ms = 0;
  double total_ms = 0;
};

RefineResult refine(const Database& db, const Query& q, const ConstraintSet& cs,
                    const EngineOptions& options);

nlohmann::json to_json(const RefineResult& result);

}  // namespace qref

#endif  // QREF_ENGINE_H_
