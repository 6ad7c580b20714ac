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

#ifndef QREF_ORACLE_H_
#define QREF_ORACLE_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qref/constraints.h"
#include "qref/distances.h"
#include "qref/numeric.h"
#include "qref/query.h"
#include "qref/ranking.h"

namespace qref {

enum class SearchMode {
  kNaive,       // re-join and re-evaluate every candidate
  kProvenance,  // filter the annotated join by lineage
};

struct SearchOptions {
  SearchMode mode = SearchMode::kProvenance;
  std::int64_t max_candidates = 2000000;
  double timeout_s = 0;  // 0 disables
};

class SearchSpaceTooLarge : public std::runtime_error {
 public:
  SearchSpaceTooLarge(double size, std::int64_t limit)
      : std::runtime_error("refinement space has " + format(size) + " candidates, above the limit of " +
                           std::to_string(limit)),
        size_(size) {}
  double size() const { return size_; }

 private:
  static std::string format(double v);
  double size_;
};

struct SearchResult {
  bool found = false;
  bool timed_out = false;
  Refinement refinement;
  Query refined;
  double distance = 0;
  Rational deviation;
  Ranking ranking;
  std::int64_t evaluated = 0;
};

// Candidate constants for one numeric predicate: every domain value v and
// v +- delta, the original constant, and the bounds one unit outside the
// domain. delta is half the smallest gap among the domain and the constant.
std::vector<Decimal> numeric_candidates(const Relation& joined, const NumPredicate& pred);

// Values a categorical predicate may choose from: the data values plus the
// original constants.
std::vector<std::string> categorical_domain(const Relation& joined, const CatPredicate& pred);

double search_space_size(const Annotation& annotation);

// Distance between the original query and a refinement, given both rankings.
// Outcome kinds use dist.k, or k_star when it is 0.
double refinement_distance(const Query& original, const Query& refined,
                           const Ranking& original_ranking, const Ranking& refined_ranking,
                           const DistanceSpec& dist, int k_star);

// Exhaustive search over the candidate space in lexicographic order, keeping
// the first candidate among equal distances. Throws SearchSpaceTooLarge.
SearchResult exhaustive_search(const Database& db, const Annotation& annotation,
                               const ConstraintSet& cs, const DistanceSpec& dist,
                               const Rational& epsilon, const SearchOptions& options = {});

}  // namespace qref

#endif  // QREF_ORACLE_H_
