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

#ifndef QREF_DISTANCES_H_
#define QREF_DISTANCES_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "qref/numeric.h"
#include "qref/query.h"
#include "qref/ranking.h"

namespace qref {

// kPredKendall is the weighted sum dis_pred + lambda * dis_kendall.
enum class DistanceKind { kPred, kJaccard, kKendall, kPredKendall };

const char* to_string(DistanceKind kind);
DistanceKind parse_distance_kind(const std::string& name);
inline bool is_outcome(DistanceKind kind) { return kind != DistanceKind::kPred; }

struct DistanceSpec {
  DistanceKind kind = DistanceKind::kPred;
  // Prefix length for outcome kinds; 0 means k*.
  int k = 0;
  double lambda = 1.0;
};

class DistanceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sum over numeric predicates of |C - C'| / C plus, per categorical
// predicate, 1 - |R ∩ S| / |R ∪ S|. Throws DistanceError if an original
// numeric constant is not positive or the skeletons differ.
double dis_pred(const Query& q, const Query& q2);
// Exact form; nullopt if an intermediate does not fit 64-bit rationals.
std::optional<Rational> dis_pred_exact(const Query& q, const Query& q2);

// 1 - |A ∩ B| / |A ∪ B| over the two top-k sets.
Rational dis_jaccard(const Ranking& a, const Ranking& b, int k);

// Top-k Kendall distance with zero penalty for pairs absent from one list:
// for departed originals, the retained originals ranked after them plus every
// new tuple; for retained originals, the new tuples ranked before them in b.
// Assumes b keeps a's relative order on shared tuples.
std::int64_t dis_kendall(const Ranking& a, const Ranking& b, int k);

}  // namespace qref

#endif  // QREF_DISTANCES_H_
