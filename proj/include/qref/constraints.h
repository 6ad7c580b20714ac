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

#ifndef QREF_CONSTRAINTS_H_
#define QREF_CONSTRAINTS_H_

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qref/dataset.h"
#include "qref/numeric.h"
#include "qref/ranking.h"

namespace qref {

enum class Sense { kLower, kUpper };

const char* to_string(Sense sense);

struct CardinalityConstraint {
  // Conjunction of attribute = value.
  std::map<std::string, std::string> group;
  int k = 1;
  int n = 1;
  Sense sense = Sense::kLower;

  int sign() const { return sense == Sense::kLower ? 1 : -1; }
  bool contains(const Tuple& t, const Schema& schema) const;
  // "lower(Gender=F, k=6) = 3"
  std::string label() const;
  friend bool operator==(const CardinalityConstraint&, const CardinalityConstraint&) = default;
};

struct ConstraintSet {
  std::vector<CardinalityConstraint> constraints;
  int k_star() const;
  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

class ConstraintError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a ranking is shorter than the k it is measured at.
class PreconditionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Checks n in [1, k], non-empty groups, and a non-empty set.
void validate(const ConstraintSet& cs);
// Group attributes must exist and be categorical.
void validate(const ConstraintSet& cs, const Schema& schema);

ConstraintSet parse_constraints(const std::string& json_text);
ConstraintSet load_constraints(const std::filesystem::path& path);
std::string constraints_to_json(const ConstraintSet& cs);

// |top-k ∩ G| per constraint. Throws PreconditionError if |ranking| < k*.
std::vector<int> group_counts(const Ranking& ranking, const Relation& joined,
                              const ConstraintSet& cs);

// Mean relative shortfall (lower) or excess (upper) over the constraints.
Rational deviation_from_counts(const std::vector<int>& counts, const ConstraintSet& cs);
Rational deviation(const Ranking& ranking, const Relation& joined, const ConstraintSet& cs);

}  // namespace qref

#endif  // QREF_CONSTRAINTS_H_
