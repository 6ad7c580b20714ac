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

#include "qref/constraints.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace qref {

const char* to_string(Sense sense) { return sense == Sense::kLower ? "lower" : "upper"; }

bool CardinalityConstraint::contains(const Tuple& t, const Schema& schema) const {
  for (const auto& [attr, value] : group) {
    if (t.values[schema.require(attr)].as_text() != value) return false;
  }
  return true;
}

std::string CardinalityConstraint::label() const {
  std::string g;
  for (const auto& [attr, value] : group) {
    if (!g.empty()) g += " AND ";
    g += attr + "=" + value;
  }
  return std::string(to_string(sense)) + "(" + g + ", k=" + std::to_string(k) +
         ") = " + std::to_string(n);
}

int ConstraintSet::k_star() const {
  int k = 0;
  for (const auto& c : constraints) k = std::max(k, c.k);
  return k;
}

void validate(const ConstraintSet& cs) {
  if (cs.constraints.empty()) throw ConstraintError("constraint set is empty");
  for (const auto& c : cs.constraints) {
    if (c.group.empty()) throw ConstraintError("constraint with an empty group");
    if (c.k < 1) throw ConstraintError("constraint k must be >= 1 in " + c.label());
    if (c.n < 1) throw ConstraintError("constraint n must be >= 1 in " + c.label());
    if (c.n > c.k) throw ConstraintError("constraint n exceeds k in " + c.label());
  }
}

void validate(const ConstraintSet& cs, const Schema& schema) {
  validate(cs);
  for (const auto& c : cs.constraints) {
    for (const auto& [attr, value] : c.group) {
      auto i = schema.index_of(attr);
      if (!i) throw ConstraintError("group attribute '" + attr + "' not in the joined schema");
      if (schema.at(*i).kind != AttrKind::kCategorical) {
        throw ConstraintError("group attribute '" + attr + "' is not categorical");
      }
    }
  }
}

ConstraintSet parse_constraints(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConstraintError(std::string("malformed constraint JSON: ") + e.what());
  }
  if (!j.is_array()) throw ConstraintError("constraint file must be a JSON array");
  ConstraintSet cs;
  for (const auto& e : j) {
    if (!e.is_object()) throw ConstraintError("constraint entries must be objects");
    for (const char* key : {"group", "k", "n", "sense"}) {
      if (!e.contains(key)) throw ConstraintError(std::string("constraint missing '") + key + "'");
    }
    CardinalityConstraint c;
    if (!e["group"].is_object()) throw ConstraintError("constraint group must be an object");
    for (const auto& [attr, value] : e["group"].items()) {
      if (!value.is_string()) throw ConstraintError("group value for '" + attr + "' must be text");
      c.group[attr] = value.get<std::string>();
    }
    if (!e["k"].is_number_integer() || !e["n"].is_number_integer()) {
      throw ConstraintError("constraint k and n must be integers");
    }
    c.k = e["k"].get<int>();
    c.n = e["n"].get<int>();
    std::string sense = e["sense"].is_string() ? e["sense"].get<std::string>() : "";
    if (sense == "lower") c.sense = Sense::kLower;
    else if (sense == "upper") c.sense = Sense::kUpper;
    else throw ConstraintError("unknown constraint sense '" + sense + "'");
    cs.constraints.push_back(std::move(c));
  }
  validate(cs);
  return cs;
}

ConstraintSet load_constraints(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConstraintError("cannot open constraint file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_constraints(ss.str());
}

std::string constraints_to_json(const ConstraintSet& cs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : cs.constraints) {
    j.push_back({{"group", c.group}, {"k", c.k}, {"n", c.n}, {"sense", to_string(c.sense)}});
  }
  return j.dump(2);
}

std::vector<int> group_counts(const Ranking& ranking, const Relation& joined,
                              const ConstraintSet& cs) {
  int k_star = cs.k_star();
  if (static_cast<int>(ranking.size()) < k_star) {
    throw PreconditionError("ranking has " + std::to_string(ranking.size()) +
                            " tuples, fewer than k* = " + std::to_string(k_star));
  }
  std::vector<int> counts;
  for (const auto& c : cs.constraints) {
    int count = 0;
    for (int i = 0; i < c.k; ++i) {
      if (c.contains(joined.row(ranking[i]), joined.schema)) ++count;
    }
    counts.push_back(count);
  }
  return counts;
}

Rational deviation_from_counts(const std::vector<int>& counts, const ConstraintSet& cs) {
  Rational sum;
  for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
    const auto& c = cs.constraints[i];
    int gap = c.sign() * (c.n - counts.at(i));
    if (gap > 0) sum += Rational(gap, c.n);
  }
  return sum / Rational(static_cast<std::int64_t>(cs.constraints.size()));
}

Rational deviation(const Ranking& ranking, const Relation& joined, const ConstraintSet& cs) {
  return deviation_from_counts(group_counts(ranking, joined, cs), cs);
}

}  // namespace qref
