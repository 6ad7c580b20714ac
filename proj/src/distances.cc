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

#include "qref/distances.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace qref {

const char* to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::kPred: return "pred";
    case DistanceKind::kJaccard: return "jaccard";
    case DistanceKind::kKendall: return "kendall";
    case DistanceKind::kPredKendall: return "pred+kendall";
  }
  return "?";
}

DistanceKind parse_distance_kind(const std::string& name) {
  if (name == "pred") return DistanceKind::kPred;
  if (name == "jaccard") return DistanceKind::kJaccard;
  if (name == "kendall") return DistanceKind::kKendall;
  if (name == "pred+kendall") return DistanceKind::kPredKendall;
  throw DistanceError("unknown distance '" + name + "'");
}

namespace {

void check_skeleton(const Query& q, const Query& q2) {
  if (q.numeric_preds.size() != q2.numeric_preds.size() ||
      q.cat_preds.size() != q2.cat_preds.size()) {
    throw DistanceError("queries have different predicate skeletons");
  }
  for (std::size_t i = 0; i < q.numeric_preds.size(); ++i) {
    const auto& a = q.numeric_preds[i];
    const auto& b = q2.numeric_preds[i];
    if (a.attribute != b.attribute || a.op != b.op) {
      throw DistanceError("queries have different predicate skeletons");
    }
    if (a.constant <= Decimal()) {
      throw DistanceError("predicate distance is undefined for the non-positive constant " +
                          a.attribute + " " + to_string(a.op) + " " + a.constant.to_string());
    }
  }
  for (std::size_t i = 0; i < q.cat_preds.size(); ++i) {
    if (q.cat_preds[i].attribute != q2.cat_preds[i].attribute) {
      throw DistanceError("queries have different predicate skeletons");
    }
  }
}

std::pair<std::int64_t, std::int64_t> overlap(const std::set<std::string>& r,
                                              const std::set<std::string>& s) {
  std::int64_t common = 0;
  for (const auto& v : r) common += s.count(v);
  return {common, static_cast<std::int64_t>(r.size() + s.size()) - common};
}

void check_length(const Ranking& r, int k) {
  if (k < 1) throw DistanceError("distance prefix k must be >= 1");
  if (static_cast<int>(r.size()) < k) {
    throw DistanceError("ranking has " + std::to_string(r.size()) + " tuples, fewer than k = " +
                        std::to_string(k));
  }
}

}  // namespace

std::optional<Rational> dis_pred_exact(const Query& q, const Query& q2) {
  check_skeleton(q, q2);
  try {
    Rational sum;
    for (std::size_t i = 0; i < q.numeric_preds.size(); ++i) {
      Decimal c = q.numeric_preds[i].constant;
      Decimal diff = (q2.numeric_preds[i].constant - c).abs();
      sum += Rational::from_decimal(diff) / Rational::from_decimal(c);
    }
    for (std::size_t i = 0; i < q.cat_preds.size(); ++i) {
      auto [common, uni] = overlap(q.cat_preds[i].values, q2.cat_preds[i].values);
      if (uni == 0) throw DistanceError("empty categorical value sets");
      sum += Rational(1) - Rational(common, uni);
    }
    return sum;
  } catch (const std::overflow_error&) {
    return std::nullopt;
  }
}

double dis_pred(const Query& q, const Query& q2) {
  if (auto exact = dis_pred_exact(q, q2)) return exact->to_double();
  double sum = 0;
  for (std::size_t i = 0; i < q.numeric_preds.size(); ++i) {
    double c = q.numeric_preds[i].constant.to_double();
    sum += std::abs(q2.numeric_preds[i].constant.to_double() - c) / c;
  }
  for (std::size_t i = 0; i < q.cat_preds.size(); ++i) {
    auto [common, uni] = overlap(q.cat_preds[i].values, q2.cat_preds[i].values);
    sum += 1.0 - static_cast<double>(common) / static_cast<double>(uni);
  }
  return sum;
}

Rational dis_jaccard(const Ranking& a, const Ranking& b, int k) {
  check_length(a, k);
  check_length(b, k);
  std::unordered_set<TupleId> sa(a.begin(), a.begin() + k);
  std::int64_t common = 0;
  for (int i = 0; i < k; ++i) common += sa.count(b[i]);
  return Rational(1) - Rational(common, 2 * k - common);
}

std::int64_t dis_kendall(const Ranking& a, const Ranking& b, int k) {
  check_length(a, k);
  check_length(b, k);
  std::unordered_set<TupleId> in_a(a.begin(), a.begin() + k);
  std::unordered_set<TupleId> in_b(b.begin(), b.begin() + k);
  std::int64_t fresh = 0;
  for (int i = 0; i < k; ++i) fresh += in_a.count(b[i]) ? 0 : 1;

  std::int64_t total = 0;
  // Departed originals: retained originals after them, plus all new tuples.
  std::int64_t retained_after = 0;
  for (int i = k - 1; i >= 0; --i) {
    if (in_b.count(a[i])) {
      ++retained_after;
    } else {
      total += retained_after + fresh;
    }
  }
  // Retained originals: new tuples placed ahead of them.
  std::int64_t fresh_before = 0;
  for (int i = 0; i < k; ++i) {
    if (in_a.count(b[i])) {
      total += fresh_before;
    } else {
      ++fresh_before;
    }
  }
  // Retained pairs in opposite orders (none when scores fix the order).
  std::unordered_map<TupleId, int> pos_b;
  for (int i = 0; i < k; ++i) pos_b[b[i]] = i;
  for (int i = 0; i < k; ++i) {
    auto pi = pos_b.find(a[i]);
    if (pi == pos_b.end()) continue;
    for (int j = i + 1; j < k; ++j) {
      auto pj = pos_b.find(a[j]);
      if (pj != pos_b.end() && pj->second < pi->second) ++total;
    }
  }
  return total;
}

}  // namespace qref
