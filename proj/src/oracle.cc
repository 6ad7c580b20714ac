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

#include "qref/oracle.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

namespace qref {

std::string SearchSpaceTooLarge::format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::vector<Decimal> numeric_candidates(const Relation& joined, const NumPredicate& pred) {
  std::size_t col = joined.schema.require(pred.attribute);
  std::set<Decimal> dom;
  for (const auto& row : joined.rows) dom.insert(row.values[col].as_number());
  std::set<Decimal> points = dom;
  points.insert(pred.constant);
  Decimal delta = Decimal::parse("0.5");
  if (points.size() > 1) {
    Decimal gap = *points.rbegin() - *points.begin();
    for (auto it = points.begin(); std::next(it) != points.end(); ++it) {
      gap = std::min(gap, *std::next(it) - *it);
    }
    delta = gap.div_int(2);
  }
  if (delta.is_zero()) delta = Decimal::from_units(1);
  std::set<Decimal> out = points;
  for (Decimal v : dom) {
    out.insert(v - delta);
    out.insert(v + delta);
  }
  out.insert(*points.begin() - Decimal::from_int(1));
  out.insert(*points.rbegin() + Decimal::from_int(1));
  return {out.begin(), out.end()};
}

std::vector<std::string> categorical_domain(const Relation& joined, const CatPredicate& pred) {
  std::size_t col = joined.schema.require(pred.attribute);
  std::set<std::string> dom(pred.values.begin(), pred.values.end());
  for (const auto& row : joined.rows) dom.insert(row.values[col].as_text());
  return {dom.begin(), dom.end()};
}

double search_space_size(const Annotation& a) {
  double size = 1;
  for (const auto& p : a.query.numeric_preds) {
    size *= static_cast<double>(numeric_candidates(a.joined, p).size());
  }
  for (const auto& p : a.query.cat_preds) {
    size *= std::pow(2.0, static_cast<double>(categorical_domain(a.joined, p).size())) - 1;
  }
  return size;
}

double refinement_distance(const Query& original, const Query& refined,
                           const Ranking& original_ranking, const Ranking& refined_ranking,
                           const DistanceSpec& dist, int k_star) {
  int k = dist.k > 0 ? dist.k : k_star;
  switch (dist.kind) {
    case DistanceKind::kPred:
      return dis_pred(original, refined);
    case DistanceKind::kJaccard:
      return dis_jaccard(original_ranking, refined_ranking, k).to_double();
    case DistanceKind::kKendall:
      return static_cast<double>(dis_kendall(original_ranking, refined_ranking, k));
    case DistanceKind::kPredKendall:
      return dis_pred(original, refined) +
             dist.lambda * static_cast<double>(dis_kendall(original_ranking, refined_ranking, k));
  }
  return 0;
}

SearchResult exhaustive_search(const Database& db, const Annotation& a, const ConstraintSet& cs,
                               const DistanceSpec& dist, const Rational& epsilon,
                               const SearchOptions& options) {
  using Clock = std::chrono::steady_clock;
  auto start = Clock::now();
  validate(cs);
  validate(cs, a.joined.schema);
  const Query& q = a.query;
  const int k_star = cs.k_star();
  double size = search_space_size(a);
  if (size > static_cast<double>(options.max_candidates)) {
    throw SearchSpaceTooLarge(size, options.max_candidates);
  }

  Ranking original = evaluate_with_provenance(a, q);
  if (is_outcome(dist.kind)) {
    int k = dist.k > 0 ? dist.k : k_star;
    if (static_cast<int>(original.size()) < k) {
      throw PreconditionError("the original query returns " + std::to_string(original.size()) +
                              " tuples, fewer than k = " + std::to_string(k));
    }
  }

  std::vector<std::vector<Decimal>> num_choices;
  for (const auto& p : q.numeric_preds) num_choices.push_back(numeric_candidates(a.joined, p));
  std::vector<std::vector<std::string>> cat_doms;
  for (const auto& p : q.cat_preds) cat_doms.push_back(categorical_domain(a.joined, p));

  // Odometer over numeric choice indices, then categorical subset masks.
  std::vector<std::size_t> num_idx(num_choices.size(), 0);
  std::vector<std::uint64_t> masks(cat_doms.size(), 1);
  SearchResult best;
  while (true) {
    if (options.timeout_s > 0 && (best.evaluated & 255) == 0 &&
        std::chrono::duration<double>(Clock::now() - start).count() > options.timeout_s) {
      best.timed_out = true;
      return best;
    }
    Refinement r;
    for (std::size_t i = 0; i < num_choices.size(); ++i) {
      r.numeric_constants[{q.numeric_preds[i].attribute, q.numeric_preds[i].op}] =
          num_choices[i][num_idx[i]];
    }
    for (std::size_t i = 0; i < cat_doms.size(); ++i) {
      std::set<std::string> values;
      for (std::size_t b = 0; b < cat_doms[i].size(); ++b) {
        if ((masks[i] >> b) & 1) values.insert(cat_doms[i][b]);
      }
      r.cat_values[q.cat_preds[i].attribute] = std::move(values);
    }
    Query refined = apply_refinement(q, r);
    ++best.evaluated;
    Ranking ranking = options.mode == SearchMode::kNaive ? evaluate(refined, db)
                                                         : evaluate_with_provenance(a, refined);
    if (static_cast<int>(ranking.size()) >= k_star) {
      Rational dev = deviation(ranking, a.joined, cs);
      if (dev <= epsilon) {
        double d = refinement_distance(q, refined, original, ranking, dist, k_star);
        if (!best.found || d < best.distance - 1e-12) {
          best.found = true;
          best.refinement = r;
          best.refined = refined;
          best.distance = d;
          best.deviation = dev;
          best.ranking = ranking;
        }
      }
    }

    // Advance: the last categorical predicate varies fastest.
    bool carried = true;
    for (std::size_t i = cat_doms.size(); i-- > 0 && carried;) {
      std::uint64_t limit = (std::uint64_t{1} << cat_doms[i].size()) - 1;
      if (masks[i] < limit) {
        ++masks[i];
        carried = false;
      } else {
        masks[i] = 1;
      }
    }
    for (std::size_t i = num_choices.size(); i-- > 0 && carried;) {
      if (num_idx[i] + 1 < num_choices[i].size()) {
        ++num_idx[i];
        carried = false;
      } else {
        num_idx[i] = 0;
      }
    }
    if (carried) break;
  }
  return best;
}

}  // namespace qref
