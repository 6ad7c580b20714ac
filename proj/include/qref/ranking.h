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

#ifndef QREF_RANKING_H_
#define QREF_RANKING_H_

#include <map>
#include <string>
#include <vector>

#include "qref/dataset.h"
#include "qref/query.h"

namespace qref {

// Tuple ids of the joined relation, best first.
using Ranking = std::vector<TupleId>;

// First min(k, size) entries.
Ranking top(const Ranking& ranking, std::size_t k);

// Joins q.tables left to right. Throws SchemaError for unknown tables.
Relation join_tables(const Query& q, const Database& d);

// All row ids of `joined` ordered by the ORDER BY attribute, equal scores
// broken by ascending tuple id.
Ranking order_rows(const Relation& joined, const OrderBy& order);

// Direct evaluation: join, filter, order, DISTINCT dedup keeping the
// best-ranked occurrence.
Ranking evaluate(const Query& q, const Database& d);
// Same as evaluate, over an already joined relation.
Ranking evaluate_joined(const Query& q, const Relation& joined);

// One indicator variable of the lineage universe: A_v for a categorical
// predicate, A_{v,op} for one numeric predicate family. An '=' numeric
// predicate owns two families (>= and <=) sharing a constant.
struct Atom {
  std::size_t predicate = 0;  // index into numeric_preds or cat_preds
  bool categorical = false;
  std::string attribute;
  CmpOp family = CmpOp::kGe;  // numeric only; never kEq
  std::string text;           // categorical value
  Decimal number;             // numeric value
};

struct AnnotatedTuple {
  TupleId id = 0;
  int base_rank = 0;  // 1-based position in the unrestricted ranking
  std::vector<int> lineage;      // sorted atom ids
  std::vector<TupleId> shadow;   // better-ranked tuples with equal DISTINCT key
  int lineage_class = 0;
};

struct Annotation {
  Query query;
  Relation joined;
  std::vector<Atom> atoms;
  // Ordered by base_rank.
  std::vector<AnnotatedTuple> tuples;
  // Lineage size of every tuple: one atom per categorical predicate and per
  // numeric family.
  int predicate_count = 0;
  std::vector<std::string> distinct_attrs;
  int class_count = 0;

  const AnnotatedTuple& at(TupleId id) const;
  const Tuple& row(TupleId id) const { return joined.row(id); }

 private:
  friend Annotation annotate(const Query& q, const Database& d);
  std::map<TupleId, std::size_t> position_;
};

Annotation annotate(const Query& q, const Database& d);

// Lineage class id -> member ids in base_rank order.
std::map<int, std::vector<TupleId>> lineage_classes(const std::vector<AnnotatedTuple>& annotated);

// Evaluates a refinement of annotation.query by filtering the annotated
// tuples (no re-join). Must agree with evaluate() tuple for tuple.
Ranking evaluate_with_provenance(const Annotation& annotation, const Query& refined);

// DISTINCT key of a joined row ("" when the query is not DISTINCT).
std::string distinct_key(const Tuple& t, const Schema& schema,
                         const std::vector<std::string>& attrs);

}  // namespace qref

#endif  // QREF_RANKING_H_
