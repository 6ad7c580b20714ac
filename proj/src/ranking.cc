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

#include "qref/ranking.h"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

namespace qref {

Ranking top(const Ranking& ranking, std::size_t k) {
  return Ranking(ranking.begin(), ranking.begin() + std::min(k, ranking.size()));
}

Relation join_tables(const Query& q, const Database& d) {
  if (q.tables.empty()) throw SchemaError("query has no tables");
  auto fetch = [&](const std::string& name) -> const Relation& {
    auto it = d.find(name);
    if (it == d.end()) throw SchemaError("unknown table '" + name + "'");
    return it->second;
  };
  Relation out = fetch(q.tables[0]);
  for (std::size_t i = 1; i < q.tables.size(); ++i) out = natural_join(out, fetch(q.tables[i]));
  return out;
}

Ranking order_rows(const Relation& joined, const OrderBy& order) {
  std::size_t col = joined.schema.require(order.attribute);
  if (joined.schema.at(col).kind != AttrKind::kNumerical) {
    throw TypeError("ORDER BY attribute '" + order.attribute + "' is not numerical");
  }
  std::vector<std::pair<Decimal, TupleId>> keyed;
  keyed.reserve(joined.rows.size());
  for (const auto& t : joined.rows) keyed.emplace_back(t.values[col].as_number(), t.id);
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return order.descending ? a.first > b.first : a.first < b.first;
    return a.second < b.second;
  });
  Ranking out;
  out.reserve(keyed.size());
  for (const auto& [score, id] : keyed) out.push_back(id);
  return out;
}

std::string distinct_key(const Tuple& t, const Schema& schema,
                         const std::vector<std::string>& attrs) {
  std::string key;
  for (const auto& a : attrs) {
    std::string v = t.values[schema.require(a)].to_string();
    key += std::to_string(v.size());
    key += ':';
    key += v;
  }
  return key;
}

Ranking evaluate_joined(const Query& q, const Relation& joined) {
  validate_query(q, joined.schema);
  auto attrs = distinct_attributes(q, joined.schema);
  std::unordered_set<std::string> seen;
  Ranking out;
  for (TupleId id : order_rows(joined, q.order_by)) {
    const Tuple& t = joined.row(id);
    if (!satisfies(t, joined.schema, q)) continue;
    if (q.distinct && !seen.insert(distinct_key(t, joined.schema, attrs)).second) continue;
    out.push_back(id);
  }
  return out;
}

Ranking evaluate(const Query& q, const Database& d) { return evaluate_joined(q, join_tables(q, d)); }

const AnnotatedTuple& Annotation::at(TupleId id) const {
  auto it = position_.find(id);
  if (it == position_.end()) throw std::out_of_range("tuple " + std::to_string(id) + " not annotated");
  return tuples[it->second];
}

namespace {

std::vector<CmpOp> families(CmpOp op) {
  if (op == CmpOp::kEq) return {CmpOp::kGe, CmpOp::kLe};
  return {op};
}

}  // namespace

Annotation annotate(const Query& q, const Database& d) {
  Annotation a;
  a.query = q;
  a.joined = join_tables(q, d);
  const Schema& schema = a.joined.schema;
  validate_query(q, schema);
  a.distinct_attrs = distinct_attributes(q, schema);

  // Atom ids: numeric families first, then categorical predicates; values
  // ascending within each.
  std::map<std::tuple<std::size_t, CmpOp, Decimal>, int> num_atom;
  std::map<std::pair<std::size_t, std::string>, int> cat_atom;
  for (std::size_t p = 0; p < q.numeric_preds.size(); ++p) {
    const auto& pred = q.numeric_preds[p];
    std::size_t col = schema.require(pred.attribute);
    std::set<Decimal> dom;
    for (const auto& t : a.joined.rows) dom.insert(t.values[col].as_number());
    for (CmpOp f : families(pred.op)) {
      ++a.predicate_count;
      for (Decimal v : dom) {
        num_atom[{p, f, v}] = static_cast<int>(a.atoms.size());
        a.atoms.push_back({p, false, pred.attribute, f, "", v});
      }
    }
  }
  for (std::size_t p = 0; p < q.cat_preds.size(); ++p) {
    const auto& pred = q.cat_preds[p];
    std::size_t col = schema.require(pred.attribute);
    std::set<std::string> dom;
    for (const auto& t : a.joined.rows) dom.insert(t.values[col].as_text());
    ++a.predicate_count;
    for (const auto& v : dom) {
      cat_atom[{p, v}] = static_cast<int>(a.atoms.size());
      a.atoms.push_back({p, true, pred.attribute, CmpOp::kEq, v, Decimal()});
    }
  }

  std::map<std::vector<int>, int> class_of;
  std::map<std::string, std::vector<TupleId>> by_key;
  int rank = 0;
  for (TupleId id : order_rows(a.joined, q.order_by)) {
    const Tuple& t = a.joined.row(id);
    AnnotatedTuple at;
    at.id = id;
    at.base_rank = ++rank;
    for (std::size_t p = 0; p < q.numeric_preds.size(); ++p) {
      Decimal v = t.values[schema.require(q.numeric_preds[p].attribute)].as_number();
      for (CmpOp f : families(q.numeric_preds[p].op)) at.lineage.push_back(num_atom.at({p, f, v}));
    }
    for (std::size_t p = 0; p < q.cat_preds.size(); ++p) {
      const std::string& v = t.values[schema.require(q.cat_preds[p].attribute)].as_text();
      at.lineage.push_back(cat_atom.at({p, v}));
    }
    std::sort(at.lineage.begin(), at.lineage.end());
    auto [it, fresh] = class_of.emplace(at.lineage, static_cast<int>(class_of.size()));
    at.lineage_class = it->second;
    if (q.distinct) {
      auto& members = by_key[distinct_key(t, schema, a.distinct_attrs)];
      at.shadow = members;
      members.push_back(id);
    }
    a.position_[id] = a.tuples.size();
    a.tuples.push_back(std::move(at));
  }
  a.class_count = static_cast<int>(class_of.size());
  return a;
}

std::map<int, std::vector<TupleId>> lineage_classes(const std::vector<AnnotatedTuple>& annotated) {
  std::vector<const AnnotatedTuple*> sorted;
  for (const auto& t : annotated) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* x, const auto* y) { return x->base_rank < y->base_rank; });
  std::map<int, std::vector<TupleId>> out;
  for (const auto* t : sorted) out[t->lineage_class].push_back(t->id);
  return out;
}

Ranking evaluate_with_provenance(const Annotation& annotation, const Query& refined) {
  const Query& base = annotation.query;
  if (refined.tables != base.tables || refined.order_by != base.order_by ||
      refined.distinct != base.distinct || refined.select_attrs != base.select_attrs ||
      refined.numeric_preds.size() != base.numeric_preds.size() ||
      refined.cat_preds.size() != base.cat_preds.size()) {
    throw RefinementError("query is not a refinement of the annotated query");
  }
  // Decide each atom once, then test tuples by lineage.
  std::vector<char> truth(annotation.atoms.size());
  for (std::size_t i = 0; i < annotation.atoms.size(); ++i) {
    const Atom& atom = annotation.atoms[i];
    if (atom.categorical) {
      truth[i] = refined.cat_preds[atom.predicate].values.count(atom.text) > 0;
    } else {
      truth[i] = compare(atom.number, atom.family, refined.numeric_preds[atom.predicate].constant);
    }
  }
  std::unordered_set<TupleId> selected;
  Ranking out;
  for (const auto& t : annotation.tuples) {
    bool ok = std::all_of(t.lineage.begin(), t.lineage.end(), [&](int a) { return truth[a]; });
    if (!ok) continue;
    bool shadowed = std::any_of(t.shadow.begin(), t.shadow.end(),
                                [&](TupleId s) { return selected.count(s) > 0; });
    if (shadowed) continue;
    selected.insert(t.id);
    out.push_back(t.id);
  }
  return out;
}

}  // namespace qref
