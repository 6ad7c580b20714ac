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

#ifndef QREF_QUERY_H_
#define QREF_QUERY_H_

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qref/dataset.h"
#include "qref/numeric.h"

namespace qref {

enum class CmpOp { kLt, kLe, kEq, kGt, kGe };

const char* to_string(CmpOp op);
// True for > and >= (the predicate bounds the attribute from below).
inline bool is_lower_bound(CmpOp op) { return op == CmpOp::kGt || op == CmpOp::kGe; }
inline bool is_strict(CmpOp op) { return op == CmpOp::kGt || op == CmpOp::kLt; }
bool compare(Decimal value, CmpOp op, Decimal constant);

struct NumPredicate {
  std::string attribute;
  CmpOp op = CmpOp::kGe;
  Decimal constant;
  friend bool operator==(const NumPredicate&, const NumPredicate&) = default;
};

struct CatPredicate {
  std::string attribute;
  std::set<std::string> values;
  friend bool operator==(const CatPredicate&, const CatPredicate&) = default;
};

struct OrderBy {
  std::string attribute;
  bool descending = true;
  friend bool operator==(const OrderBy&, const OrderBy&) = default;
};

struct Query {
  std::vector<std::string> tables;
  // Empty means SELECT *.
  std::vector<std::string> select_attrs;
  bool distinct = false;
  std::vector<NumPredicate> numeric_preds;
  std::vector<CatPredicate> cat_preds;
  OrderBy order_by;

  friend bool operator==(const Query&, const Query&) = default;
};

// Key of a numeric predicate inside a query: (attribute, operator).
using NumKey = std::pair<std::string, CmpOp>;

struct Refinement {
  std::map<NumKey, Decimal> numeric_constants;
  std::map<std::string, std::set<std::string>> cat_values;
  bool empty() const { return numeric_constants.empty() && cat_values.empty(); }
  friend bool operator==(const Refinement&, const Refinement&) = default;
};

class QuerySyntaxError : public std::runtime_error {
 public:
  QuerySyntaxError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// The query uses a construct outside conjunctive SPJ + ORDER BY: unions,
// nested queries, disjunction across attributes, LIMIT and so on.
class UnsupportedQueryError : public std::runtime_error {
 public:
  explicit UnsupportedQueryError(const std::string& construct)
      : std::runtime_error("unsupported construct: " + construct +
                           " (only conjunctive select-project-join queries with a single "
                           "ORDER BY attribute can be refined)") {}
};

class RefinementError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

Query parse_query(const std::string& text);
std::string render_sql(const Query& q);

Query apply_refinement(const Query& q, const Refinement& r);

// Checks attribute existence and kinds against the (joined) schema.
void validate_query(const Query& q, const Schema& schema);

bool satisfies(const Tuple& t, const Schema& schema, const Query& q);

// Attributes DISTINCT deduplicates on: the select list, or every attribute
// for SELECT DISTINCT *. Empty when the query is not DISTINCT.
std::vector<std::string> distinct_attributes(const Query& q, const Schema& schema);

}  // namespace qref

#endif  // QREF_QUERY_H_
