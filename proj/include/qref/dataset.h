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

#ifndef QREF_DATASET_H_
#define QREF_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qref/numeric.h"

namespace qref {

using TupleId = std::int64_t;

enum class AttrKind { kCategorical, kNumerical };

const char* to_string(AttrKind kind);

struct Attribute {
  std::string name;
  AttrKind kind = AttrKind::kCategorical;
  friend bool operator==(const Attribute&, const Attribute&) = default;
};

class Schema {
 public:
  Schema() = default;
  // Throws SchemaError on duplicate names.
  explicit Schema(std::vector<Attribute> attributes);

  const std::vector<Attribute>& attributes() const { return attributes_; }
  std::size_t size() const { return attributes_.size(); }
  const Attribute& at(std::size_t i) const { return attributes_.at(i); }
  std::optional<std::size_t> index_of(const std::string& name) const;
  // Like index_of but throws SchemaError naming the attribute.
  std::size_t require(const std::string& name) const;

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::vector<Attribute> attributes_;
};

class SchemaError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Comparing values of different kinds throws TypeError.
class TypeError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Value {
 public:
  Value() : v_(std::string()) {}
  static Value text(std::string s) { return Value(std::move(s)); }
  static Value number(Decimal d) { return Value(d); }

  AttrKind kind() const {
    return std::holds_alternative<Decimal>(v_) ? AttrKind::kNumerical : AttrKind::kCategorical;
  }
  const std::string& as_text() const;
  Decimal as_number() const;
  std::string to_string() const;

  friend bool operator==(const Value& a, const Value& b);
  friend std::strong_ordering operator<=>(const Value& a, const Value& b);

 private:
  explicit Value(std::string s) : v_(std::move(s)) {}
  explicit Value(Decimal d) : v_(d) {}
  std::variant<std::string, Decimal> v_;
};

struct Tuple {
  TupleId id = 0;
  std::vector<Value> values;
  // Ids of the base tuples this row was built from; {id} for base relations.
  std::vector<TupleId> parents;
  friend bool operator==(const Tuple&, const Tuple&) = default;
};

struct Relation {
  std::string name;
  Schema schema;
  std::vector<Tuple> rows;

  const Value& value(const Tuple& t, const std::string& attr) const {
    return t.values[schema.require(attr)];
  }
  // Row lookup by tuple id; throws std::out_of_range if absent.
  const Tuple& row(TupleId id) const;

  friend bool operator==(const Relation&, const Relation&) = default;
};

using Database = std::map<std::string, Relation>;

class LoadError : public std::runtime_error {
 public:
  LoadError(const std::string& what, std::int64_t row, std::string column)
      : std::runtime_error(what), row_(row), column_(std::move(column)) {}
  // 1-based data row (0 for the header), and the offending column if any.
  std::int64_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::int64_t row_;
  std::string column_;
};

class JoinError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Splits one CSV record. Double-quoted fields may contain commas and "".
std::vector<std::string> split_csv_line(const std::string& line);

// Loads a CSV whose header names match `schema` in any order. Columns are
// reordered to schema order, tuple ids assigned 1.. in file order.
Relation load_csv(const std::filesystem::path& path, const Schema& schema,
                  const std::string& name = "");
Relation read_csv(std::istream& in, const Schema& schema, const std::string& name);

// Kind inference: numerical iff every non-empty cell parses as a number and
// at least one cell is non-empty.
Schema infer_schema(const std::filesystem::path& path);
Schema infer_schema(std::istream& in);

// Sidecar schema: JSON list of {"name": ..., "kind": "categorical"|"numerical"}.
Schema load_schema_json(const std::filesystem::path& path);
Schema parse_schema_json(const std::string& text);

void write_csv(const Relation& relation, std::ostream& out);
void write_csv(const Relation& relation, const std::filesystem::path& path);

// Natural join on all shared attribute names. Output schema: left attributes,
// then right attributes not in left. Rows are emitted in left-major order with
// fresh ids 1..n; parents concatenate left and right parents.
Relation natural_join(const Relation& left, const Relation& right);

// Appends a numerical column holding the sum of `columns` (derived score).
Relation with_sum_column(const Relation& relation, const std::string& name,
                         const std::vector<std::string>& columns);

}  // namespace qref

#endif  // QREF_DATASET_H_
