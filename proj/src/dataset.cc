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

#include "qref/dataset.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace qref {

const char* to_string(AttrKind kind) {
  return kind == AttrKind::kNumerical ? "numerical" : "categorical";
}

Schema::Schema(std::vector<Attribute> attributes) : attributes_(std::move(attributes)) {
  std::set<std::string> seen;
  for (const auto& a : attributes_) {
    if (!seen.insert(a.name).second) throw SchemaError("duplicate attribute name '" + a.name + "'");
  }
}

std::optional<std::size_t> Schema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::require(const std::string& name) const {
  auto i = index_of(name);
  if (!i) throw SchemaError("unknown attribute '" + name + "'");
  return *i;
}

const std::string& Value::as_text() const {
  if (auto* s = std::get_if<std::string>(&v_)) return *s;
  throw TypeError("expected a categorical value, got number " + to_string());
}

Decimal Value::as_number() const {
  if (auto* d = std::get_if<Decimal>(&v_)) return *d;
  throw TypeError("expected a numerical value, got text '" + std::get<std::string>(v_) + "'");
}

std::string Value::to_string() const {
  if (auto* d = std::get_if<Decimal>(&v_)) return d->to_string();
  return std::get<std::string>(v_);
}

bool operator==(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) throw TypeError("comparing categorical and numerical values");
  return a.v_ == b.v_;
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) throw TypeError("comparing categorical and numerical values");
  if (a.kind() == AttrKind::kNumerical) return a.as_number() <=> b.as_number();
  return a.as_text() <=> b.as_text();
}

const Tuple& Relation::row(TupleId id) const {
  // Ids are usually 1..n in order.
  if (id >= 1 && static_cast<std::size_t>(id) <= rows.size() && rows[id - 1].id == id) {
    return rows[id - 1];
  }
  for (const auto& t : rows) {
    if (t.id == id) return t;
  }
  throw std::out_of_range("no tuple with id " + std::to_string(id) + " in " + name);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

namespace {

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string(), 0, "");
  return in;
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

Relation read_csv(std::istream& in, const Schema& schema, const std::string& name) {
  std::string line;
  if (!next_line(in, line)) throw LoadError("missing header row", 0, "");
  auto header = split_csv_line(line);
  std::set<std::string> header_names;
  for (const auto& h : header) {
    if (!header_names.insert(h).second) throw LoadError("duplicate header '" + h + "'", 0, h);
  }
  // Position of each schema attribute in the file.
  std::vector<std::size_t> source(schema.size());
  for (std::size_t a = 0; a < schema.size(); ++a) {
    auto it = std::find(header.begin(), header.end(), schema.at(a).name);
    if (it == header.end()) {
      throw LoadError("missing column '" + schema.at(a).name + "'", 0, schema.at(a).name);
    }
    source[a] = static_cast<std::size_t>(it - header.begin());
  }
  if (header.size() != schema.size()) {
    for (const auto& h : header) {
      if (!schema.index_of(h)) throw LoadError("column '" + h + "' not in schema", 0, h);
    }
  }

  Relation rel;
  rel.name = name;
  rel.schema = schema;
  std::int64_t row_no = 0;
  while (next_line(in, line)) {
    if (line.empty()) continue;
    ++row_no;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw LoadError("row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                          " cells, expected " + std::to_string(header.size()),
                      row_no, "");
    }
    Tuple t;
    t.id = row_no;
    t.parents = {row_no};
    t.values.reserve(schema.size());
    for (std::size_t a = 0; a < schema.size(); ++a) {
      const std::string& cell = cells[source[a]];
      if (schema.at(a).kind == AttrKind::kNumerical) {
        auto d = Decimal::try_parse(cell);
        if (!d) {
          throw LoadError("row " + std::to_string(row_no) + ", column '" + schema.at(a).name +
                              "': cannot parse '" + cell + "' as a number",
                          row_no, schema.at(a).name);
        }
        t.values.push_back(Value::number(*d));
      } else {
        t.values.push_back(Value::text(cell));
      }
    }
    rel.rows.push_back(std::move(t));
  }
  return rel;
}

Relation load_csv(const std::filesystem::path& path, const Schema& schema, const std::string& name) {
  auto in = open_or_throw(path);
  return read_csv(in, schema, name.empty() ? path.stem().string() : name);
}

Schema infer_schema(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) throw LoadError("missing header row", 0, "");
  auto header = split_csv_line(line);
  std::vector<bool> numeric(header.size(), true);
  std::vector<bool> any(header.size(), false);
  while (next_line(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) {
      if (cells[i].empty()) continue;
      any[i] = true;
      if (numeric[i] && !Decimal::try_parse(cells[i])) numeric[i] = false;
    }
  }
  std::vector<Attribute> attrs;
  for (std::size_t i = 0; i < header.size(); ++i) {
    attrs.push_back({header[i], numeric[i] && any[i] ? AttrKind::kNumerical : AttrKind::kCategorical});
  }
  return Schema(std::move(attrs));
}

Schema infer_schema(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return infer_schema(in);
}

Schema parse_schema_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  if (!j.is_array()) throw SchemaError("schema file must be a JSON array");
  std::vector<Attribute> attrs;
  for (const auto& e : j) {
    std::string kind = e.at("kind").get<std::string>();
    AttrKind k;
    if (kind == "categorical") k = AttrKind::kCategorical;
    else if (kind == "numerical") k = AttrKind::kNumerical;
    else throw SchemaError("unknown attribute kind '" + kind + "'");
    attrs.push_back({e.at("name").get<std::string>(), k});
  }
  return Schema(std::move(attrs));
}

Schema load_schema_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_schema_json(ss.str());
}

void write_csv(const Relation& relation, std::ostream& out) {
  const auto& attrs = relation.schema.attributes();
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (i) out << ',';
    out << quote_csv(attrs[i].name);
  }
  out << '\n';
  for (const auto& t : relation.rows) {
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      if (i) out << ',';
      out << quote_csv(t.values[i].to_string());
    }
    out << '\n';
  }
}

void write_csv(const Relation& relation, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(relation, out);
}

Relation natural_join(const Relation& left, const Relation& right) {
  std::vector<std::pair<std::size_t, std::size_t>> shared;
  std::vector<std::size_t> right_only;
  for (std::size_t r = 0; r < right.schema.size(); ++r) {
    const auto& attr = right.schema.at(r);
    if (auto l = left.schema.index_of(attr.name)) {
      if (left.schema.at(*l).kind != attr.kind) {
        throw JoinError("attribute '" + attr.name + "' has different kinds in " + left.name +
                        " and " + right.name);
      }
      shared.emplace_back(*l, r);
    } else {
      right_only.push_back(r);
    }
  }
  if (shared.empty()) {
    throw JoinError("no shared attributes between " + left.name + " and " + right.name);
  }

  std::vector<Attribute> attrs = left.schema.attributes();
  for (auto r : right_only) attrs.push_back(right.schema.at(r));

  Relation out;
  out.name = left.name + "_" + right.name;
  out.schema = Schema(std::move(attrs));

  auto key_of = [&](const Tuple& t, bool is_left) {
    std::string key;
    for (const auto& [l, r] : shared) {
      const Value& v = t.values[is_left ? l : r];
      std::string s = v.to_string();
      key += std::to_string(s.size());
      key += ':';
      key += s;
    }
    return key;
  };
  std::unordered_map<std::string, std::vector<std::size_t>> index;
  for (std::size_t i = 0; i < right.rows.size(); ++i) {
    index[key_of(right.rows[i], false)].push_back(i);
  }

  TupleId next_id = 1;
  for (const auto& lt : left.rows) {
    auto it = index.find(key_of(lt, true));
    if (it == index.end()) continue;
    for (auto ri : it->second) {
      const Tuple& rt = right.rows[ri];
      Tuple t;
      t.id = next_id++;
      t.values = lt.values;
      for (auto r : right_only) t.values.push_back(rt.values[r]);
      t.parents = lt.parents;
      t.parents.insert(t.parents.end(), rt.parents.begin(), rt.parents.end());
      out.rows.push_back(std::move(t));
    }
  }
  return out;
}

Relation with_sum_column(const Relation& relation, const std::string& name,
                         const std::vector<std::string>& columns) {
  std::vector<std::size_t> idx;
  for (const auto& c : columns) {
    auto i = relation.schema.require(c);
    if (relation.schema.at(i).kind != AttrKind::kNumerical) {
      throw SchemaError("derived column '" + name + "' sums non-numerical '" + c + "'");
    }
    idx.push_back(i);
  }
  auto attrs = relation.schema.attributes();
  attrs.push_back({name, AttrKind::kNumerical});
  Relation out{relation.name, Schema(std::move(attrs)), relation.rows};
  for (auto& t : out.rows) {
    Decimal sum;
    for (auto i : idx) sum += t.values[i].as_number();
    t.values.push_back(Value::number(sum));
  }
  return out;
}

}  // namespace qref
