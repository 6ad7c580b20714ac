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

#include "qref/query.h"

#include <algorithm>
#include <cctype>
#include <optional>

namespace qref {

const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::kLt: return "<";
    case CmpOp::kLe: return "<=";
    case CmpOp::kEq: return "=";
    case CmpOp::kGt: return ">";
    case CmpOp::kGe: return ">=";
  }
  return "?";
}

bool compare(Decimal value, CmpOp op, Decimal constant) {
  switch (op) {
    case CmpOp::kLt: return value < constant;
    case CmpOp::kLe: return value <= constant;
    case CmpOp::kEq: return value == constant;
    case CmpOp::kGt: return value > constant;
    case CmpOp::kGe: return value >= constant;
  }
  return false;
}

namespace {

enum class Tok { kIdent, kQuotedIdent, kString, kNumber, kSymbol, kEnd };

struct Token {
  Tok type;
  std::string text;
  std::size_t pos;
};

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

const std::set<std::string>& reserved() {
  static const std::set<std::string> kReserved = {
      "SELECT", "DISTINCT", "FROM", "NATURAL", "JOIN", "WHERE", "AND", "OR",
      "ORDER",  "BY",       "ASC",  "DESC",    "UNION", "LIMIT", "NOT", "IN",
      "GROUP",  "HAVING",   "INTERSECT", "EXCEPT", "ON", "USING", "INNER", "LEFT",
      "RIGHT", "OUTER", "FULL", "CROSS", "AS", "EXISTS", "BETWEEN", "LIKE", "IS"};
  return kReserved;
}

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(c) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Tok::kIdent, s.substr(start, i - start), start});
    } else if (std::isdigit(c) || (c == '.' && i + 1 < s.size() &&
                                   std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
          i = j;
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        }
      }
      out.push_back({Tok::kNumber, s.substr(start, i - start), start});
    } else if (c == '\'' || c == '"') {
      char quote = static_cast<char>(c);
      std::string text;
      ++i;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == quote) {
          if (i + 1 < s.size() && s[i + 1] == quote) {
            text.push_back(quote);
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        text.push_back(s[i++]);
      }
      if (!closed) throw QuerySyntaxError("unterminated quoted text", start);
      out.push_back({quote == '\'' ? Tok::kString : Tok::kQuotedIdent, text, start});
    } else {
      std::string sym(1, static_cast<char>(c));
      if (i + 1 < s.size()) {
        std::string two = s.substr(i, 2);
        if (two == "<=" || two == ">=" || two == "<>" || two == "!=") sym = two;
      }
      static const std::string kSingles = "(),*=<>;-+/.!";
      if (sym.size() == 1 && kSingles.find(sym[0]) == std::string::npos) {
        throw QuerySyntaxError("unexpected character '" + sym + "'", start);
      }
      i += sym.size();
      out.push_back({Tok::kSymbol, sym, start});
    }
  }
  out.push_back({Tok::kEnd, "", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(tokenize(text)) {
    for (const auto& t : toks_) {
      if (t.type != Tok::kIdent) continue;
      auto u = upper(t.text);
      if (u == "UNION" || u == "INTERSECT" || u == "EXCEPT") throw UnsupportedQueryError(u);
    }
  }

  Query parse() {
    Query q;
    expect_keyword("SELECT");
    if (accept_keyword("DISTINCT")) q.distinct = true;
    if (accept_symbol("*")) {
      // SELECT *
    } else {
      q.select_attrs.push_back(identifier("column name"));
      while (accept_symbol(",")) q.select_attrs.push_back(identifier("column name"));
    }
    expect_keyword("FROM");
    if (peek_symbol("(")) throw UnsupportedQueryError("nested query in FROM");
    q.tables.push_back(identifier("table name"));
    for (;;) {
      if (accept_keyword("NATURAL")) {
        expect_keyword("JOIN");
        if (peek_symbol("(")) throw UnsupportedQueryError("nested query in FROM");
        q.tables.push_back(identifier("table name"));
      } else if (peek_symbol(",") || peek_keyword("JOIN") || peek_keyword("INNER") ||
                 peek_keyword("LEFT") || peek_keyword("RIGHT") || peek_keyword("CROSS") ||
                 peek_keyword("FULL")) {
        throw UnsupportedQueryError("join other than NATURAL JOIN");
      } else {
        break;
      }
    }
    if (accept_keyword("WHERE")) {
      predicate(q);
      while (accept_keyword("AND")) predicate(q);
      if (peek_keyword("OR")) throw UnsupportedQueryError("disjunction across predicates");
    }
    if (peek_keyword("GROUP") || peek_keyword("HAVING")) throw UnsupportedQueryError("aggregation");
    if (peek_keyword("LIMIT")) throw UnsupportedQueryError("LIMIT (k belongs to the constraints)");
    expect_keyword("ORDER");
    expect_keyword("BY");
    q.order_by.attribute = identifier("ORDER BY attribute");
    if (peek_symbol("+") || peek_symbol("-") || peek_symbol("*") || peek_symbol("/")) {
      throw UnsupportedQueryError("arithmetic ORDER BY expression (materialize it as a column)");
    }
    if (accept_keyword("DESC")) {
      q.order_by.descending = true;
    } else if (accept_keyword("ASC")) {
      q.order_by.descending = false;
    } else {
      q.order_by.descending = false;  // SQL default
    }
    if (peek_symbol(",")) throw UnsupportedQueryError("compound ORDER BY");
    if (peek_keyword("LIMIT")) throw UnsupportedQueryError("LIMIT (k belongs to the constraints)");
    accept_symbol(";");
    if (cur().type != Tok::kEnd) throw QuerySyntaxError("unexpected '" + cur().text + "'", cur().pos);
    return q;
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  bool peek_keyword(const char* kw) const {
    return cur().type == Tok::kIdent && upper(cur().text) == kw;
  }
  bool accept_keyword(const char* kw) {
    if (!peek_keyword(kw)) return false;
    ++i_;
    return true;
  }
  void expect_keyword(const char* kw) {
    if (!accept_keyword(kw)) {
      throw QuerySyntaxError(std::string("expected ") + kw + " but found '" + cur().text + "'",
                             cur().pos);
    }
  }
  bool peek_symbol(const char* s) const { return cur().type == Tok::kSymbol && cur().text == s; }
  bool accept_symbol(const char* s) {
    if (!peek_symbol(s)) return false;
    ++i_;
    return true;
  }
  void expect_symbol(const char* s) {
    if (!accept_symbol(s)) {
      throw QuerySyntaxError(std::string("expected '") + s + "' but found '" + cur().text + "'",
                             cur().pos);
    }
  }

  std::string identifier(const char* what) {
    const Token& t = cur();
    if (t.type == Tok::kQuotedIdent) {
      ++i_;
      return t.text;
    }
    if (t.type == Tok::kIdent && !reserved().count(upper(t.text))) {
      ++i_;
      return t.text;
    }
    if (t.type == Tok::kSymbol && t.text == "(" && what == std::string("ORDER BY attribute")) {
      throw UnsupportedQueryError("arithmetic ORDER BY expression (materialize it as a column)");
    }
    throw QuerySyntaxError(std::string("expected ") + what + " but found '" + t.text + "'", t.pos);
  }

  Decimal number() {
    bool negative = false;
    if (accept_symbol("-")) negative = true;
    else accept_symbol("+");
    const Token& t = cur();
    if (t.type != Tok::kNumber) throw QuerySyntaxError("expected a number", t.pos);
    auto d = Decimal::try_parse(t.text);
    if (!d) throw QuerySyntaxError("malformed number '" + t.text + "'", t.pos);
    ++i_;
    return negative ? -*d : *d;
  }

  std::optional<CmpOp> comparison() {
    if (cur().type != Tok::kSymbol) return std::nullopt;
    const std::string& s = cur().text;
    std::optional<CmpOp> op;
    if (s == "<") op = CmpOp::kLt;
    else if (s == "<=") op = CmpOp::kLe;
    else if (s == "=") op = CmpOp::kEq;
    else if (s == ">") op = CmpOp::kGt;
    else if (s == ">=") op = CmpOp::kGe;
    else if (s == "<>" || s == "!=") throw UnsupportedQueryError("inequality operator " + s);
    if (op) ++i_;
    return op;
  }

  void add_numeric(Query& q, NumPredicate p, std::size_t pos) {
    for (const auto& e : q.numeric_preds) {
      if (e.attribute == p.attribute && e.op == p.op) {
        throw QuerySyntaxError("duplicate predicate " + p.attribute + " " + to_string(p.op), pos);
      }
    }
    q.numeric_preds.push_back(std::move(p));
  }

  void add_categorical(Query& q, CatPredicate p, std::size_t pos) {
    for (const auto& e : q.cat_preds) {
      if (e.attribute == p.attribute) {
        throw QuerySyntaxError("duplicate categorical predicate on " + p.attribute, pos);
      }
    }
    q.cat_preds.push_back(std::move(p));
  }

  // One equality or comparison atom; returns attribute, op and constant.
  struct Atom {
    std::string attribute;
    CmpOp op;
    bool is_text;
    std::string text;
    Decimal number;
    std::size_t pos;
  };

  Atom atom() {
    if (peek_keyword("NOT")) throw UnsupportedQueryError("negation");
    Atom a;
    a.pos = cur().pos;
    a.attribute = identifier("attribute");
    if (peek_keyword("IN") || peek_keyword("BETWEEN") || peek_keyword("LIKE") ||
        peek_keyword("IS")) {
      throw UnsupportedQueryError(upper(cur().text) + " predicate");
    }
    auto op = comparison();
    if (!op) throw QuerySyntaxError("expected a comparison operator", cur().pos);
    a.op = *op;
    if (cur().type == Tok::kString) {
      if (a.op != CmpOp::kEq) {
        throw UnsupportedQueryError("ordering comparison on text attribute " + a.attribute);
      }
      a.is_text = true;
      a.text = cur().text;
      ++i_;
    } else if (peek_symbol("(")) {
      throw UnsupportedQueryError("nested query in predicate");
    } else {
      a.is_text = false;
      a.number = number();
    }
    return a;
  }

  void predicate(Query& q) {
    std::size_t pos = cur().pos;
    bool parens = accept_symbol("(");
    if (parens && peek_keyword("SELECT")) throw UnsupportedQueryError("nested query");
    Atom first = atom();
    std::vector<Atom> alts{first};
    while (accept_keyword("OR")) alts.push_back(atom());
    if (parens) {
      expect_symbol(")");
    }
    if (alts.size() == 1 && !first.is_text) {
      add_numeric(q, {first.attribute, first.op, first.number}, pos);
      return;
    }
    CatPredicate cp;
    cp.attribute = first.attribute;
    for (const auto& a : alts) {
      if (!a.is_text) throw UnsupportedQueryError("disjunction over numerical comparisons");
      if (a.attribute != first.attribute) throw UnsupportedQueryError("disjunction across attributes");
      cp.values.insert(a.text);
    }
    add_categorical(q, std::move(cp), pos);
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

std::string render_identifier(const std::string& name) {
  bool bare = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') bare = false;
  }
  if (bare && !reserved().count(upper(name))) return name;
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

std::string render_string(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "''";
    else out.push_back(c);
  }
  return out + "'";
}

}  // namespace

Query parse_query(const std::string& text) { return Parser(text).parse(); }

std::string render_sql(const Query& q) {
  std::string out = "SELECT ";
  if (q.distinct) out += "DISTINCT ";
  if (q.select_attrs.empty()) {
    out += "*";
  } else {
    for (std::size_t i = 0; i < q.select_attrs.size(); ++i) {
      if (i) out += ", ";
      out += render_identifier(q.select_attrs[i]);
    }
  }
  out += " FROM ";
  for (std::size_t i = 0; i < q.tables.size(); ++i) {
    if (i) out += " NATURAL JOIN ";
    out += render_identifier(q.tables[i]);
  }
  std::vector<std::string> preds;
  for (const auto& p : q.numeric_preds) {
    preds.push_back(render_identifier(p.attribute) + " " + to_string(p.op) + " " +
                    p.constant.to_string());
  }
  for (const auto& p : q.cat_preds) {
    std::string s;
    for (const auto& v : p.values) {
      if (!s.empty()) s += " OR ";
      s += render_identifier(p.attribute) + " = " + render_string(v);
    }
    if (p.values.size() > 1) s = "(" + s + ")";
    preds.push_back(s);
  }
  if (!preds.empty()) {
    out += " WHERE ";
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (i) out += " AND ";
      out += preds[i];
    }
  }
  out += " ORDER BY " + render_identifier(q.order_by.attribute);
  out += q.order_by.descending ? " DESC" : " ASC";
  return out;
}

Query apply_refinement(const Query& q, const Refinement& r) {
  Query out = q;
  for (const auto& [key, constant] : r.numeric_constants) {
    auto it = std::find_if(out.numeric_preds.begin(), out.numeric_preds.end(), [&](const auto& p) {
      return p.attribute == key.first && p.op == key.second;
    });
    if (it == out.numeric_preds.end()) {
      throw RefinementError("refinement references missing predicate " + key.first + " " +
                            to_string(key.second));
    }
    it->constant = constant;
  }
  for (const auto& [attr, values] : r.cat_values) {
    auto it = std::find_if(out.cat_preds.begin(), out.cat_preds.end(),
                           [&](const auto& p) { return p.attribute == attr; });
    if (it == out.cat_preds.end()) {
      throw RefinementError("refinement references missing categorical predicate on " + attr);
    }
    if (values.empty()) throw RefinementError("empty value set for " + attr);
    it->values = values;
  }
  return out;
}

void validate_query(const Query& q, const Schema& schema) {
  auto need = [&](const std::string& attr, AttrKind kind, const char* role) {
    auto i = schema.index_of(attr);
    if (!i) throw SchemaError(std::string("unknown attribute '") + attr + "' in " + role);
    if (schema.at(*i).kind != kind) {
      throw TypeError(std::string(role) + " on '" + attr + "' needs a " + to_string(kind) +
                      " attribute");
    }
  };
  for (const auto& p : q.numeric_preds) need(p.attribute, AttrKind::kNumerical, "numeric predicate");
  for (const auto& p : q.cat_preds) {
    need(p.attribute, AttrKind::kCategorical, "categorical predicate");
    if (p.values.empty()) throw RefinementError("empty value set for " + p.attribute);
  }
  need(q.order_by.attribute, AttrKind::kNumerical, "ORDER BY");
  for (const auto& a : q.select_attrs) {
    if (!schema.index_of(a)) throw SchemaError("unknown attribute '" + a + "' in select list");
  }
}

bool satisfies(const Tuple& t, const Schema& schema, const Query& q) {
  for (const auto& p : q.numeric_preds) {
    const Value& v = t.values[schema.require(p.attribute)];
    if (!compare(v.as_number(), p.op, p.constant)) return false;
  }
  for (const auto& p : q.cat_preds) {
    const Value& v = t.values[schema.require(p.attribute)];
    if (!p.values.count(v.as_text())) return false;
  }
  return true;
}

std::vector<std::string> distinct_attributes(const Query& q, const Schema& schema) {
  if (!q.distinct) return {};
  if (!q.select_attrs.empty()) return q.select_attrs;
  std::vector<std::string> all;
  for (const auto& a : schema.attributes()) all.push_back(a.name);
  return all;
}

}  // namespace qref
