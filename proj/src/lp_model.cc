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

#include "qref/lp_model.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace qref {

std::vector<Term> normalize_terms(std::vector<Term> terms) {
  std::map<int, double> merged;
  for (const auto& t : terms) merged[t.var] += t.coef;
  std::vector<Term> out;
  for (const auto& [var, coef] : merged) {
    if (coef != 0) out.push_back({var, coef});
  }
  return out;
}

int Model::add_var(std::string name, VarType type, double lower, double upper) {
  vars.push_back({std::move(name), type, lower, upper});
  return static_cast<int>(vars.size()) - 1;
}

int Model::add_row(std::string name, std::vector<Term> terms, RowSense sense, double rhs) {
  rows.push_back({std::move(name), normalize_terms(std::move(terms)), sense, rhs});
  return static_cast<int>(rows.size()) - 1;
}

void Model::set_objective(std::vector<Term> terms, double constant) {
  objective = normalize_terms(std::move(terms));
  objective_constant = constant;
}

int Model::binary_count() const {
  return static_cast<int>(std::count_if(vars.begin(), vars.end(), [](const Variable& v) {
    return v.type == VarType::kBinary;
  }));
}

void Model::validate() const {
  int n = static_cast<int>(vars.size());
  for (const auto& v : vars) {
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper)) {
      throw ModelError("variable " + v.name + " has an infinite bound");
    }
    if (v.lower > v.upper) throw ModelError("variable " + v.name + " has crossed bounds");
    if (v.type == VarType::kBinary && (v.lower < 0 || v.upper > 1)) {
      throw ModelError("binary " + v.name + " has bounds outside [0, 1]");
    }
  }
  auto check = [&](const std::vector<Term>& terms, const std::string& where) {
    for (const auto& t : terms) {
      if (t.var < 0 || t.var >= n) throw ModelError(where + " references an undeclared variable");
      if (!std::isfinite(t.coef)) throw ModelError(where + " has a non-finite coefficient");
    }
  };
  for (const auto& r : rows) {
    check(r.terms, "row " + r.name);
    if (!std::isfinite(r.rhs)) throw ModelError("row " + r.name + " has a non-finite rhs");
  }
  check(objective, "objective");
}

double Model::row_activity(const Row& row, const std::vector<double>& x) const {
  double s = 0;
  for (const auto& t : row.terms) s += t.coef * x[t.var];
  return s;
}

double Model::objective_value(const std::vector<double>& x) const {
  double s = objective_constant;
  for (const auto& t : objective) s += t.coef * x[t.var];
  return s;
}

double Model::max_violation(const std::vector<double>& x) const {
  double worst = 0;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    worst = std::max({worst, vars[j].lower - x[j], x[j] - vars[j].upper});
  }
  for (const auto& r : rows) {
    double a = row_activity(r, x);
    if (r.sense != RowSense::kGe) worst = std::max(worst, a - r.rhs);
    if (r.sense != RowSense::kLe) worst = std::max(worst, r.rhs - a);
  }
  return worst;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '[' ||
         c == ']' || c == '#';
}

std::vector<std::string> sanitized_names(const std::vector<std::string>& raw, const char* prefix) {
  std::vector<std::string> out;
  std::set<std::string> used;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::string s;
    for (char c : raw[i]) s.push_back(name_char(c) ? c : '_');
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.') {
      s = prefix + s;
    }
    if (used.count(s)) s += "#" + std::to_string(i);
    used.insert(s);
    out.push_back(s);
  }
  return out;
}

void write_terms(std::ostream& out, const std::vector<Term>& terms,
                 const std::vector<std::string>& names) {
  if (terms.empty()) {
    out << " 0 " << names.front();
    return;
  }
  for (const auto& t : terms) {
    out << (t.coef < 0 ? " - " : " + ") << num(std::abs(t.coef)) << ' ' << names[t.var];
  }
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s) {
  std::string l = lower(s);
  if (l == "inf" || l == "+inf" || l == "infinity") return HUGE_VAL;
  if (l == "-inf" || l == "-infinity") return -HUGE_VAL;
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ModelError("bad number '" + s + "' in LP text");
  }
  if (used != s.size()) throw ModelError("bad number '" + s + "' in LP text");
  return v;
}

bool is_number_token(const std::string& s) {
  return !s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.' ||
                        ((s[0] == '-' || s[0] == '+') && s.size() > 1));
}

class LpReader {
 public:
  Model read(std::istream& in) {
    std::string line;
    enum class Section { kNone, kObjective, kRows, kBounds, kBinaries, kEnd } section =
        Section::kNone;
    std::string pending;
    while (std::getline(in, line)) {
      std::string t = trim(line);
      if (t.rfind("\\ constant:", 0) == 0) {
        constant_ = parse_double(trim(t.substr(11)));
        continue;
      }
      if (t.empty() || t[0] == '\\') continue;
      std::string l = lower(t);
      if (l == "minimize" || l == "minimise" || l == "min") {
        section = Section::kObjective;
        continue;
      }
      if (l == "maximize" || l == "max") throw ModelError("only minimization is supported");
      if (l == "subject to" || l == "such that" || l == "st" || l == "s.t.") {
        section = Section::kRows;
        continue;
      }
      if (l == "bounds") {
        section = Section::kBounds;
        continue;
      }
      if (l == "binaries" || l == "binary" || l == "bin") {
        section = Section::kBinaries;
        continue;
      }
      if (l == "end") {
        section = Section::kEnd;
        continue;
      }
      switch (section) {
        case Section::kObjective: objective_text_ += " " + t; break;
        case Section::kRows:
          pending += " " + t;
          if (pending.find('<') != std::string::npos || pending.find('>') != std::string::npos ||
              pending.find('=') != std::string::npos) {
            row_texts_.push_back(pending);
            pending.clear();
          }
          break;
        case Section::kBounds: bound(t); break;
        case Section::kBinaries: {
          std::istringstream ss(t);
          std::string name;
          while (ss >> name) binaries_.insert(name);
          break;
        }
        default: throw ModelError("unexpected text outside a section: " + t);
      }
    }
    if (!pending.empty()) throw ModelError("unterminated row:" + pending);

    Model m;
    for (const auto& name : order_) {
      auto [lo, hi] = bounds_[name];
      index_[name] = m.add_var(name, binaries_.count(name) ? VarType::kBinary : VarType::kContinuous,
                               lo, hi);
    }
    std::string obj = objective_text_;
    if (auto colon = obj.find(':'); colon != std::string::npos) obj = obj.substr(colon + 1);
    m.set_objective(terms(obj, m), constant_);
    for (const auto& text : row_texts_) {
      std::string body = text;
      std::string name;
      if (auto colon = body.find(':'); colon != std::string::npos) {
        name = trim(body.substr(0, colon));
        body = body.substr(colon + 1);
      }
      std::size_t pos = body.find_first_of("<>=");
      RowSense sense;
      std::size_t len = 1;
      if (body[pos] == '<') sense = RowSense::kLe;
      else if (body[pos] == '>') sense = RowSense::kGe;
      else sense = RowSense::kEq;
      if (pos + 1 < body.size() && body[pos + 1] == '=') len = 2;
      double rhs = parse_double(trim(body.substr(pos + len)));
      m.add_row(name, terms(body.substr(0, pos), m), sense, rhs);
    }
    m.validate();
    return m;
  }

 private:
  void declare(const std::string& name) {
    if (bounds_.count(name)) return;
    bounds_[name] = {0, HUGE_VAL};
    order_.push_back(name);
  }

  void bound(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> tok;
    std::string s;
    while (ss >> s) tok.push_back(s);
    if (tok.size() == 5 && tok[1] == "<=" && tok[3] == "<=") {
      declare(tok[2]);
      bounds_[tok[2]] = {parse_double(tok[0]), parse_double(tok[4])};
    } else if (tok.size() == 3 && tok[1] == "=") {
      declare(tok[0]);
      double v = parse_double(tok[2]);
      bounds_[tok[0]] = {v, v};
    } else if (tok.size() == 3 && (tok[1] == "<=" || tok[1] == ">=")) {
      declare(tok[0]);
      double v = parse_double(tok[2]);
      if (tok[1] == "<=") bounds_[tok[0]].second = v;
      else bounds_[tok[0]].first = v;
    } else {
      throw ModelError("unsupported bound line: " + line);
    }
  }

  std::vector<Term> terms(const std::string& expr, Model& m) {
    std::istringstream ss(expr);
    std::vector<std::string> tok;
    std::string s;
    while (ss >> s) tok.push_back(s);
    std::vector<Term> out;
    double sign = 1;
    double coef = 1;
    bool have_coef = false;
    for (const auto& t : tok) {
      if (t == "+") continue;
      if (t == "-") {
        sign = -sign;
        continue;
      }
      if (is_number_token(t) && !have_coef) {
        coef = parse_double(t);
        have_coef = true;
        continue;
      }
      std::string name = t;
      if (!index_.count(name)) {
        declare(name);
        auto [lo, hi] = bounds_[name];
        index_[name] = m.add_var(name, binaries_.count(name) ? VarType::kBinary
                                                             : VarType::kContinuous,
                                 lo, hi);
      }
      out.push_back({index_.at(name), sign * coef});
      sign = 1;
      coef = 1;
      have_coef = false;
    }
    return out;
  }

  std::string objective_text_;
  std::vector<std::string> row_texts_;
  std::map<std::string, std::pair<double, double>> bounds_;
  std::vector<std::string> order_;
  std::set<std::string> binaries_;
  std::map<std::string, int> index_;
  double constant_ = 0;
};

}  // namespace

void write_lp(const Model& model, std::ostream& out) {
  std::vector<std::string> raw_vars;
  for (const auto& v : model.vars) raw_vars.push_back(v.name);
  auto names = sanitized_names(raw_vars, "x_");
  std::vector<std::string> raw_rows;
  for (const auto& r : model.rows) raw_rows.push_back(r.name);
  auto row_names = sanitized_names(raw_rows, "r_");
  if (names.empty()) throw ModelError("cannot write a model without variables");

  out << "\\ constant: " << num(model.objective_constant) << '\n';
  out << "Minimize\n obj:";
  write_terms(out, model.objective, names);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < model.rows.size(); ++i) {
    const auto& r = model.rows[i];
    out << ' ' << row_names[i] << ':';
    write_terms(out, r.terms, names);
    out << (r.sense == RowSense::kLe ? " <= " : r.sense == RowSense::kGe ? " >= " : " = ")
        << num(r.rhs) << '\n';
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < model.vars.size(); ++j) {
    out << ' ' << num(model.vars[j].lower) << " <= " << names[j] << " <= "
        << num(model.vars[j].upper) << '\n';
  }
  out << "Binaries\n";
  for (std::size_t j = 0; j < model.vars.size(); ++j) {
    if (model.vars[j].type == VarType::kBinary) out << ' ' << names[j] << '\n';
  }
  out << "End\n";
}

std::string to_lp_string(const Model& model) {
  std::ostringstream ss;
  write_lp(model, ss);
  return ss.str();
}

Model read_lp(std::istream& in) { return LpReader().read(in); }

Model parse_lp(const std::string& text) {
  std::istringstream in(text);
  return read_lp(in);
}

}  // namespace qref
