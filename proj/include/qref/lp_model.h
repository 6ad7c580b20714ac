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

#ifndef QREF_LP_MODEL_H_
#define QREF_LP_MODEL_H_

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace qref {

enum class VarType { kContinuous, kBinary };
enum class RowSense { kLe, kGe, kEq };

struct Variable {
  std::string name;
  VarType type = VarType::kContinuous;
  double lower = 0;
  double upper = 0;
};

struct Term {
  int var = 0;
  double coef = 0;
};

struct Row {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::kLe;
  double rhs = 0;
};

class ModelError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Minimization MILP with finite variable bounds.
struct Model {
  std::vector<Variable> vars;
  std::vector<Row> rows;
  std::vector<Term> objective;
  double objective_constant = 0;

  int add_var(std::string name, VarType type, double lower, double upper);
  int add_binary(std::string name) { return add_var(std::move(name), VarType::kBinary, 0, 1); }
  // Merges duplicate variables in `terms` and drops zero coefficients.
  int add_row(std::string name, std::vector<Term> terms, RowSense sense, double rhs);
  void set_objective(std::vector<Term> terms, double constant = 0);

  int binary_count() const;
  // Throws ModelError on dangling variable ids, infinite or crossed bounds,
  // or binaries not bounded by [0, 1].
  void validate() const;

  double row_activity(const Row& row, const std::vector<double>& x) const;
  double objective_value(const std::vector<double>& x) const;
  // Largest bound or row violation of x.
  double max_violation(const std::vector<double>& x) const;
};

std::vector<Term> normalize_terms(std::vector<Term> terms);

// CPLEX-style LP text: Minimize / Subject To / Bounds / Binaries / End.
void write_lp(const Model& model, std::ostream& out);
std::string to_lp_string(const Model& model);
Model read_lp(std::istream& in);
Model parse_lp(const std::string& text);

}  // namespace qref

#endif  // QREF_LP_MODEL_H_
