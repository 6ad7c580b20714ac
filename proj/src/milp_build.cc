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

#include "qref/milp_build.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace qref {

namespace {

std::string op_name(CmpOp op) { return to_string(op); }

bool uses_pred(DistanceKind kind) {
  return kind == DistanceKind::kPred || kind == DistanceKind::kPredKendall;
}

bool uses_kendall(DistanceKind kind) {
  return kind == DistanceKind::kKendall || kind == DistanceKind::kPredKendall;
}

double as_double(Decimal d) { return d.to_double(); }

// Half the smallest gap between distinct values of `values` (0.5 when there
// is only one).
Decimal half_min_gap(const std::set<Decimal>& values) {
  Decimal best;
  bool found = false;
  for (auto it = values.begin(), next = it; it != values.end() && ++next != values.end(); ++it) {
    Decimal gap = *next - *it;
    if (!found || gap < best) {
      best = gap;
      found = true;
    }
  }
  if (!found) return Decimal::parse("0.5");
  Decimal half = best.div_int(2);
  // Keep the gap representable; 1e-18 is the smallest step.
  return half.is_zero() ? Decimal::from_units(1) : half;
}

std::int64_t lcm_capped(const std::vector<int>& ns, std::int64_t cap) {
  std::int64_t l = 1;
  for (int n : ns) {
    l = std::lcm(l, static_cast<std::int64_t>(n));
    if (l > cap) return -1;
  }
  return l;
}

class Builder {
 public:
  Builder(const Annotation& a, const ConstraintSet& cs, const BuildOptions& opt)
      : a_(a), cs_(cs), opt_(opt), q_(a.query) {}

  MilpBuild run() {
    validate(cs_);
    validate(cs_, a_.joined.schema);
    b_.k_star = cs_.k_star();
    DistanceKind kind = opt_.distance.kind;
    b_.outcome_k = opt_.distance.k > 0 ? opt_.distance.k : b_.k_star;
    if (uses_pred(kind)) {
      for (const auto& p : q_.numeric_preds) {
        if (p.constant <= Decimal()) {
          throw DistanceError("predicate distance is undefined for the non-positive constant " +
                              p.attribute + " " + to_string(p.op) + " " + p.constant.to_string());
        }
      }
    }
    if (is_outcome(kind)) {
      Ranking original = evaluate_with_provenance(a_, q_);
      if (static_cast<int>(original.size()) < b_.outcome_k) {
        throw PreconditionError("the original query returns " + std::to_string(original.size()) +
                                " tuples, fewer than k = " + std::to_string(b_.outcome_k) +
                                " needed by the " + to_string(kind) + " distance");
      }
      b_.original_top = top(original, b_.outcome_k);
    }
    choose_encoded();
    add_predicate_vars();
    add_selection();
    add_positions();
    add_deviation();
    add_objective();
    if (opt_.tighten) add_tightening();
    return std::move(b_);
  }

 private:
  void choose_encoded() {
    int horizon = std::max(b_.k_star, b_.outcome_k);
    std::unordered_map<int, std::unordered_set<std::string>> keys_before;
    std::set<int> classes;
    for (const auto& t : a_.tuples) {
      auto& keys = keys_before[t.lineage_class];
      if (opt_.relevancy_prune && static_cast<int>(keys.size()) >= horizon) {
        ++b_.pruned_count;
        continue;
      }
      keys.insert(q_.distinct ? distinct_key(a_.row(t.id), a_.joined.schema, a_.distinct_attrs)
                              : std::to_string(t.id));
      b_.encoded.push_back(t.id);
      classes.insert(t.lineage_class);
    }
    encoded_set_.insert(b_.encoded.begin(), b_.encoded.end());
    b_.lineage_classes = static_cast<int>(classes.size());
    b_.merged = opt_.merge_lineage && !q_.distinct;
    b_.relaxed = opt_.relax_single_type && opt_.distance.kind == DistanceKind::kPred;
  }

  void add_predicate_vars() {
    std::set<int> used;
    for (TupleId id : b_.encoded) {
      for (int atom : a_.at(id).lineage) used.insert(atom);
    }
    atom_var_.assign(a_.atoms.size(), -1);
    Model& m = b_.model;

    for (std::size_t p = 0; p < q_.numeric_preds.size(); ++p) {
      const NumPredicate& pred = q_.numeric_preds[p];
      std::size_t col = a_.joined.schema.require(pred.attribute);
      std::set<Decimal> dom;
      for (const auto& row : a_.joined.rows) dom.insert(row.values[col].as_number());
      std::set<Decimal> with_c0 = dom;
      with_c0.insert(pred.constant);

      NumericVars nv;
      nv.predicate = p;
      nv.original = pred.constant;
      nv.delta = half_min_gap(with_c0);
      nv.lower = *with_c0.begin() - Decimal::from_int(1);
      nv.upper = *with_c0.rbegin() + Decimal::from_int(1);
      double max_abs = 0;
      for (Decimal v : dom) max_abs = std::max(max_abs, std::abs(as_double(v)));
      nv.big_m = std::max(max_abs + 1,
                          as_double(nv.upper - nv.lower) + as_double(nv.delta) + 1);
      std::string key = pred.attribute + "," + op_name(pred.op);
      nv.constant_var = m.add_var("C[" + key + "]", VarType::kContinuous, as_double(nv.lower),
                                  as_double(nv.upper));

      std::map<CmpOp, std::size_t> family_index;
      for (std::size_t i = 0; i < a_.atoms.size(); ++i) {
        const Atom& atom = a_.atoms[i];
        if (atom.categorical || atom.predicate != p || !used.count(static_cast<int>(i))) continue;
        auto [it, fresh] = family_index.emplace(atom.family, nv.families.size());
        if (fresh) nv.families.push_back({atom.family, {}});
        int var = m.add_binary(pred.attribute + "[" + atom.number.to_string() + "," +
                               op_name(atom.family) + "]");
        atom_var_[i] = var;
        nv.families[it->second].indicators.emplace_back(atom.number, var);
        add_value_rows(nv, atom.family, atom.number, var);
      }
      b_.numeric.push_back(std::move(nv));
    }

    for (std::size_t p = 0; p < q_.cat_preds.size(); ++p) {
      const CatPredicate& pred = q_.cat_preds[p];
      CategoricalVars cv;
      cv.predicate = p;
      for (std::size_t i = 0; i < a_.atoms.size(); ++i) {
        const Atom& atom = a_.atoms[i];
        if (!atom.categorical || atom.predicate != p || !used.count(static_cast<int>(i))) continue;
        int var = m.add_binary(pred.attribute + "[" + atom.text + "]");
        atom_var_[i] = var;
        cv.value_vars[atom.text] = var;
      }
      b_.categorical.push_back(std::move(cv));
    }
  }

  // Indicator `var` is 1 iff `v family C`.
  void add_value_rows(const NumericVars& nv, CmpOp family, Decimal v, int var) {
    Model& m = b_.model;
    double st = is_strict(family) ? 1 : 0;
    double d = as_double(nv.delta);
    double val = as_double(v);
    double big = nv.big_m;
    int c = nv.constant_var;
    std::string tag = "[" + q_.numeric_preds[nv.predicate].attribute + op_name(family) +
                      v.to_string() + "]";
    if (is_lower_bound(family)) {
      m.add_row("on" + tag, {{c, 1}, {var, big}}, RowSense::kGe, val + (1 - st) * d);
      m.add_row("off" + tag, {{c, 1}, {var, big}}, RowSense::kLe, val - st * d + big);
    } else {
      m.add_row("on" + tag, {{c, 1}, {var, -big}}, RowSense::kLe, val - (1 - st) * d);
      m.add_row("off" + tag, {{c, 1}, {var, -big}}, RowSense::kGe, val + st * d - big);
    }
  }

  std::vector<Term> lineage_terms(const AnnotatedTuple& t) const {
    std::vector<Term> terms;
    for (int atom : t.lineage) terms.push_back({atom_var_[atom], 1});
    return terms;
  }

  void add_selection() {
    Model& m = b_.model;
    int preds = a_.predicate_count;
    std::vector<Term> count_terms;
    if (b_.merged) {
      std::map<int, int> class_var;
      for (TupleId id : b_.encoded) {
        const AnnotatedTuple& t = a_.at(id);
        auto it = class_var.find(t.lineage_class);
        if (it == class_var.end()) {
          std::string name = "r[class" + std::to_string(t.lineage_class) + "]";
          int var = m.add_binary(name);
          if (preds == 0) {
            m.vars[var].lower = 1;
          } else {
            auto terms = lineage_terms(t);
            terms.push_back({var, -static_cast<double>(preds)});
            m.add_row("select_lo" + name.substr(1), terms, RowSense::kGe, 0);
            m.add_row("select_hi" + name.substr(1), terms, RowSense::kLe, preds - 1);
          }
          it = class_var.emplace(t.lineage_class, var).first;
        }
        b_.select_var[id] = it->second;
        count_terms.push_back({it->second, 1});
      }
    } else {
      for (TupleId id : b_.encoded) {
        const AnnotatedTuple& t = a_.at(id);
        std::string tag = "[" + std::to_string(id) + "]";
        int var = m.add_binary("r" + tag);
        b_.select_var[id] = var;
        std::vector<TupleId> shadow;
        for (TupleId s : t.shadow) {
          if (encoded_set_.count(s)) shadow.push_back(s);
        }
        int total = preds + static_cast<int>(shadow.size());
        if (total == 0) {
          m.vars[var].lower = 1;
        } else {
          auto terms = lineage_terms(t);
          for (TupleId s : shadow) terms.push_back({b_.select_var.at(s), -1});
          terms.push_back({var, -static_cast<double>(total)});
          double shift = static_cast<double>(shadow.size());
          m.add_row("select_lo" + tag, terms, RowSense::kGe, -shift);
          m.add_row("select_hi" + tag, terms, RowSense::kLe, total - 1 - shift);
        }
        count_terms.push_back({var, 1});
      }
    }
    m.add_row("min_output", count_terms, RowSense::kGe, b_.k_star);
  }

  void add_positions() {
    Model& m = b_.model;
    const int n = static_cast<int>(b_.encoded.size());
    // Which prefixes each tuple needs.
    std::map<TupleId, std::set<int>> need;
    std::map<TupleId, std::pair<bool, bool>> sides;  // in a lower / upper group
    for (const auto& c : cs_.constraints) {
      std::vector<TupleId> members;
      for (TupleId id : b_.encoded) {
        if (!c.contains(a_.row(id), a_.joined.schema)) continue;
        members.push_back(id);
        need[id].insert(c.k);
        (c.sense == Sense::kLower ? sides[id].first : sides[id].second) = true;
      }
      b_.group_members.push_back(std::move(members));
      b_.group_k.push_back(c.k);
    }
    if (is_outcome(opt_.distance.kind)) {
      for (TupleId id : b_.encoded) need[id].insert(b_.outcome_k);
    }

    std::vector<Term> before;  // selection terms of better-ranked tuples
    const double big = 2.0 * n + 1;
    for (TupleId id : b_.encoded) {
      auto it = need.find(id);
      if (it != need.end()) {
        std::string tag = "[" + std::to_string(id) + "]";
        int s = m.add_var("s" + tag, VarType::kContinuous, 1, 2.0 * n);
        b_.position_var[id] = s;
        // s_t = 1 + n (1 - r_t) + sum of better r.
        std::vector<Term> terms = {{s, 1}, {b_.select_var.at(id), static_cast<double>(n)}};
        for (const Term& t : before) terms.push_back({t.var, -1});
        RowSense sense = RowSense::kEq;
        if (b_.relaxed) {
          auto [lower, upper] = sides[id];
          if (lower && !upper) sense = RowSense::kGe;
          if (upper && !lower) sense = RowSense::kLe;
        }
        m.add_row("position" + tag, terms, sense, 1.0 + n);
        for (int k : it->second) {
          std::string ltag = "[" + std::to_string(id) + "," + std::to_string(k) + "]";
          int l = m.add_binary("l" + ltag);
          b_.prefix_var[{id, k}] = l;
          m.add_row("beyond" + ltag, {{s, 1}, {l, big}}, RowSense::kGe, k + opt_.position_delta);
          m.add_row("within" + ltag, {{s, 1}, {l, big}}, RowSense::kLe, k + big);
        }
      }
      before.push_back({b_.select_var.at(id), 1});
    }
  }

  void add_deviation() {
    Model& m = b_.model;
    std::vector<int> ns;
    for (std::size_t i = 0; i < cs_.constraints.size(); ++i) {
      const auto& c = cs_.constraints[i];
      ns.push_back(c.n);
      std::string tag = "[" + std::to_string(i) + "]";
      int e = m.add_var("E" + tag, VarType::kContinuous, 0, c.k);
      b_.deviation_vars.push_back(e);
      std::vector<Term> terms = {{e, 1}};
      for (TupleId id : b_.group_members[i]) {
        terms.push_back({b_.prefix_var.at({id, c.k}), static_cast<double>(c.sign())});
      }
      m.add_row("shortfall" + tag, terms, RowSense::kGe, c.sign() * c.n);
    }
    Rational budget = opt_.epsilon * Rational(static_cast<std::int64_t>(cs_.constraints.size()));
    std::int64_t l = lcm_capped(ns, 1000000000);
    std::vector<Term> terms;
    if (l > 0) {
      for (std::size_t i = 0; i < ns.size(); ++i) {
        terms.push_back({b_.deviation_vars[i], static_cast<double>(l / ns[i])});
      }
      m.add_row("max_deviation", terms, RowSense::kLe,
                static_cast<double>((budget * Rational(l)).floor()));
    } else {
      for (std::size_t i = 0; i < ns.size(); ++i) {
        terms.push_back({b_.deviation_vars[i], 1.0 / ns[i]});
      }
      m.add_row("max_deviation", terms, RowSense::kLe, budget.to_double() + 1e-9);
    }
  }

  void add_objective() {
    DistanceKind kind = opt_.distance.kind;
    std::vector<Term> obj;
    double constant = 0;
    if (uses_pred(kind)) add_pred_objective(obj, constant);
    if (kind == DistanceKind::kJaccard) {
      for (TupleId id : b_.original_top) obj.push_back({b_.prefix_var.at({id, b_.outcome_k}), -1});
    }
    if (uses_kendall(kind)) {
      double weight = kind == DistanceKind::kPredKendall ? opt_.distance.lambda : 1.0;
      add_kendall_objective(obj, weight);
    }
    b_.model.set_objective(std::move(obj), constant);
  }

  void add_pred_objective(std::vector<Term>& obj, double& constant) {
    Model& m = b_.model;
    for (auto& nv : b_.numeric) {
      const NumPredicate& pred = q_.numeric_preds[nv.predicate];
      double c0 = as_double(nv.original);
      std::string tag = "[" + pred.attribute + "," + op_name(pred.op) + "]";
      double cap = std::max(as_double(nv.upper) - c0, c0 - as_double(nv.lower)) / c0;
      nv.distance_var = m.add_var("d" + tag, VarType::kContinuous, 0, cap);
      m.add_row("dist_up" + tag, {{nv.distance_var, 1}, {nv.constant_var, -1 / c0}},
                RowSense::kGe, -1);
      m.add_row("dist_down" + tag, {{nv.distance_var, 1}, {nv.constant_var, 1 / c0}},
                RowSense::kGe, 1);
      obj.push_back({nv.distance_var, 1});
    }
    // Jaccard over value sets, linearized with w = 1 / |R ∪ S| and
    // z_v = w * A_v.
    for (const auto& cv : b_.categorical) {
      const CatPredicate& pred = q_.cat_preds[cv.predicate];
      const auto& original = pred.values;
      int outside = 0;
      int kept_fixed = 0;
      for (const auto& [v, var] : cv.value_vars) outside += original.count(v) ? 0 : 1;
      for (const auto& v : original) kept_fixed += cv.value_vars.count(v) ? 0 : 1;
      double lo = 1.0 / (static_cast<double>(original.size()) + outside);
      double hi = 1.0 / static_cast<double>(original.size());
      std::string tag = "[" + pred.attribute + "]";
      int w = m.add_var("w" + tag, VarType::kContinuous, lo, hi);
      std::vector<Term> norm = {{w, static_cast<double>(original.size())}};
      constant += 1;
      if (kept_fixed > 0) obj.push_back({w, -static_cast<double>(kept_fixed)});
      for (const auto& [v, a] : cv.value_vars) {
        std::string ztag = "[" + pred.attribute + "," + v + "]";
        int z = m.add_var("z" + ztag, VarType::kContinuous, 0, hi);
        m.add_row("z_on" + ztag, {{z, 1}, {a, -hi}}, RowSense::kLe, 0);
        m.add_row("z_min" + ztag, {{z, 1}, {a, -lo}}, RowSense::kGe, 0);
        m.add_row("z_w" + ztag, {{z, 1}, {w, -1}, {a, -lo}}, RowSense::kLe, -lo);
        m.add_row("z_w_min" + ztag, {{z, 1}, {w, -1}, {a, -hi}}, RowSense::kGe, -hi);
        if (original.count(v)) {
          obj.push_back({z, -1});
        } else {
          norm.push_back({z, 1});
        }
      }
      m.add_row("union" + tag, norm, RowSense::kEq, 1);
    }
  }

  // Top-k Kendall distance: for each original top-k tuple t, the pairs it
  // loses when it departs (originals after it and every newcomer) and the
  // newcomers overtaking it when it stays.
  void add_kendall_objective(std::vector<Term>& obj, double weight) {
    Model& m = b_.model;
    const int k = b_.outcome_k;
    const double big = static_cast<double>(b_.encoded.size()) + 1;
    std::unordered_set<TupleId> original(b_.original_top.begin(), b_.original_top.end());
    auto l = [&](TupleId id) { return b_.prefix_var.at({id, k}); };

    std::vector<Term> fresh;
    for (TupleId id : b_.encoded) {
      if (!original.count(id)) fresh.push_back({l(id), 1});
    }
    // Each case equals its sum when active and 0 otherwise; the sums
    // count at most k indicators.
    auto add_case = [&](const std::string& name, int lt, const std::vector<Term>& sum,
                        bool active_when_kept) {
      int v = m.add_var(name, VarType::kContinuous, 0, k);
      std::vector<Term> with_sum = {{v, 1}};
      for (const Term& t : sum) with_sum.push_back({t.var, -1});
      if (active_when_kept) {
        m.add_row(name + ".off", {{v, 1}, {lt, -big}}, RowSense::kLe, 0);
        with_sum.push_back({lt, big});
        m.add_row(name + ".le", with_sum, RowSense::kLe, big);
        with_sum.back().coef = -big;
        m.add_row(name + ".ge", with_sum, RowSense::kGe, -big);
      } else {
        m.add_row(name + ".off", {{v, 1}, {lt, big}}, RowSense::kLe, big);
        with_sum.push_back({lt, -big});
        m.add_row(name + ".le", with_sum, RowSense::kLe, 0);
        with_sum.back().coef = big;
        m.add_row(name + ".ge", with_sum, RowSense::kGe, 0);
      }
      obj.push_back({v, weight});
    };

    for (std::size_t i = 0; i < b_.original_top.size(); ++i) {
      TupleId id = b_.original_top[i];
      std::string tag = "[" + std::to_string(id) + "]";
      std::vector<Term> after;
      for (std::size_t j = i + 1; j < b_.original_top.size(); ++j) {
        after.push_back({l(b_.original_top[j]), 1});
      }
      std::vector<Term> fresh_before;
      int rank = a_.at(id).base_rank;
      for (TupleId other : b_.encoded) {
        if (a_.at(other).base_rank >= rank) break;
        if (!original.count(other)) fresh_before.push_back({l(other), 1});
      }
      add_case("departed_after" + tag, l(id), after, false);
      add_case("departed_new" + tag, l(id), fresh, false);
      add_case("overtaken" + tag, l(id), fresh_before, true);
    }
  }

  void add_tightening() {
    Model& m = b_.model;
    std::set<int> seen;
    for (TupleId id : b_.encoded) {
      int r = b_.select_var.at(id);
      if (!seen.insert(r).second) continue;
      for (int atom : a_.at(id).lineage) {
        int p = atom_var_[atom];
        m.add_row("implies[" + m.vars[r].name + "," + m.vars[p].name + "]", {{r, 1}, {p, -1}},
                  RowSense::kLe, 0);
      }
    }
    for (const auto& nv : b_.numeric) {
      for (const auto& fam : nv.families) {
        auto ind = fam.indicators;
        std::sort(ind.begin(), ind.end());
        for (std::size_t i = 1; i < ind.size(); ++i) {
          // Lower-bound families hold for every value above one that holds.
          int small = ind[i - 1].second;
          int large = ind[i].second;
          if (!is_lower_bound(fam.op)) std::swap(small, large);
          m.add_row("chain[" + m.vars[small].name + "," + m.vars[large].name + "]",
                    {{small, 1}, {large, -1}}, RowSense::kLe, 0);
        }
      }
    }
    std::map<int, std::vector<Term>> prefix_sums;
    for (const auto& [key, l] : b_.prefix_var) {
      auto [id, k] = key;
      std::string tag = "[" + std::to_string(id) + "," + std::to_string(k) + "]";
      m.add_row("prefix_selected" + tag, {{l, 1}, {b_.select_var.at(id), -1}}, RowSense::kLe, 0);
      prefix_sums[k].push_back({l, 1});
    }
    for (const auto& [k, terms] : prefix_sums) {
      if (static_cast<int>(terms.size()) > k) {
        m.add_row("prefix_size[" + std::to_string(k) + "]", terms, RowSense::kLe, k);
      }
    }
  }

  const Annotation& a_;
  const ConstraintSet& cs_;
  const BuildOptions& opt_;
  const Query& q_;
  MilpBuild b_;
  std::unordered_set<TupleId> encoded_set_;
  std::vector<int> atom_var_;
};

bool on(const std::vector<double>& x, int var) { return x.at(var) > 0.5; }

}  // namespace

MilpBuild build_model(const Annotation& annotation, const ConstraintSet& cs,
                      const BuildOptions& options) {
  return Builder(annotation, cs, options).run();
}

std::vector<int> decision_vars(const MilpBuild& build) {
  std::vector<int> out;
  for (const auto& nv : build.numeric) {
    for (const auto& fam : nv.families) {
      for (const auto& [v, var] : fam.indicators) out.push_back(var);
    }
  }
  for (const auto& cv : build.categorical) {
    for (const auto& [v, var] : cv.value_vars) out.push_back(var);
  }
  return out;
}

std::vector<std::pair<int, double>> decision_assignment(const MilpBuild& build,
                                                        const Annotation& annotation,
                                                        const Refinement& refinement) {
  const Query& q = annotation.query;
  std::vector<std::pair<int, double>> out;
  for (const auto& nv : build.numeric) {
    const NumPredicate& pred = q.numeric_preds[nv.predicate];
    auto it = refinement.numeric_constants.find({pred.attribute, pred.op});
    Decimal c = it == refinement.numeric_constants.end() ? pred.constant : it->second;
    for (const auto& fam : nv.families) {
      for (const auto& [v, var] : fam.indicators) {
        out.emplace_back(var, compare(v, fam.op, c) ? 1.0 : 0.0);
      }
    }
  }
  for (const auto& cv : build.categorical) {
    const CatPredicate& pred = q.cat_preds[cv.predicate];
    auto it = refinement.cat_values.find(pred.attribute);
    const std::set<std::string>& chosen =
        it == refinement.cat_values.end() ? pred.values : it->second;
    for (const auto& [v, var] : cv.value_vars) out.emplace_back(var, chosen.count(v) ? 1.0 : 0.0);
  }
  return out;
}

Refinement extract_refinement(const MilpBuild& build, const Annotation& annotation,
                              const std::vector<double>& values) {
  const Query& q = annotation.query;
  Refinement r;
  for (const auto& nv : build.numeric) {
    const NumPredicate& pred = q.numeric_preds[nv.predicate];
    Decimal lo = nv.lower;
    Decimal hi = nv.upper;
    for (const auto& fam : nv.families) {
      for (const auto& [v, var] : fam.indicators) {
        bool holds = on(values, var);
        switch (fam.op) {
          case CmpOp::kGe:  // v >= C
            if (holds) hi = std::min(hi, v);
            else lo = std::max(lo, v + nv.delta);
            break;
          case CmpOp::kGt:  // v > C
            if (holds) hi = std::min(hi, v - nv.delta);
            else lo = std::max(lo, v);
            break;
          case CmpOp::kLe:  // v <= C
            if (holds) lo = std::max(lo, v);
            else hi = std::min(hi, v - nv.delta);
            break;
          case CmpOp::kLt:  // v < C
            if (holds) lo = std::max(lo, v + nv.delta);
            else hi = std::min(hi, v);
            break;
          case CmpOp::kEq:
            break;
        }
      }
    }
    if (lo > hi) {
      throw ConsistencyError("indicators of " + pred.attribute + " " + to_string(pred.op) +
                             " admit no constant");
    }
    r.numeric_constants[{pred.attribute, pred.op}] = std::clamp(nv.original, lo, hi);
  }
  for (const auto& cv : build.categorical) {
    const CatPredicate& pred = q.cat_preds[cv.predicate];
    std::set<std::string> chosen;
    for (const auto& [v, var] : cv.value_vars) {
      if (on(values, var)) chosen.insert(v);
    }
    // Original values no encoded tuple carries are kept.
    for (const auto& v : pred.values) {
      if (!cv.value_vars.count(v)) chosen.insert(v);
    }
    if (chosen.empty()) {
      throw ConsistencyError("assignment selects no value for " + pred.attribute);
    }
    r.cat_values[pred.attribute] = std::move(chosen);
  }
  return r;
}

std::vector<int> model_group_counts(const MilpBuild& build, const std::vector<double>& values) {
  std::vector<int> out;
  for (std::size_t i = 0; i < build.group_members.size(); ++i) {
    int count = 0;
    for (TupleId id : build.group_members[i]) {
      count += on(values, build.prefix_var.at({id, build.group_k[i]})) ? 1 : 0;
    }
    out.push_back(count);
  }
  return out;
}

void check_consistency(const MilpBuild& build, const Annotation& annotation,
                       const ConstraintSet& cs, const Rational& epsilon,
                       const Refinement& refinement, const std::vector<double>& values) {
  Query refined = apply_refinement(annotation.query, refinement);
  Ranking ranking = evaluate_with_provenance(annotation, refined);
  if (static_cast<int>(ranking.size()) < build.k_star) {
    throw ConsistencyError("refined query returns " + std::to_string(ranking.size()) +
                           " tuples, fewer than k* = " + std::to_string(build.k_star));
  }
  std::vector<int> actual = group_counts(ranking, annotation.joined, cs);
  std::vector<int> claimed = model_group_counts(build, values);
  for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
    const auto& c = cs.constraints[i];
    bool ok = claimed[i] == actual[i];
    if (build.relaxed) {
      ok = c.sense == Sense::kLower ? claimed[i] <= actual[i] : claimed[i] >= actual[i];
    }
    if (!ok) {
      throw ConsistencyError("constraint " + c.label() + ": model counts " +
                             std::to_string(claimed[i]) + ", refined query has " +
                             std::to_string(actual[i]));
    }
  }
  if (deviation_from_counts(actual, cs) > epsilon) {
    throw ConsistencyError("refined query deviates by " +
                           deviation_from_counts(actual, cs).to_string() + " > epsilon " +
                           epsilon.to_string());
  }
  if (!build.original_top.empty()) {
    std::unordered_set<TupleId> in_top;
    for (TupleId id : top(ranking, build.outcome_k)) in_top.insert(id);
    for (TupleId id : build.encoded) {
      auto it = build.prefix_var.find({id, build.outcome_k});
      if (it == build.prefix_var.end()) continue;
      if (on(values, it->second) != (in_top.count(id) > 0)) {
        throw ConsistencyError("model places tuple " + std::to_string(id) +
                               (in_top.count(id) ? " outside" : " inside") + " the top-" +
                               std::to_string(build.outcome_k));
      }
    }
  }
}

}  // namespace qref
