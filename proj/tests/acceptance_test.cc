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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qref/bench.h"
#include "qref/distances.h"
#include "qref/engine.h"
#include "qref/milp_build.h"
#include "qref/oracle.h"
#include "qref/solver.h"
#include "random_instance.h"
#include "random_milp.h"
#include "test_util.h"

namespace qref {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

// Collects the first few failures of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (notes_.size() < 3) notes_.push_back(what);
  }
  bool ok() const { return failures_ == 0 && checks_ > 0; }
  std::string failure_text() const {
    std::string s = std::to_string(failures_) + " of " + std::to_string(checks_) + " checks failed";
    for (const auto& n : notes_) s += "\n    " + n;
    return s;
  }

 private:
  int checks_ = 0;
  int failures_ = 0;
  std::vector<std::string> notes_;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome finish(const Check& c, const std::string& summary) {
  return {c.ok(), c.ok() ? summary : summary + "; " + c.failure_text()};
}

Query worked_refinement(const std::string& gpa, const std::string& activity) {
  return parse_query(
      "SELECT DISTINCT ID, Gender, Income FROM Students NATURAL JOIN Activities "
      "WHERE GPA >= " + gpa + " AND (Activity = 'RB' OR Activity = '" + activity +
      "') ORDER BY SAT DESC");
}

Outcome running_example_optimum() {
  Check c;
  Database db = testing::running_example();
  Query q = testing::scholarship_query();
  ConstraintSet cs = testing::running_constraints();
  EngineOptions eo;
  eo.distance.kind = DistanceKind::kPred;
  eo.epsilon = Rational(0);
  auto start = Clock::now();
  RefineResult r = refine(db, q, cs, eo);
  double secs = seconds_since(start);
  c.expect(r.status == RefineStatus::kRefined, "status " + std::string(to_string(r.status)));
  if (r.has_refinement) {
    auto exact = dis_pred_exact(q, r.refined);
    c.expect(exact && *exact == Rational(1, 2), "distance " + render_sql(r.refined));
    c.expect(r.refinement.cat_values["Activity"] == std::set<std::string>{"RB", "SO"},
             "Activity values");
    c.expect(r.refined.numeric_preds.at(0).constant == Decimal::parse("3.7"), "GPA constant");
    c.expect(r.deviation == Rational(0), "deviation " + r.deviation.to_string());
  }
  c.expect(secs < 5, "runtime " + std::to_string(secs) + " s");
  Annotation a = annotate(q, db);
  SearchResult ex = exhaustive_search(db, a, cs, eo.distance, eo.epsilon);
  c.expect(ex.found && std::abs(ex.distance - 0.5) < 1e-12, "exhaustive optimum");
  std::ostringstream os;
  os << "distance " << r.distance_value << ", " << render_sql(r.refined) << ", " << secs * 1000
     << " ms; exhaustive search agrees";
  return finish(c, os.str());
}

Outcome distance_fixtures() {
  Check c;
  Database db = testing::running_example();
  Query q = testing::scholarship_query();
  Query so = worked_refinement("3.7", "SO");
  Query gd = worked_refinement("3.6", "GD");
  Query mo = worked_refinement("3.6", "MO");
  c.expect(*dis_pred_exact(q, so) == Rational(1, 2), "pred(SO)");
  c.expect(*dis_pred_exact(q, gd) == Rational(1, 10) / Rational(37, 10) + Rational(1, 2),
           "pred(GD)");
  c.expect(std::abs(dis_pred(q, gd) - (0.1 / 3.7 + 0.5)) < 1e-9, "pred(GD) as double");
  Ranking base = evaluate(q, db);
  Ranking r_so = evaluate(so, db);
  Ranking r_gd = evaluate(gd, db);
  Ranking r_mo = evaluate(mo, db);
  c.expect(dis_jaccard(base, r_so, 3) == Rational(4, 5), "jaccard(SO)");
  c.expect(dis_jaccard(base, r_gd, 3) == Rational(1, 2), "jaccard(GD)");
  std::int64_t k_gd = dis_kendall(base, r_gd, 3);
  std::int64_t k_mo = dis_kendall(base, r_mo, 3);
  c.expect(k_gd > k_mo, "kendall order");
  std::ostringstream os;
  os << "pred " << dis_pred_exact(q, so)->to_string() << " and "
     << dis_pred_exact(q, gd)->to_string() << ", jaccard@3 " << dis_jaccard(base, r_so, 3).to_string()
     << " and " << dis_jaccard(base, r_gd, 3).to_string() << ", kendall@3 " << k_gd << " > " << k_mo;
  return finish(c, os.str());
}

Outcome no_perfect_refinement() {
  Check c;
  auto dir = testing::data_dir() / "no_perfect";
  Database db;
  db["Items"] = testing::load(dir / "items.csv", "Items");
  Query q = parse_query(testing::slurp(dir / "query.sql"));
  ConstraintSet cs = load_constraints(dir / "constraints.json");
  std::string seen;
  for (EngineKind e : {EngineKind::kMilp, EngineKind::kMilpOpt, EngineKind::kNaive,
                       EngineKind::kNaiveProv}) {
    EngineOptions eo;
    eo.engine = e;
    eo.epsilon = Rational(0);
    RefineResult r = refine(db, q, cs, eo);
    c.expect(r.status == RefineStatus::kNoRefinement,
             std::string(to_string(e)) + " returned " + to_string(r.status));
    seen += std::string(seen.empty() ? "" : ", ") + to_string(e) + " " + to_string(r.status);
  }
  return finish(c, seen);
}

// Criteria 4 to 6 share one pass over the random instances.
struct PropertyResults {
  Outcome oracle, neutrality, round_trip;
};

struct Variant {
  const char* name;
  bool prune, merge, relax;
};

PropertyResults property_suite() {
  constexpr int kInstances = 240;
  const Variant variants[] = {{"plain", false, false, false},
                              {"prune", true, false, false},
                              {"merge", false, true, false},
                              {"relax", false, false, true},
                              {"all", true, true, true}};
  Check oracle, neutral, trip;
  int solved = 0, infeasible = 0, prune_cases = 0;
  auto start = Clock::now();
  testing::Rng rng(8080);
  for (int round = 0; round < kInstances; ++round) {
    testing::Instance inst = testing::random_instance(rng);
    Annotation a = annotate(inst.query, inst.db);
    for (DistanceKind kind : {DistanceKind::kPred, DistanceKind::kJaccard, DistanceKind::kKendall}) {
      DistanceSpec dist{kind, 0, 1.0};
      std::string tag = inst.describe() + " kind=" + to_string(kind);
      SearchResult ref = exhaustive_search(inst.db, a, inst.constraints, dist, inst.epsilon);
      Ranking original = evaluate(inst.query, inst.db);
      std::map<std::string, int> encoded;
      std::map<std::string, double> optimum;
      for (const Variant& v : variants) {
        BuildOptions bo;
        bo.distance = dist;
        bo.epsilon = inst.epsilon;
        bo.relevancy_prune = v.prune;
        bo.merge_lineage = v.merge;
        bo.relax_single_type = v.relax;
        MilpBuild b = build_model(a, inst.constraints, bo);
        encoded[v.name] = static_cast<int>(b.encoded.size());
        Solution s = solve(b.model);
        bool found = s.status == SolveStatus::kOptimal;
        std::string vtag = tag + " variant=" + v.name;
        Check& target = std::string(v.name) == "all" ? oracle : neutral;
        target.expect(found == ref.found, "feasibility differs: " + vtag);
        if (!found || !ref.found) continue;
        Refinement r = extract_refinement(b, a, s.values);
        Query q2 = apply_refinement(inst.query, r);
        Ranking ranking = evaluate(q2, inst.db);
        double d = refinement_distance(inst.query, q2, original, ranking, dist,
                                       inst.constraints.k_star());
        optimum[v.name] = d;
        target.expect(std::abs(d - ref.distance) <= 1e-6,
                      "optimum " + std::to_string(d) + " vs " + std::to_string(ref.distance) +
                          ": " + vtag);
        Rational dev = deviation(ranking, a.joined, inst.constraints);
        oracle.expect(dev <= inst.epsilon, "deviation " + dev.to_string() + ": " + vtag);
        oracle.expect(static_cast<int>(ranking.size()) >= inst.constraints.k_star(),
                      "short output: " + vtag);

        // Model counts against the evaluated refinement.
        std::vector<int> actual = group_counts(ranking, a.joined, inst.constraints);
        std::vector<int> claimed = model_group_counts(b, s.values);
        double e_sum = 0;
        for (std::size_t i = 0; i < inst.constraints.constraints.size(); ++i) {
          const auto& c = inst.constraints.constraints[i];
          if (b.relaxed) {
            bool one_sided = c.sense == Sense::kLower ? claimed[i] <= actual[i]
                                                      : claimed[i] >= actual[i];
            trip.expect(one_sided, "relaxed count " + c.label() + ": " + vtag);
          } else {
            trip.expect(claimed[i] == actual[i],
                        "count " + c.label() + " model " + std::to_string(claimed[i]) +
                            " evaluated " + std::to_string(actual[i]) + ": " + vtag);
          }
          e_sum += s.values[b.deviation_vars[i]] / c.n;
        }
        double model_dev = e_sum / static_cast<double>(inst.constraints.constraints.size());
        trip.expect(dev.to_double() <= model_dev + 1e-9, "evaluated deviation above model: " + vtag);
        trip.expect(model_dev <= inst.epsilon.to_double() + 1e-9, "model deviation: " + vtag);
        if (std::string(v.name) == "all") ++solved;
      }
      if (!ref.found) ++infeasible;

      // Pruning must drop something once a class holds more than k*
      // distinct candidates.
      int horizon = inst.constraints.k_star();
      std::map<int, std::set<std::string>> keys;
      for (const auto& t : a.tuples) {
        keys[t.lineage_class].insert(
            inst.query.distinct ? distinct_key(a.row(t.id), a.joined.schema, a.distinct_attrs)
                                : std::to_string(t.id));
      }
      bool exceeds = false;
      for (const auto& [cls, k] : keys) exceeds |= static_cast<int>(k.size()) > horizon;
      if (exceeds) {
        ++prune_cases;
        neutral.expect(encoded["prune"] < encoded["plain"], "pruning removed nothing: " + tag);
      }
    }
  }
  double secs = seconds_since(start);
  oracle.expect(secs < 600, "suite took " + std::to_string(secs) + " s");
  oracle.expect(solved >= 200, "only " + std::to_string(solved) + " solved instances");

  PropertyResults out;
  std::ostringstream os;
  os << kInstances << " instances x 3 distances: " << solved << " refined, " << infeasible
     << " without refinement, all equal to exhaustive search; " << static_cast<int>(secs) << " s";
  out.oracle = finish(oracle, os.str());
  std::ostringstream ns;
  ns << "prune, merge and relax alone and together match the plain model; pruning shrank the "
        "model in all "
     << prune_cases << " cases with a class above k*";
  out.neutrality = finish(neutral, ns.str());
  out.round_trip = finish(trip, "model group counts equal evaluated counts on every solved model "
                                "(one-sided where relaxed); evaluated deviation <= model "
                                "deviation <= epsilon");
  return out;
}

Outcome solver_correctness() {
  Check c;
  testing::Rng rng(7070);
  int feasible_count = 0;
  int infeasible_count = 0;
  for (int round = 0; feasible_count < 100; ++round) {
    Model m = testing::random_milp(rng);
    bool feasible = false;
    double ref = testing::brute_force(m, feasible);
    Solution s = solve(m);
    std::string tag = "model " + std::to_string(round);
    if (!feasible) {
      c.expect(s.status == SolveStatus::kInfeasible, tag + " should be infeasible");
      ++infeasible_count;
      continue;
    }
    ++feasible_count;
    c.expect(s.status == SolveStatus::kOptimal, tag + " not solved");
    c.expect(std::abs(s.objective - ref) <= 1e-6,
             tag + ": " + std::to_string(s.objective) + " vs " + std::to_string(ref));
    Solution lp = solve_lp(m);
    c.expect(lp.status == SolveStatus::kOptimal && lp.objective <= ref + 1e-6,
             tag + ": relaxation above the integer optimum");
  }
  return finish(c, "100 feasible random MILPs match enumeration, relaxation never above the "
                   "optimum; " + std::to_string(infeasible_count) +
                       " infeasible ones reported infeasible");
}

Outcome bench_sanity() {
  Check c;
  auto suite = load_suite(testing::data_dir() / "bench" / "sanity");
  BenchOptions options;
  options.repeats = 1;
  auto start = Clock::now();
  std::vector<BenchRow> rows = run_suite(suite, options);
  double secs = seconds_since(start);
  c.expect(!rows.empty(), "no rows");
  // Keyed by scenario, engine and distance.
  std::map<std::string, std::map<std::string, std::vector<const BenchRow*>>> by_axis;
  for (const auto& r : rows) {
    c.expect(r.status == "refined",
             r.scenario + " " + r.axis + "=" + r.axis_value + " " + r.distance + ": " + r.status +
                 (r.error.empty() ? "" : " (" + r.error + ")"));
    by_axis[r.axis][r.scenario + "/" + r.engine + "/" + r.distance].push_back(&r);
  }
  std::set<std::string> axes;
  for (const auto& [axis, series] : by_axis) axes.insert(axis);
  for (const char* axis : {"k", "epsilon", "constraint_count", "constraint_type", "scale"}) {
    c.expect(axes.count(axis) > 0, std::string("no ") + axis + " sweep");
  }
  int series_count = 0;
  for (const auto& [key, series] : by_axis["constraint_count"]) {
    ++series_count;
    for (std::size_t i = 1; i < series.size(); ++i) {
      c.expect(series[i]->model.rows > series[i - 1]->model.rows,
               key + ": rows do not grow from " + series[i - 1]->axis_value + " to " +
                   series[i]->axis_value + " constraints");
    }
  }
  for (const auto& [key, series] : by_axis["epsilon"]) {
    ++series_count;
    for (std::size_t i = 1; i < series.size(); ++i) {
      c.expect(series[i]->point.epsilon > series[i - 1]->point.epsilon, key + ": epsilon order");
      c.expect(series[i]->distance_value <= series[i - 1]->distance_value + 1e-9,
               key + ": distance rises at epsilon " + series[i]->axis_value);
    }
  }
  for (const auto& suite_entry : suite) {
    for (const auto& sw : suite_entry.sweeps) {
      for (const auto& [key, series] : by_axis[sw.axis]) {
        if (key.rfind(suite_entry.name + "/", 0) != 0) continue;
        c.expect(series.size() == sw.values.size(), key + ": one row per " + sw.axis + " value");
      }
    }
  }
  std::ostringstream os;
  os << rows.size() << " rows over " << axes.size() - 1 << " sweep axes in "
     << static_cast<int>(secs) << " s; model rows grow with constraint count and distances never "
     << "rise with epsilon in " << series_count << " series";
  return finish(c, os.str());
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace
}  // namespace qref

int main() {
  using qref::Outcome;
  std::vector<std::pair<std::string, Outcome>> results;
  results.push_back({"running-example optimum", qref::guarded(qref::running_example_optimum)});
  results.push_back({"distance fixtures", qref::guarded(qref::distance_fixtures)});
  results.push_back({"infeasibility", qref::guarded(qref::no_perfect_refinement)});
  qref::PropertyResults props;
  try {
    props = qref::property_suite();
  } catch (const std::exception& e) {
    Outcome failed{false, std::string("exception: ") + e.what()};
    props = {failed, failed, failed};
  }
  results.push_back({"oracle equivalence", props.oracle});
  results.push_back({"optimization neutrality", props.neutrality});
  results.push_back({"count round trip", props.round_trip});
  results.push_back({"solver correctness", qref::guarded(qref::solver_correctness)});
  results.push_back({"bench sanity", qref::guarded(qref::bench_sanity)});

  int failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& [name, o] = results[i];
    failed += o.pass ? 0 : 1;
    std::printf("criterion %zu %s: %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.c_str());
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
