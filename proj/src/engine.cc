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

#include "qref/engine.h"

#include <chrono>
#include <fstream>

#include "qref/milp_build.h"
#include "qref/oracle.h"
#include "qref/solver.h"

namespace qref {

const char* to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::kMilp: return "milp";
    case EngineKind::kMilpOpt: return "milp+opt";
    case EngineKind::kNaive: return "naive";
    case EngineKind::kNaiveProv: return "naive+prov";
  }
  return "?";
}

EngineKind parse_engine_kind(const std::string& name) {
  if (name == "milp") return EngineKind::kMilp;
  if (name == "milp+opt") return EngineKind::kMilpOpt;
  if (name == "naive") return EngineKind::kNaive;
  if (name == "naive+prov") return EngineKind::kNaiveProv;
  throw std::invalid_argument("unknown engine '" + name + "'");
}

const char* to_string(RefineStatus status) {
  switch (status) {
    case RefineStatus::kRefined: return "refined";
    case RefineStatus::kNoRefinement: return "no_refinement";
    case RefineStatus::kTimeout: return "timeout";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

void fill_top(RefineResult& out, const Annotation& a, const ConstraintSet& cs,
              const Ranking& ranking) {
  int k = std::max(out.k_star, out.outcome_k);
  Ranking head = top(ranking, k);
  for (std::size_t i = 0; i < head.size(); ++i) {
    const Tuple& t = a.row(head[i]);
    TopEntry e;
    e.rank = static_cast<int>(i) + 1;
    e.tuple_id = head[i];
    for (std::size_t c = 0; c < a.joined.schema.size(); ++c) {
      e.values[a.joined.schema.at(c).name] = t.values[c].to_string();
    }
    for (const auto& c : cs.constraints) {
      if (c.contains(t, a.joined.schema)) e.groups.push_back(c.label());
    }
    out.top_k.push_back(std::move(e));
  }
}

void finish_refined(RefineResult& out, const Annotation& a, const ConstraintSet& cs,
                    const Refinement& r) {
  out.has_refinement = true;
  out.refinement = r;
  out.refined = apply_refinement(a.query, r);
  Ranking original = evaluate_with_provenance(a, a.query);
  Ranking ranking = evaluate_with_provenance(a, out.refined);
  out.deviation = deviation(ranking, a.joined, cs);
  out.distance_value =
      refinement_distance(a.query, out.refined, original, ranking, out.distance, out.k_star);
  fill_top(out, a, cs, ranking);
}

}  // namespace

RefineResult refine(const Database& db, const Query& q, const ConstraintSet& cs,
                    const EngineOptions& options) {
  auto start = Clock::now();
  RefineResult out;
  out.engine = options.engine;
  out.original = q;
  out.distance = options.distance;
  out.epsilon = options.epsilon;
  validate(cs);
  out.k_star = cs.k_star();
  out.outcome_k = options.distance.k > 0 ? options.distance.k : out.k_star;
  if (options.epsilon < Rational(0)) throw std::invalid_argument("epsilon must be non-negative");

  Annotation a = annotate(q, db);
  validate(cs, a.joined.schema);

  if (options.engine == EngineKind::kNaive || options.engine == EngineKind::kNaiveProv) {
    SearchOptions so;
    so.mode = options.engine == EngineKind::kNaive ? SearchMode::kNaive : SearchMode::kProvenance;
    so.max_candidates = options.max_candidates;
    so.timeout_s = options.timeout_s;
    out.setup_ms = ms_since(start);
    auto solve_start = Clock::now();
    SearchResult sr = exhaustive_search(db, a, cs, options.distance, options.epsilon, so);
    out.solve_ms = ms_since(solve_start);
    out.candidates = sr.evaluated;
    if (sr.timed_out) {
      out.status = RefineStatus::kTimeout;
    } else if (sr.found) {
      out.status = RefineStatus::kRefined;
      finish_refined(out, a, cs, sr.refinement);
    }
    out.total_ms = ms_since(start);
    return out;
  }

  BuildOptions bo;
  bo.distance = options.distance;
  bo.epsilon = options.epsilon;
  bo.position_delta = options.position_delta;
  bo.tighten = options.tighten;
  if (options.engine == EngineKind::kMilpOpt) {
    bo.relevancy_prune = options.prune;
    bo.merge_lineage = options.merge;
    bo.relax_single_type = options.relax;
  }
  MilpBuild build = build_model(a, cs, bo);
  out.model.variables = static_cast<int>(build.model.vars.size());
  out.model.rows = static_cast<int>(build.model.rows.size());
  out.model.binaries = build.model.binary_count();
  out.model.encoded_tuples = static_cast<int>(build.encoded.size());
  out.model.pruned_tuples = build.pruned_count;
  out.model.lineage_classes = build.lineage_classes;
  if (!options.lp_dump.empty()) {
    std::ofstream lp(options.lp_dump);
    if (!lp) throw std::runtime_error("cannot write " + options.lp_dump);
    write_lp(build.model, lp);
  }
  out.setup_ms = ms_since(start);

  SolverOptions so;
  so.timeout_s = options.timeout_s > 0 ? std::max(1e-3, options.timeout_s - out.setup_ms / 1000)
                                       : 0;
  so.branch_first = decision_vars(build);
  // The unrefined query seeds the incumbent when it is within epsilon.
  so.starts.push_back(decision_assignment(build, a, Refinement{}));
  auto solve_start = Clock::now();
  Solution sol = solve(build.model, so);
  out.solve_ms = ms_since(solve_start);
  out.nodes = sol.stats.nodes;
  out.lp_iterations = sol.stats.lp_iterations;

  if (sol.status == SolveStatus::kOptimal) {
    Refinement r = extract_refinement(build, a, sol.values);
    check_consistency(build, a, cs, options.epsilon, r, sol.values);
    out.status = RefineStatus::kRefined;
    finish_refined(out, a, cs, r);
  } else if (sol.status == SolveStatus::kTimeout || sol.status == SolveStatus::kNodeLimit) {
    out.status = RefineStatus::kTimeout;
    if (sol.has_solution) {
      Refinement r = extract_refinement(build, a, sol.values);
      check_consistency(build, a, cs, options.epsilon, r, sol.values);
      finish_refined(out, a, cs, r);
    }
  }
  out.total_ms = ms_since(start);
  return out;
}

nlohmann::json to_json(const RefineResult& r) {
  using nlohmann::json;
  json j;
  j["status"] = to_string(r.status);
  j["engine"] = to_string(r.engine);
  j["original_sql"] = render_sql(r.original);
  j["k_star"] = r.k_star;
  j["epsilon"] = {{"rational", r.epsilon.to_string()}, {"value", r.epsilon.to_double()}};
  if (r.has_refinement) {
    j["refined_sql"] = render_sql(r.refined);
    json ref = json::object();
    json num = json::object();
    for (const auto& [key, c] : r.refinement.numeric_constants) {
      num[key.first + " " + to_string(key.second)] = c.to_string();
    }
    json cat = json::object();
    for (const auto& [attr, values] : r.refinement.cat_values) cat[attr] = values;
    ref["numeric"] = num;
    ref["categorical"] = cat;
    j["refinement"] = ref;
    json dist = {{"kind", to_string(r.distance.kind)}, {"value", r.distance_value}};
    if (is_outcome(r.distance.kind)) dist["k"] = r.outcome_k;
    if (r.distance.kind == DistanceKind::kPredKendall) dist["lambda"] = r.distance.lambda;
    j["distance"] = dist;
    j["deviation"] = {{"rational", r.deviation.to_string()}, {"value", r.deviation.to_double()}};
    json top = json::array();
    for (const auto& e : r.top_k) {
      top.push_back({{"rank", e.rank}, {"tuple_id", e.tuple_id}, {"values", e.values},
                     {"groups", e.groups}});
    }
    j["top_k"] = top;
  } else {
    j["refined_sql"] = nullptr;
  }
  if (r.engine == EngineKind::kMilp || r.engine == EngineKind::kMilpOpt) {
    j["model"] = {{"variables", r.model.variables},
                  {"rows", r.model.rows},
                  {"binaries", r.model.binaries},
                  {"encoded_tuples", r.model.encoded_tuples},
                  {"pruned_tuples", r.model.pruned_tuples},
                  {"lineage_classes", r.model.lineage_classes}};
    j["solver"] = {{"nodes", r.nodes}, {"lp_iterations", r.lp_iterations}};
  } else {
    j["search"] = {{"candidates", r.candidates}};
  }
  j["timing_ms"] = {{"setup", r.setup_ms}, {"solve", r.solve_ms}, {"total", r.total_ms}};
  return j;
}

}  // namespace qref
