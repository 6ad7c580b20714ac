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

// Command-line front end: refine one query, or run a benchmark suite.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qref/bench.h"
#include "qref/engine.h"

namespace {

constexpr int kExitRefined = 0;
constexpr int kExitError = 1;
constexpr int kExitNoRefinement = 2;
constexpr int kExitTimeout = 3;

std::map<std::string, std::string> parse_pairs(const std::vector<std::string>& items,
                                               const char* flag) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw std::invalid_argument(std::string(flag) + " expects name=path, got '" + item + "'");
    }
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RefineArgs {
  std::vector<std::string> data;
  std::vector<std::string> schemas;
  std::string query;
  std::string constraints;
  std::string distance = "pred";
  int k = 0;
  double lambda = 1.0;
  std::string epsilon = "0.5";
  std::string engine = "milp+opt";
  bool no_prune = false;
  bool no_merge = false;
  bool no_relax = false;
  double timeout_s = 0;
  std::string out;
  std::string lp_dump;
};

int run_refine(const RefineArgs& args) {
  auto data = parse_pairs(args.data, "--data");
  auto schemas = parse_pairs(args.schemas, "--schema");
  qref::Database db;
  for (const auto& [name, path] : data) {
    auto s = schemas.find(name);
    qref::Schema schema =
        s == schemas.end() ? qref::infer_schema(path) : qref::load_schema_json(s->second);
    db[name] = qref::load_csv(path, schema, name);
  }
  for (const auto& [name, path] : schemas) {
    if (!data.count(name)) throw std::invalid_argument("--schema for unknown relation " + name);
  }
  qref::Query q = qref::parse_query(read_file(args.query));
  qref::ConstraintSet cs = qref::load_constraints(args.constraints);

  qref::EngineOptions o;
  o.engine = qref::parse_engine_kind(args.engine);
  o.distance.kind = qref::parse_distance_kind(args.distance);
  o.distance.k = args.k;
  o.distance.lambda = args.lambda;
  o.epsilon = qref::Rational::parse(args.epsilon);
  o.prune = !args.no_prune;
  o.merge = !args.no_merge;
  o.relax = !args.no_relax;
  o.timeout_s = args.timeout_s;
  o.lp_dump = args.lp_dump;

  qref::RefineResult r = qref::refine(db, q, cs, o);
  std::string report = qref::to_json(r).dump(2) + "\n";
  std::string sql = r.has_refinement ? qref::render_sql(r.refined) : "";
  if (args.out.empty()) {
    std::cout << report;
  } else {
    std::ofstream(args.out) << report;
    std::filesystem::path sql_path = args.out;
    sql_path.replace_extension(".sql");
    std::ofstream(sql_path) << sql << (sql.empty() ? "" : "\n");
    std::cout << (sql.empty() ? std::string(qref::to_string(r.status)) : sql) << "\n";
  }
  switch (r.status) {
    case qref::RefineStatus::kRefined: return kExitRefined;
    case qref::RefineStatus::kNoRefinement: return kExitNoRefinement;
    case qref::RefineStatus::kTimeout: return kExitTimeout;
  }
  return kExitError;
}

struct BenchArgs {
  std::string suite;
  int repeats = 5;
  bool parallel = false;
  double timeout_s = 0;
  std::string out = "bench.csv";
};

int run_bench(const BenchArgs& args) {
  qref::BenchOptions o;
  o.repeats = args.repeats;
  o.parallel = args.parallel;
  o.timeout_s = args.timeout_s;
  o.progress = [](const qref::BenchRow& r) {
    std::cerr << r.scenario << ' ' << r.axis << (r.axis_value.empty() ? "" : "=") << r.axis_value
              << ' ' << r.engine << ' ' << r.distance << ": " << r.status << ' ' << r.total_ms
              << " ms\n";
  };
  auto rows = qref::run_suite(qref::load_suite(args.suite), o);
  std::ofstream csv(args.out);
  if (!csv) throw std::runtime_error("cannot write " + args.out);
  qref::write_bench_csv(rows, csv);
  qref::write_bench_summary(rows, std::cout);
  for (const auto& r : rows) {
    if (r.status == "error") return kExitError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Top-k query refinement under cardinality constraints"};
  RefineArgs ra;
  app.add_option("--data", ra.data, "Relation as name=path.csv (repeatable)");
  app.add_option("--schema", ra.schemas, "Schema sidecar as name=path.json (repeatable)");
  app.add_option("--query", ra.query, "File holding the SQL query");
  app.add_option("--constraints", ra.constraints, "Constraint JSON file");
  app.add_option("--distance", ra.distance, "pred | jaccard | kendall | pred+kendall")
      ->capture_default_str();
  app.add_option("--k", ra.k, "Prefix for outcome distances (default: largest constraint k)");
  app.add_option("--lambda", ra.lambda, "Weight of the Kendall part of pred+kendall")
      ->capture_default_str();
  app.add_option("--epsilon", ra.epsilon, "Maximum deviation, decimal or fraction")
      ->capture_default_str();
  app.add_option("--engine", ra.engine, "milp | milp+opt | naive | naive+prov")
      ->capture_default_str();
  app.add_flag("--no-prune", ra.no_prune, "Disable relevancy pruning (milp+opt)");
  app.add_flag("--no-merge", ra.no_merge, "Disable lineage merging (milp+opt)");
  app.add_flag("--no-relax", ra.no_relax, "Disable single-type relaxation (milp+opt)");
  app.add_option("--timeout-s", ra.timeout_s, "Wall-clock limit, 0 for none");
  app.add_option("--out", ra.out, "Write the JSON report here and the refined SQL next to it");
  app.add_option("--lp-dump", ra.lp_dump, "Write the generated model in LP format");

  BenchArgs ba;
  CLI::App* bench = app.add_subcommand("bench", "Run a benchmark suite");
  bench->add_option("--suite", ba.suite, "Directory of scenario JSON files")->required();
  bench->add_option("--repeats", ba.repeats, "Timed runs per row")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_flag("--parallel", ba.parallel, "Run points concurrently (timings not comparable)");
  bench->add_option("--timeout-s", ba.timeout_s, "Override every scenario's timeout");
  bench->add_option("--out", ba.out, "CSV output path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (bench->parsed()) return run_bench(ba);
    if (ra.data.empty() || ra.query.empty() || ra.constraints.empty()) {
      std::cerr << "error: --data, --query and --constraints are required\n";
      return kExitError;
    }
    return run_refine(ra);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
