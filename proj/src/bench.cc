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

#include "qref/bench.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace qref {

namespace {

using nlohmann::json;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

Rational epsilon_from(const json& v) {
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  std::ostringstream os;
  os << std::setprecision(12) << v.get<double>();
  return Rational::parse(os.str());
}

ScenarioPoint point_from(const json& j, ScenarioPoint p) {
  if (j.contains("k")) p.k = j["k"].get<int>();
  if (j.contains("epsilon")) p.epsilon = epsilon_from(j["epsilon"]);
  if (j.contains("constraint_set")) p.constraint_set = j["constraint_set"].get<std::string>();
  if (j.contains("constraint_count")) p.constraint_count = j["constraint_count"].get<int>();
  if (j.contains("scale")) p.scale = j["scale"].get<double>();
  return p;
}

ScenarioPoint apply_axis(ScenarioPoint p, const std::string& axis, const json& v) {
  if (axis == "k") {
    p.k = v.get<int>();
  } else if (axis == "epsilon") {
    p.epsilon = epsilon_from(v);
  } else if (axis == "constraint_count") {
    p.constraint_count = v.get<int>();
  } else if (axis == "constraint_type") {
    p.constraint_set = v.get<std::string>();
  } else if (axis == "scale") {
    p.scale = v.get<double>();
  } else {
    throw ScenarioError("unknown sweep axis '" + axis + "'");
  }
  return p;
}

std::string value_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

struct Task {
  std::string axis;
  std::string axis_value;
  ScenarioPoint point;
};

struct Inputs {
  Database db;
  Query query;
};

BenchRow run_point(const Scenario& s, const Inputs& in, const Task& task, EngineKind engine,
                   DistanceKind distance, const BenchOptions& options) {
  BenchRow row;
  row.scenario = s.name;
  row.axis = task.axis;
  row.axis_value = task.axis_value;
  row.engine = to_string(engine);
  row.distance = to_string(distance);
  row.point = task.point;
  try {
    Database db = scale_database(in.db, task.point.scale, s.scaled);
    ConstraintSet cs = instantiate_constraints(s, task.point);
    EngineOptions eo;
    eo.engine = engine;
    eo.distance.kind = distance;
    eo.epsilon = task.point.epsilon;
    eo.timeout_s = options.timeout_s > 0 ? options.timeout_s : s.timeout_s;
    refine(db, in.query, cs, eo);  // warm-up
    for (int i = 0; i < options.repeats; ++i) {
      RefineResult r = refine(db, in.query, cs, eo);
      row.setup_ms += r.setup_ms;
      row.solve_ms += r.solve_ms;
      row.total_ms += r.total_ms;
      row.status = to_string(r.status);
      row.distance_value = r.distance_value;
      row.model = r.model;
      ++row.repeats;
    }
    if (row.repeats > 0) {
      row.setup_ms /= row.repeats;
      row.solve_ms /= row.repeats;
      row.total_ms /= row.repeats;
    }
  } catch (const std::exception& e) {
    row.status = "error";
    row.error = e.what();
  }
  return row;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
  json j = read_json(path);
  auto dir = path.parent_path();
  Scenario s;
  s.file = path;
  try {
    s.name = j.value("name", path.stem().string());
    for (const auto& [name, p] : j.at("data").items()) s.data[name] = dir / p.get<std::string>();
    if (j.contains("schemas")) {
      for (const auto& [name, p] : j["schemas"].items()) {
        s.schemas[name] = dir / p.get<std::string>();
      }
    }
    s.query = dir / j.at("query").get<std::string>();
    for (const auto& [name, list] : j.at("constraint_sets").items()) {
      auto& set = s.constraint_sets[name];
      for (const auto& c : list) {
        ScenarioConstraint sc;
        sc.group = c.at("group").get<std::map<std::string, std::string>>();
        std::string sense = c.at("sense").get<std::string>();
        if (sense != "lower" && sense != "upper") {
          throw ScenarioError("sense must be lower or upper, got '" + sense + "'");
        }
        sc.sense = sense == "lower" ? Sense::kLower : Sense::kUpper;
        sc.n_fraction = c.at("n_fraction").get<double>();
        set.push_back(sc);
      }
    }
    if (s.constraint_sets.empty()) throw ScenarioError("no constraint sets");
    ScenarioPoint d;
    d.constraint_set = s.constraint_sets.begin()->first;
    s.defaults = point_from(j.value("defaults", json::object()), d);
    if (j.contains("distances")) {
      s.distances.clear();
      for (const auto& v : j["distances"]) s.distances.push_back(parse_distance_kind(v));
    }
    if (j.contains("engines")) {
      s.engines.clear();
      for (const auto& v : j["engines"]) s.engines.push_back(parse_engine_kind(v));
    }
    for (const auto& sw : j.value("sweeps", json::array())) {
      Sweep sweep;
      sweep.axis = sw.at("axis").get<std::string>();
      for (const auto& v : sw.at("values")) sweep.values.push_back(v);
      sweep.base = point_from(sw.value("with", json::object()), s.defaults);
      for (const auto& v : sweep.values) apply_axis(sweep.base, sweep.axis, v);
      s.sweeps.push_back(std::move(sweep));
    }
    s.timeout_s = j.value("timeout_s", s.timeout_s);
    if (j.contains("scaled")) {
      for (const auto& v : j["scaled"]) {
        std::string name = v.get<std::string>();
        if (!s.data.count(name)) throw ScenarioError("scaled relation '" + name + "' has no data");
        s.scaled.insert(name);
      }
    }
  } catch (const json::exception& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  } catch (const DistanceError& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
  return s;
}

std::vector<Scenario> load_suite(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ScenarioError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Scenario> out;
  for (const auto& f : files) out.push_back(load_scenario(f));
  return out;
}

ConstraintSet instantiate_constraints(const Scenario& s, const ScenarioPoint& point) {
  auto it = s.constraint_sets.find(point.constraint_set);
  if (it == s.constraint_sets.end()) {
    throw ScenarioError("unknown constraint set '" + point.constraint_set + "'");
  }
  if (point.constraint_count < 1 ||
      point.constraint_count > static_cast<int>(it->second.size())) {
    throw ScenarioError("constraint set '" + point.constraint_set + "' has " +
                        std::to_string(it->second.size()) + " constraints, " +
                        std::to_string(point.constraint_count) + " requested");
  }
  ConstraintSet cs;
  for (int i = 0; i < point.constraint_count; ++i) {
    const ScenarioConstraint& sc = it->second[i];
    CardinalityConstraint c;
    c.group = sc.group;
    c.sense = sc.sense;
    c.k = point.k;
    c.n = std::max(1, static_cast<int>(std::floor(sc.n_fraction * point.k + 1e-9)));
    cs.constraints.push_back(c);
  }
  validate(cs);
  return cs;
}

Database scale_database(const Database& db, double scale, const std::set<std::string>& only) {
  if (!(scale > 0) || scale > 1) throw ScenarioError("scale must be in (0, 1]");
  if (scale == 1) return db;
  Database out = db;
  for (auto& [name, rel] : out) {
    if (!only.empty() && !only.count(name)) continue;
    auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(scale * rel.rows.size()));
    if (keep < rel.rows.size()) rel.rows.resize(keep);
  }
  return out;
}

std::vector<BenchRow> run_scenario(const Scenario& s, const BenchOptions& options) {
  std::vector<Task> tasks;
  tasks.push_back({"default", "", s.defaults});
  for (const auto& sw : s.sweeps) {
    for (const auto& v : sw.values) {
      tasks.push_back({sw.axis, value_text(v), apply_axis(sw.base, sw.axis, v)});
    }
  }

  std::vector<BenchRow> rows;
  Inputs in;
  try {
    for (const auto& [name, path] : s.data) {
      auto sp = s.schemas.find(name);
      Schema schema = sp == s.schemas.end() ? infer_schema(path) : load_schema_json(sp->second);
      in.db[name] = load_csv(path, schema, name);
    }
    std::ifstream qf(s.query);
    if (!qf) throw ScenarioError("cannot read " + s.query.string());
    std::stringstream qs;
    qs << qf.rdbuf();
    in.query = parse_query(qs.str());
  } catch (const std::exception& e) {
    BenchRow row;
    row.scenario = s.name;
    row.axis = "load";
    row.status = "error";
    row.error = e.what();
    if (options.progress) options.progress(row);
    return {row};
  }

  struct Job {
    const Task* task;
    EngineKind engine;
    DistanceKind distance;
  };
  std::vector<Job> jobs;
  for (const auto& t : tasks) {
    for (EngineKind e : s.engines) {
      for (DistanceKind d : s.distances) jobs.push_back({&t, e, d});
    }
  }
  if (options.parallel) {
    // One worker per hardware thread pulls jobs in order.
    rows.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex report;
    auto work = [&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        rows[i] = run_point(s, in, *jobs[i].task, jobs[i].engine, jobs[i].distance, options);
        if (options.progress) {
          std::lock_guard<std::mutex> lock(report);
          options.progress(rows[i]);
        }
      }
    };
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> futures;
    for (unsigned w = 0; w < workers; ++w) futures.push_back(std::async(std::launch::async, work));
    for (auto& f : futures) f.get();
  } else {
    for (const auto& j : jobs) {
      rows.push_back(run_point(s, in, *j.task, j.engine, j.distance, options));
      if (options.progress) options.progress(rows.back());
    }
  }
  return rows;
}

std::vector<BenchRow> run_suite(const std::vector<Scenario>& suite, const BenchOptions& options) {
  std::vector<BenchRow> rows;
  for (const auto& s : suite) {
    auto r = run_scenario(s, options);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "scenario,axis,axis_value,engine,distance,k,epsilon,constraint_set,constraint_count,"
         "scale,repeats,status,distance_value,setup_ms,solve_ms,total_ms,variables,rows,"
         "binaries,encoded_tuples,pruned_tuples,lineage_classes,error\n";
  for (const auto& r : rows) {
    out << csv_field(r.scenario) << ',' << r.axis << ',' << csv_field(r.axis_value) << ','
        << r.engine << ',' << r.distance << ',' << r.point.k << ','
        << r.point.epsilon.to_string() << ',' << csv_field(r.point.constraint_set) << ','
        << r.point.constraint_count << ',' << r.point.scale << ',' << r.repeats << ','
        << r.status << ',' << r.distance_value << ',' << r.setup_ms << ',' << r.solve_ms << ','
        << r.total_ms << ',' << r.model.variables << ',' << r.model.rows << ','
        << r.model.binaries << ',' << r.model.encoded_tuples << ',' << r.model.pruned_tuples
        << ',' << r.model.lineage_classes << ',' << csv_field(r.error) << '\n';
  }
}

void write_bench_summary(const std::vector<BenchRow>& rows, std::ostream& out) {
  auto axis_text = [](const BenchRow& r) {
    return r.axis == "default" || r.axis == "load" ? r.axis : r.axis + "=" + r.axis_value;
  };
  std::size_t sw = 10, aw = 12;
  for (const auto& r : rows) {
    sw = std::max(sw, r.scenario.size() + 2);
    aw = std::max(aw, axis_text(r).size() + 2);
  }
  out << std::left << std::setw(sw) << "scenario" << std::setw(aw) << "axis=value"
      << std::setw(10) << "engine" << std::setw(14) << "distance" << std::setw(15) << "status"
      << std::right << std::setw(11) << "setup_ms" << std::setw(11) << "solve_ms"
      << std::setw(11) << "total_ms" << std::setw(8) << "rows" << '\n';
  out << std::fixed << std::setprecision(2);
  for (const auto& r : rows) {
    out << std::left << std::setw(sw) << r.scenario << std::setw(aw) << axis_text(r)
        << std::setw(10) << r.engine << std::setw(14) << r.distance << std::setw(15) << r.status
        << std::right << std::setw(11) << r.setup_ms << std::setw(11) << r.solve_ms
        << std::setw(11) << r.total_ms << std::setw(8) << r.model.rows << '\n';
    if (!r.error.empty()) out << "  error: " << r.error << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

}  // namespace qref
