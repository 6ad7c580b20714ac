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

#include "qref/solver.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <list>
#include <memory>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace qref {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kTimeout: return "timeout";
    case SolveStatus::kNodeLimit: return "node_limit";
  }
  return "?";
}

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr int kRefactorEvery = 100;
constexpr int kDegenerateLimit = 50;
constexpr double kPerturbation = 1e-6;
constexpr double kMinWeight = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

// Dense copy of the model in equality form A x + s = b, where each row's
// slack carries finite implied bounds (every structural is bounded).
struct LpData {
  int m = 0;
  int n = 0;
  std::vector<double> a;  // m x n
  std::vector<double> b;
  std::vector<double> c;  // n + m, zero on slacks
  std::vector<double> slack_lo;
  std::vector<double> slack_up;
};

std::shared_ptr<const LpData> make_data(const Model& model) {
  auto d = std::make_shared<LpData>();
  d->m = static_cast<int>(model.rows.size());
  d->n = static_cast<int>(model.vars.size());
  d->a.assign(static_cast<std::size_t>(d->m) * d->n, 0.0);
  d->c.assign(d->n + d->m, 0.0);
  for (const auto& t : model.objective) d->c[t.var] += t.coef;
  for (int i = 0; i < d->m; ++i) {
    const Row& row = model.rows[i];
    double minact = 0;
    double maxact = 0;
    for (const auto& t : row.terms) {
      d->a[static_cast<std::size_t>(i) * d->n + t.var] += t.coef;
      const Variable& v = model.vars[t.var];
      minact += t.coef > 0 ? t.coef * v.lower : t.coef * v.upper;
      maxact += t.coef > 0 ? t.coef * v.upper : t.coef * v.lower;
    }
    d->b.push_back(row.rhs);
    // s = b - a.x lies in [b - maxact, b - minact]; widened by 1 for safety.
    double lo = row.rhs - maxact - 1;
    double hi = row.rhs - minact + 1;
    switch (row.sense) {
      case RowSense::kLe:
        d->slack_lo.push_back(0);
        d->slack_up.push_back(std::max(0.0, hi));
        break;
      case RowSense::kGe:
        d->slack_lo.push_back(std::min(0.0, lo));
        d->slack_up.push_back(0);
        break;
      case RowSense::kEq:
        d->slack_lo.push_back(0);
        d->slack_up.push_back(0);
        break;
    }
  }
  return d;
}

// Bounded dual simplex over a dense tableau. Every variable has finite
// bounds, so a dual feasible start is obtained by placing each nonbasic
// variable at the bound matching the sign of its reduced cost.
class DualSimplex {
 public:
  enum class Result { kOptimal, kInfeasible, kIterationLimit, kAborted };

  explicit DualSimplex(std::shared_ptr<const LpData> data)
      : data_(std::move(data)),
        m_(data_->m),
        n_(data_->n),
        cols_(data_->n + data_->m),
        stride_(cols_ + 1) {
    lo_.assign(cols_, 0);
    up_.assign(cols_, 0);
    for (int i = 0; i < m_; ++i) {
      lo_[n_ + i] = data_->slack_lo[i];
      up_[n_ + i] = data_->slack_up[i];
    }
    x_.assign(cols_, 0);
    cost_ = data_->c;
    slack_basis();
  }

  // Shifts the cost of every nonbasic variable by a small amount in the
  // direction its bound already satisfies, which breaks dual degeneracy
  // without losing dual feasibility.
  void perturb(std::uint64_t seed) {
    for (int j = 0; j < cols_; ++j) {
      if (row_of_[j] >= 0 || lo_[j] == up_[j]) continue;
      seed += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = seed;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      z ^= z >> 31;
      double u = static_cast<double>(z >> 11) / 9007199254740992.0;
      double shift = (1 + u) * kPerturbation * (1 + std::abs(data_->c[j]));
      if (x_[j] == up_[j]) shift = -shift;
      cost_[j] += shift;
      d_[j] += shift;
    }
  }

  // Back to the true costs; reduced costs are recomputed from the tableau.
  void restore_costs() {
    cost_ = data_->c;
    for (int j = 0; j < cols_; ++j) {
      if (row_of_[j] >= 0) {
        d_[j] = 0;
        continue;
      }
      double s = cost_[j];
      for (int i = 0; i < m_; ++i) {
        double a = at(i, j);
        if (a != 0) s -= cost_[basis_[i]] * a;
      }
      d_[j] = s;
    }
  }

  // Installs structural bounds. False if a pair is crossed.
  bool set_bounds(const std::vector<double>& lo, const std::vector<double>& up) {
    for (int j = 0; j < n_; ++j) {
      if (lo[j] > up[j] + 1e-9) return false;
      lo_[j] = lo[j];
      up_[j] = std::max(lo[j], up[j]);
    }
    for (int j = 0; j < cols_; ++j) {
      if (row_of_[j] < 0) place(j);
    }
    recompute_basics();
    return true;
  }

  Result run(std::int64_t max_iters, std::int64_t& iterations, Clock::time_point deadline,
             bool has_deadline) {
    bool bland = false;
    int degenerate = 0;
    int since_refactor = 0;
    for (std::int64_t it = 0;; ++it) {
      if (it >= max_iters) return Result::kIterationLimit;
      if (has_deadline && (it & 63) == 0 && Clock::now() > deadline) return Result::kAborted;
      if (since_refactor >= kRefactorEvery) {
        refactor();
        since_refactor = 0;
      }
      repair_dual();
      int r = leaving_row(bland);
      if (r < 0) return Result::kOptimal;
      int q = entering(r, bland);
      if (q < 0) return Result::kInfeasible;
      double theta = pivot(r, q);
      ++iterations;
      ++since_refactor;
      if (std::abs(theta) <= 1e-12) {
        if (++degenerate > kDegenerateLimit) bland = true;
      } else {
        degenerate = 0;
      }
    }
  }

  // Recomputes the tableau from the original data for the current basis.
  void refactor() {
    std::vector<double> mtx(static_cast<std::size_t>(m_) * stride_, 0.0);
    for (int i = 0; i < m_; ++i) {
      double* row = &mtx[static_cast<std::size_t>(i) * stride_];
      for (int j = 0; j < n_; ++j) row[j] = data_->a[static_cast<std::size_t>(i) * n_ + j];
      row[n_ + i] = 1.0;
      row[cols_] = data_->b[i];
    }
    std::vector<int> new_basis(m_, -1);
    std::vector<char> assigned(m_, 0);
    for (int v : basis_) {
      int best = -1;
      double best_abs = 1e-11;
      for (int i = 0; i < m_; ++i) {
        if (assigned[i]) continue;
        double a = std::abs(mtx[static_cast<std::size_t>(i) * stride_ + v]);
        if (a > best_abs) {
          best_abs = a;
          best = i;
        }
      }
      if (best < 0) {
        // Numerically singular basis: restart from the slack basis.
        slack_basis();
        return;
      }
      eliminate(mtx, best, v);
      assigned[best] = 1;
      new_basis[best] = v;
    }
    tab_ = std::move(mtx);
    basis_ = std::move(new_basis);
    std::fill(row_of_.begin(), row_of_.end(), -1);
    for (int i = 0; i < m_; ++i) row_of_[basis_[i]] = i;
    for (int j = 0; j < cols_; ++j) {
      if (row_of_[j] >= 0) {
        d_[j] = 0;
        continue;
      }
      double s = cost_[j];
      for (int i = 0; i < m_; ++i) s -= cost_[basis_[i]] * at(i, j);
      d_[j] = s;
    }
    for (int j = 0; j < cols_; ++j) {
      if (row_of_[j] < 0) place(j);
    }
    recompute_basics();
    compute_weights();
  }

  double objective() const {
    double s = 0;
    for (int j = 0; j < n_; ++j) s += data_->c[j] * x_[j];
    return s;
  }

  std::vector<double> structural_values() const {
    std::vector<double> out(x_.begin(), x_.begin() + n_);
    for (int j = 0; j < n_; ++j) out[j] = std::clamp(out[j], lo_[j], up_[j]);
    return out;
  }

  std::size_t footprint() const { return tab_.size() * sizeof(double); }

 private:
  double& at(int i, int j) { return tab_[static_cast<std::size_t>(i) * stride_ + j]; }
  double at(int i, int j) const { return tab_[static_cast<std::size_t>(i) * stride_ + j]; }

  void slack_basis() {
    tab_.assign(static_cast<std::size_t>(m_) * stride_, 0.0);
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) at(i, j) = data_->a[static_cast<std::size_t>(i) * n_ + j];
      at(i, n_ + i) = 1.0;
      at(i, cols_) = data_->b[i];
    }
    basis_.resize(m_);
    row_of_.assign(cols_, -1);
    for (int i = 0; i < m_; ++i) {
      basis_[i] = n_ + i;
      row_of_[n_ + i] = i;
    }
    d_ = cost_;
    for (int j = 0; j < cols_; ++j) {
      if (row_of_[j] < 0) place(j);
    }
    recompute_basics();
    compute_weights();
  }

  void eliminate(std::vector<double>& mtx, int r, int q) {
    double* prow = &mtx[static_cast<std::size_t>(r) * stride_];
    double inv = 1.0 / prow[q];
    std::vector<int> nz;
    for (int j = 0; j < stride_; ++j) {
      if (prow[j] != 0) {
        prow[j] *= inv;
        nz.push_back(j);
      }
    }
    prow[q] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &mtx[static_cast<std::size_t>(i) * stride_];
      double f = row[q];
      if (f == 0) continue;
      for (int j : nz) row[j] -= f * prow[j];
      row[q] = 0.0;
    }
  }

  // Nonbasic variable to the bound its reduced cost prefers.
  void place(int j) {
    if (d_[j] > 0) x_[j] = lo_[j];
    else if (d_[j] < 0) x_[j] = up_[j];
    else x_[j] = (x_[j] == up_[j]) ? up_[j] : lo_[j];
  }

  // Squared norms of the rows of the basis inverse, which sit in the slack
  // columns of the tableau.
  void compute_weights() {
    w_.assign(m_, 0);
    for (int i = 0; i < m_; ++i) {
      const double* row = &tab_[static_cast<std::size_t>(i) * stride_];
      double s = 0;
      for (int j = n_; j < cols_; ++j) s += row[j] * row[j];
      w_[i] = std::max(s, kMinWeight);
    }
  }

  void recompute_basics() {
    for (int i = 0; i < m_; ++i) {
      double s = at(i, cols_);
      const double* row = &tab_[static_cast<std::size_t>(i) * stride_];
      for (int j = 0; j < cols_; ++j) {
        if (row_of_[j] < 0 && row[j] != 0) s -= row[j] * x_[j];
      }
      x_[basis_[i]] = s;
    }
  }

  // Flips nonbasic variables whose reduced cost sign drifted.
  void repair_dual() {
    for (int j = 0; j < cols_; ++j) {
      if (row_of_[j] >= 0 || lo_[j] == up_[j]) continue;
      double target = x_[j];
      if (d_[j] < -kDualTol && x_[j] != up_[j]) target = up_[j];
      else if (d_[j] > kDualTol && x_[j] != lo_[j]) target = lo_[j];
      if (target == x_[j]) continue;
      double delta = target - x_[j];
      x_[j] = target;
      for (int i = 0; i < m_; ++i) x_[basis_[i]] -= at(i, j) * delta;
    }
  }

  int leaving_row(bool bland) const {
    int best = -1;
    double worst = 0;
    int best_var = std::numeric_limits<int>::max();
    for (int i = 0; i < m_; ++i) {
      int v = basis_[i];
      double infeas = std::max(lo_[v] - x_[v], x_[v] - up_[v]);
      if (infeas <= kPrimalTol * (1 + std::abs(x_[v]) * 1e-3)) continue;
      if (bland) {
        if (v < best_var) {
          best_var = v;
          best = i;
        }
      } else if (infeas * infeas / w_[i] > worst) {
        // Dual steepest edge.
        worst = infeas * infeas / w_[i];
        best = i;
      }
    }
    return best;
  }

  int entering(int r, bool bland) const {
    int p = basis_[r];
    bool raise = x_[p] < lo_[p];
    const double* row = &tab_[static_cast<std::size_t>(r) * stride_];
    auto eligible = [&](int j) {
      if (row_of_[j] >= 0 || lo_[j] == up_[j]) return false;
      double a = row[j];
      if (std::abs(a) <= kPivotTol) return false;
      bool at_lower = x_[j] != up_[j];
      // x_B[r] moves by -a per unit increase of x_j.
      if (raise) return at_lower ? a < 0 : a > 0;
      return at_lower ? a > 0 : a < 0;
    };
    if (bland) {
      int best = -1;
      double best_ratio = kInf;
      for (int j = 0; j < cols_; ++j) {
        if (!eligible(j)) continue;
        double ratio = std::abs(d_[j]) / std::abs(row[j]);
        if (ratio < best_ratio - 1e-12) {
          best_ratio = ratio;
          best = j;
        }
      }
      return best;
    }
    // Harris two-pass ratio test.
    double bound = kInf;
    for (int j = 0; j < cols_; ++j) {
      if (!eligible(j)) continue;
      bound = std::min(bound, (std::abs(d_[j]) + kDualTol) / std::abs(row[j]));
    }
    if (bound == kInf) return -1;
    int best = -1;
    double best_abs = 0;
    for (int j = 0; j < cols_; ++j) {
      if (!eligible(j)) continue;
      if (std::abs(d_[j]) / std::abs(row[j]) > bound) continue;
      if (std::abs(row[j]) > best_abs) {
        best_abs = std::abs(row[j]);
        best = j;
      }
    }
    return best;
  }

  // Returns the dual step length.
  double pivot(int r, int q) {
    int p = basis_[r];
    double alpha = at(r, q);
    double target = x_[p] < lo_[p] ? lo_[p] : up_[p];
    double delta = (x_[p] - target) / alpha;
    double theta = d_[q] / alpha;

    const double* prow = &tab_[static_cast<std::size_t>(r) * stride_];
    if (theta != 0) {
      for (int j = 0; j < cols_; ++j) {
        if (prow[j] != 0) d_[j] -= theta * prow[j];
      }
    }
    d_[q] = 0;

    x_[q] += delta;
    for (int i = 0; i < m_; ++i) {
      if (i != r) x_[basis_[i]] -= at(i, q) * delta;
    }
    x_[p] = target;

    std::vector<double> tmp(tab_.begin() + static_cast<std::ptrdiff_t>(r) * stride_,
                            tab_.begin() + static_cast<std::ptrdiff_t>(r + 1) * stride_);
    std::vector<std::size_t> nz;
    double inv = 1.0 / alpha;
    for (int j = 0; j < stride_; ++j) {
      if (tmp[j] != 0) {
        tmp[j] *= inv;
        nz.push_back(j);
      }
    }
    tmp[q] = 1.0;
    double pp = 0;
    for (std::size_t j : nz) {
      if (j >= static_cast<std::size_t>(n_) && j < static_cast<std::size_t>(cols_)) pp += tmp[j] * tmp[j];
    }
    for (int i = 0; i < m_; ++i) {
      double* row = &tab_[static_cast<std::size_t>(i) * stride_];
      if (i == r) {
        std::copy(tmp.begin(), tmp.end(), row);
        w_[i] = std::max(pp, kMinWeight);
        continue;
      }
      double f = row[q];
      if (f == 0) continue;
      double dot = 0;
      for (std::size_t j : nz) {
        if (j >= static_cast<std::size_t>(n_) && j < static_cast<std::size_t>(cols_)) dot += row[j] * tmp[j];
        row[j] -= f * tmp[j];
      }
      row[q] = 0.0;
      w_[i] = std::max(w_[i] - 2 * f * dot + f * f * pp, kMinWeight);
    }
    basis_[r] = q;
    row_of_[q] = r;
    row_of_[p] = -1;
    return theta;
  }

  std::shared_ptr<const LpData> data_;
  int m_, n_, cols_, stride_;
  std::vector<double> tab_;
  std::vector<int> basis_;
  std::vector<int> row_of_;
  std::vector<double> x_, d_, lo_, up_;
  std::vector<double> cost_;
  std::vector<double> w_;
};

struct LpOutcome {
  bool feasible = false;
  bool aborted = false;
  double objective = 0;
  std::vector<double> x;
};

// Runs the simplex from `state`, re-factoring when the answer does not check
// out against the original rows.
LpOutcome run_lp(DualSimplex& state, const Model& model, std::int64_t& iterations,
                 Clock::time_point deadline, bool has_deadline) {
  std::int64_t limit = 50LL * (static_cast<std::int64_t>(model.rows.size()) + model.vars.size()) +
                       10000;
  LpOutcome out;
  for (int attempt = 0; attempt < 3; ++attempt) {
    // Solve with perturbed costs first, then finish from that basis with the
    // true ones.
    state.perturb(static_cast<std::uint64_t>(iterations) + attempt);
    auto res = state.run(limit, iterations, deadline, has_deadline);
    state.restore_costs();
    if (res == DualSimplex::Result::kOptimal) {
      res = state.run(limit, iterations, deadline, has_deadline);
    }
    if (res == DualSimplex::Result::kAborted) {
      out.aborted = true;
      return out;
    }
    if (res == DualSimplex::Result::kIterationLimit) {
      state.refactor();
      continue;
    }
    if (res == DualSimplex::Result::kInfeasible) {
      if (attempt == 0) {
        // Confirm on a fresh factorization before trusting it.
        state.refactor();
        continue;
      }
      return out;
    }
    std::vector<double> x = state.structural_values();
    double worst = 0;
    for (const auto& row : model.rows) {
      double a = model.row_activity(row, x);
      // Relative to the row's magnitude at x: a big-M row absorbs the
      // clamping of its variables into their bounds.
      double scale = 1 + std::abs(row.rhs);
      for (const auto& t : row.terms) scale += std::abs(t.coef * x[t.var]);
      if (row.sense != RowSense::kGe) worst = std::max(worst, (a - row.rhs) / scale);
      if (row.sense != RowSense::kLe) worst = std::max(worst, (row.rhs - a) / scale);
    }
    if (worst <= 1e-7) {
      out.feasible = true;
      out.x = std::move(x);
      out.objective = model.objective_value(out.x);
      return out;
    }
    state.refactor();
  }
  throw std::runtime_error("LP solver failed to converge");
}

// Activity-based bound tightening with integer rounding on binaries.
bool propagate(const Model& model, std::vector<double>& lo, std::vector<double>& up) {
  constexpr double kInfeasTol = 1e-6;
  for (int pass = 0; pass < 20; ++pass) {
    bool changed = false;
    for (const auto& row : model.rows) {
      double minact = 0;
      double maxact = 0;
      for (const auto& t : row.terms) {
        minact += t.coef > 0 ? t.coef * lo[t.var] : t.coef * up[t.var];
        maxact += t.coef > 0 ? t.coef * up[t.var] : t.coef * lo[t.var];
      }
      bool le = row.sense != RowSense::kGe;
      bool ge = row.sense != RowSense::kLe;
      double tol = kInfeasTol * (1 + std::abs(row.rhs));
      if (le && minact > row.rhs + tol) return false;
      if (ge && maxact < row.rhs - tol) return false;
      for (const auto& t : row.terms) {
        int j = t.var;
        bool binary = model.vars[j].type == VarType::kBinary;
        double cmin = t.coef > 0 ? t.coef * lo[j] : t.coef * up[j];
        double cmax = t.coef > 0 ? t.coef * up[j] : t.coef * lo[j];
        auto tighten = [&](double bound, bool is_upper) {
          if (binary) {
            bound = is_upper ? std::floor(bound + 1e-6) : std::ceil(bound - 1e-6);
          } else {
            bound += (is_upper ? 1 : -1) * 1e-9 * (1 + std::abs(bound));
          }
          double& cur = is_upper ? up[j] : lo[j];
          double gain = is_upper ? cur - bound : bound - cur;
          if (gain > (binary ? 0.5 : 1e-6 * (1 + std::abs(cur)))) {
            cur = bound;
            changed = true;
          }
        };
        if (le) {
          double room = row.rhs - (minact - cmin);
          if (t.coef > 0) tighten(room / t.coef, true);
          else tighten(room / t.coef, false);
        }
        if (ge) {
          double need = row.rhs - (maxact - cmax);
          if (t.coef > 0) tighten(need / t.coef, false);
          else tighten(need / t.coef, true);
        }
        if (lo[j] > up[j] + kInfeasTol * (1 + std::abs(up[j]))) return false;
        if (lo[j] > up[j]) lo[j] = up[j];
      }
    }
    if (!changed) break;
  }
  return true;
}

class StateCache {
 public:
  explicit StateCache(std::size_t capacity) : capacity_(capacity) {}

  std::shared_ptr<DualSimplex> get(std::int64_t id) {
    auto it = map_.find(id);
    if (it == map_.end()) return nullptr;
    order_.splice(order_.begin(), order_, it->second.second);
    return it->second.first;
  }

  void put(std::int64_t id, std::shared_ptr<DualSimplex> state) {
    if (capacity_ == 0) return;
    order_.push_front(id);
    map_[id] = {std::move(state), order_.begin()};
    while (map_.size() > capacity_) {
      map_.erase(order_.back());
      order_.pop_back();
    }
  }

 private:
  std::size_t capacity_;
  std::list<std::int64_t> order_;
  std::unordered_map<std::int64_t,
                     std::pair<std::shared_ptr<DualSimplex>, std::list<std::int64_t>::iterator>>
      map_;
};

struct Node {
  std::int64_t id = 0;
  std::int64_t parent = -1;
  double bound = 0;
  std::vector<double> lo;
  std::vector<double> up;
};

struct NodeOrder {
  bool operator()(const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) const {
    if (a->bound != b->bound) return a->bound > b->bound;
    // Newest first among equal bounds, so the search dives.
    return a->id < b->id;
  }
};

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

Solution solve_lp(const Model& model, const SolverOptions& options) {
  model.validate();
  auto start = Clock::now();
  Solution sol;
  auto data = make_data(model);
  DualSimplex state(data);
  std::vector<double> lo, up;
  for (const auto& v : model.vars) {
    lo.push_back(v.lower);
    up.push_back(v.upper);
  }
  bool has_deadline = options.timeout_s > 0;
  auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(options.timeout_s));
  if (state.set_bounds(lo, up)) {
    LpOutcome lp = run_lp(state, model, sol.stats.lp_iterations, deadline, has_deadline);
    if (lp.aborted) {
      sol.status = SolveStatus::kTimeout;
    } else if (lp.feasible) {
      sol.status = SolveStatus::kOptimal;
      sol.has_solution = true;
      sol.values = std::move(lp.x);
      sol.objective = lp.objective;
      sol.best_bound = lp.objective;
    }
  }
  sol.stats.wall_ms = elapsed_ms(start);
  return sol;
}

Solution solve(const Model& model, const SolverOptions& options) {
  model.validate();
  auto start = Clock::now();
  bool has_deadline = options.timeout_s > 0;
  auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(options.timeout_s));
  Solution sol;
  auto data = make_data(model);
  const int n = static_cast<int>(model.vars.size());

  std::vector<double> root_lo, root_up;
  for (const auto& v : model.vars) {
    root_lo.push_back(v.lower);
    root_up.push_back(v.upper);
  }
  auto finish = [&](SolveStatus status) {
    sol.status = status;
    sol.stats.wall_ms = elapsed_ms(start);
    return sol;
  };
  if (options.propagate && !propagate(model, root_lo, root_up)) return finish(SolveStatus::kInfeasible);

  auto root_state = std::make_shared<DualSimplex>(data);
  std::size_t per_state = static_cast<std::size_t>(data->m) * (data->n + data->m + 1) * 8 + 1;
  StateCache cache(std::clamp<std::size_t>((256u << 20) / per_state, 1, 64));

  double incumbent = std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  std::set<std::vector<char>> tried_roundings;

  auto consider = [&](const std::vector<double>& x) {
    std::vector<double> y = x;
    for (int j = 0; j < n; ++j) {
      if (model.vars[j].type == VarType::kBinary) y[j] = std::round(y[j]);
    }
    if (model.max_violation(y) > options.feasibility_tol) return;
    double obj = model.objective_value(y);
    if (obj < incumbent - options.objective_tol) {
      incumbent = obj;
      best_x = std::move(y);
    }
  };

  std::vector<char> first(n, 0);
  for (int j : options.branch_first) {
    if (j >= 0 && j < n && model.vars[j].type == VarType::kBinary) first[j] = 1;
  }
  auto fractional_var = [&](const std::vector<double>& x) {
    int best = -1;
    double best_frac = options.integrality_tol;
    bool best_first = false;
    for (int j = 0; j < n; ++j) {
      if (model.vars[j].type != VarType::kBinary) continue;
      double f = std::min(x[j] - std::floor(x[j]), std::ceil(x[j]) - x[j]);
      if (f <= options.integrality_tol) continue;
      bool is_first = first[j];
      if (best < 0 || (is_first && !best_first) || (is_first == best_first && f > best_frac)) {
        best_frac = f;
        best = j;
        best_first = is_first;
      }
    }
    return best;
  };

  // Fixes the given bounds, then solves the LP; binaries the LP leaves
  // fractional are rounded and fixed for one more pass.
  auto complete = [&](const DualSimplex& from, std::vector<double> lo, std::vector<double> up) {
    for (int pass = 0; pass < 2; ++pass) {
      if (options.propagate && !propagate(model, lo, up)) return;
      DualSimplex trial(from);
      if (!trial.set_bounds(lo, up)) return;
      LpOutcome h = run_lp(trial, model, sol.stats.lp_iterations, deadline, has_deadline);
      if (!h.feasible) return;
      if (fractional_var(h.x) < 0 || pass == 1) {
        consider(h.x);
        return;
      }
      for (int j = 0; j < n; ++j) {
        if (model.vars[j].type == VarType::kBinary) lo[j] = up[j] = std::round(h.x[j]);
      }
    }
  };

  for (const auto& start_values : options.starts) {
    std::vector<double> lo = root_lo, up = root_up;
    bool ok = true;
    for (const auto& [j, v] : start_values) {
      if (j < 0 || j >= n || v < lo[j] - 1e-9 || v > up[j] + 1e-9) {
        ok = false;
        break;
      }
      lo[j] = up[j] = v;
    }
    if (ok) complete(*root_state, lo, up);
  }

  std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, NodeOrder> open;
  std::int64_t next_id = 0;
  auto root = std::make_shared<Node>();
  root->id = next_id++;
  root->bound = -std::numeric_limits<double>::infinity();
  root->lo = root_lo;
  root->up = root_up;
  open.push(root);
  bool root_done = false;

  while (!open.empty()) {
    if (has_deadline && Clock::now() > deadline) {
      sol.best_bound = open.top()->bound;
      if (!best_x.empty()) sol.has_solution = true;
      sol.values = best_x;
      sol.objective = incumbent;
      return finish(SolveStatus::kTimeout);
    }
    if (options.node_limit > 0 && sol.stats.nodes >= options.node_limit) {
      sol.best_bound = open.top()->bound;
      if (!best_x.empty()) sol.has_solution = true;
      sol.values = best_x;
      sol.objective = incumbent;
      return finish(SolveStatus::kNodeLimit);
    }
    auto node = open.top();
    open.pop();
    if (node->bound >= incumbent - options.objective_tol) continue;
    ++sol.stats.nodes;
    if (options.record_bounds) sol.stats.bound_trace.push_back(node->bound);

    std::shared_ptr<DualSimplex> state;
    if (!root_done) {
      state = root_state;
    } else if (auto cached = cache.get(node->parent)) {
      state = std::make_shared<DualSimplex>(*cached);
    } else {
      state = std::make_shared<DualSimplex>(*root_state);
    }
    if (!state->set_bounds(node->lo, node->up)) continue;
    LpOutcome lp = run_lp(*state, model, sol.stats.lp_iterations, deadline, has_deadline);
    if (lp.aborted) {
      sol.best_bound = node->bound;
      if (!best_x.empty()) sol.has_solution = true;
      sol.values = best_x;
      sol.objective = incumbent;
      return finish(SolveStatus::kTimeout);
    }
    if (!root_done) {
      root_done = true;
      root_state = std::make_shared<DualSimplex>(*state);
    }
    if (!lp.feasible) continue;
    if (lp.objective >= incumbent - options.objective_tol) continue;

    int j = fractional_var(lp.x);
    if (j < 0) {
      std::size_t before = best_x.size();
      double prev = incumbent;
      consider(lp.x);
      if (incumbent < prev || best_x.size() != before) continue;
      // Rounded point failed verification; fall back to the rounding
      // heuristic below and branch on the least integral binary.
      double worst = -1;
      for (int v = 0; v < n; ++v) {
        if (model.vars[v].type != VarType::kBinary || node->lo[v] == node->up[v]) continue;
        double f = std::abs(lp.x[v] - std::round(lp.x[v]));
        if (f > worst) {
          worst = f;
          j = v;
        }
      }
      if (j < 0) continue;
    }

    if (options.rounding_heuristic) {
      std::vector<double> lo = node->lo, up = node->up;
      std::vector<char> key;
      bool some_first = !options.branch_first.empty();
      for (int v = 0; v < n; ++v) {
        if (model.vars[v].type != VarType::kBinary || (some_first && !first[v])) continue;
        double r = std::round(lp.x[v]);
        lo[v] = up[v] = r;
        key.push_back(static_cast<char>(r));
      }
      if (tried_roundings.insert(key).second) complete(*state, lo, up);
    }

    // The down child is created last so that it is popped first.
    for (int side = 1; side >= 0; --side) {
      auto child = std::make_shared<Node>();
      child->id = next_id++;
      child->parent = node->id;
      child->bound = lp.objective;
      child->lo = node->lo;
      child->up = node->up;
      if (side == 0) child->up[j] = 0;
      else child->lo[j] = 1;
      if (options.propagate && !propagate(model, child->lo, child->up)) continue;
      open.push(child);
    }
    cache.put(node->id, state);
  }

  if (best_x.empty()) return finish(SolveStatus::kInfeasible);
  sol.has_solution = true;
  sol.values = best_x;
  sol.objective = incumbent;
  sol.best_bound = incumbent;
  return finish(SolveStatus::kOptimal);
}

}  // namespace qref
