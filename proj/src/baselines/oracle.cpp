#include "ffa/baselines/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "ffa/baselines/de.hpp"
#include "ffa/error.hpp"

namespace ffa::baselines {

using num::Tensor;

std::vector<double> default_grid(std::size_t points) {
  if (points < 2) throw ConfigError("grid needs at least two points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return g;
}

namespace {

constexpr std::size_t kChunk = 4096;

struct Candidate {
  std::size_t a, b;  // b == a for a single-feature candidate
  double va, vb;
};

class Sweep {
 public:
  Sweep(const BlackBox& bb, const data::Sample& s, const attack::AttackGoal& g)
      : blackbox_(bb), sample_(s), goal_(g), batch_(Tensor::matrix(kChunk, s.features.size())) {}

  void push(const Candidate& c) {
    auto row = batch_.row_span(pending_.size());
    std::copy(sample_.features.begin(), sample_.features.end(), row.begin());
    row[c.a] = c.va;
    row[c.b] = c.b == c.a ? c.va : c.vb;
    pending_.push_back(c);
    if (pending_.size() == kChunk) flush();
  }

  void flush() {
    if (pending_.empty()) return;
    Tensor x = Tensor::matrix(pending_.size(), batch_.cols());
    std::copy_n(batch_.values().begin(), x.size(), x.values().begin());
    const Tensor probs = blackbox_.predict_proba(x);
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      const double obj = attack_objective(probs.row_span(i), goal_);
      if (!have_ || obj < best_obj_) {
        have_ = true;
        best_obj_ = obj;
        best_ = pending_[i];
        best_pred_ = argmax_class(probs.row_span(i));
      }
    }
    count_ += pending_.size();
    pending_.clear();
  }

  OracleResult result() {
    flush();
    OracleResult r;
    if (!have_) return r;
    r.indices.push_back(best_.a);
    r.values.push_back(best_.va);
    if (best_.b != best_.a) {
      r.indices.push_back(best_.b);
      r.values.push_back(best_.vb);
    }
    r.objective = best_obj_;
    r.predicted = best_pred_;
    r.fooled = goal_.fooled(best_pred_);
    r.candidates = count_;
    return r;
  }

 private:
  const BlackBox& blackbox_;
  const data::Sample& sample_;
  const attack::AttackGoal& goal_;
  Tensor batch_;
  std::vector<Candidate> pending_;
  bool have_ = false;
  double best_obj_ = 0.0;
  Candidate best_{};
  int best_pred_ = -1;
  std::size_t count_ = 0;
};

}  // namespace

OracleResult greedy_oracle(const BlackBox& blackbox, const data::Sample& sample,
                           std::span<const std::size_t> mutable_indices,
                           const attack::AttackGoal& goal, std::span<const double> grid,
                           bool pairs) {
  goal.validate(blackbox.class_count());
  if (sample.features.size() != blackbox.input_dim()) {
    throw DimensionError("greedy_oracle: sample width does not match the black box");
  }
  if (mutable_indices.empty() || grid.empty()) {
    throw ContractError("greedy_oracle: needs at least one mutable feature and one grid value");
  }
  for (auto j : mutable_indices) {
    if (j >= sample.features.size()) throw DimensionError("greedy_oracle: mutable index out of range");
  }
  const double m = static_cast<double>(mutable_indices.size());
  const double g = static_cast<double>(grid.size());
  if (m * g > kOracleSingleLimit) {
    throw ContractError("greedy_oracle: single sweep of " + std::to_string(mutable_indices.size()) +
                        " features x " + std::to_string(grid.size()) + " values exceeds 1e6");
  }
  if (pairs && m * m * g * g > kOraclePairLimit) {
    throw ContractError("greedy_oracle: pair sweep of " + std::to_string(mutable_indices.size()) +
                        "^2 features x " + std::to_string(grid.size()) + "^2 values exceeds 1e7");
  }

  Sweep sweep(blackbox, sample, goal);
  for (auto j : mutable_indices) {
    for (double v : grid) sweep.push({j, j, v, v});
  }
  if (pairs) {
    for (std::size_t a = 0; a < mutable_indices.size(); ++a) {
      for (std::size_t b = a + 1; b < mutable_indices.size(); ++b) {
        for (double va : grid) {
          for (double vb : grid) sweep.push({mutable_indices[a], mutable_indices[b], va, vb});
        }
      }
    }
  }
  return sweep.result();
}

}  // namespace ffa::baselines
