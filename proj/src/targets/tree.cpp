#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>

#include "ffa/error.hpp"
#include "ffa/numerics/serialize.hpp"
#include "ffa/targets/target.hpp"

namespace ffa::targets {

TreeModel::TreeModel(std::size_t input_dim, std::size_t classes, std::vector<TreeNode> nodes)
    : input_dim_(input_dim), classes_(classes), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ContractError("tree needs at least one node");
  for (const auto& n : nodes_) {
    if (n.is_leaf()) {
      if (n.probabilities.size() != classes_) throw ContractError("leaf probability width");
    } else if (n.left < 0 || n.right < 0 || static_cast<std::size_t>(n.left) >= nodes_.size() ||
               static_cast<std::size_t>(n.right) >= nodes_.size() ||
               static_cast<std::size_t>(n.feature) >= input_dim_) {
      throw ContractError("malformed tree node");
    }
  }
}

std::size_t TreeModel::leaf_index(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                        : n.right);
  }
  return i;
}

num::Tensor TreeModel::predict_proba(const num::Tensor& batch) const {
  if (batch.cols() != input_dim_) {
    throw DimensionError("predict_proba: expected " + std::to_string(input_dim_) +
                         " features, got " + std::to_string(batch.cols()));
  }
  num::Tensor out = num::Tensor::matrix(batch.rows(), classes_);
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const auto& p = nodes_[leaf_index(batch.row_span(r))].probabilities;
    std::copy(p.begin(), p.end(), out.row_span(r).begin());
  }
  return out;
}

std::size_t TreeModel::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

void TreeModel::write(std::ostream& os) const {
  num::io::write_header(os, "tree");
  os << "input " << input_dim_ << "\nclasses " << classes_ << "\nnodes " << nodes_.size() << '\n';
  for (const auto& n : nodes_) {
    os << "node " << n.feature << ' ' << num::io::format_double(n.threshold) << ' ' << n.left << ' '
       << n.right;
    for (double p : n.probabilities) os << ' ' << num::io::format_double(p);
    os << '\n';
  }
}

namespace {

double gini(const std::vector<double>& counts, double total) {
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (double c : counts) s += (c / total) * (c / total);
  return 1.0 - s;
}

class TreeBuilder {
 public:
  TreeBuilder(const data::Dataset& train, const TargetHyperparams& hp)
      : train_(train), hp_(hp), classes_(train.class_count()) {}

  std::vector<TreeNode> build() {
    std::vector<std::size_t> all(train_.size());
    std::iota(all.begin(), all.end(), 0);
    grow(all, 0);
    return std::move(nodes_);
  }

 private:
  int grow(std::vector<std::size_t>& idx, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::vector<double> counts(classes_, 0.0);
    for (auto i : idx) counts[static_cast<std::size_t>(train_[i].label)] += 1.0;
    const double total = static_cast<double>(idx.size());
    const double impurity = gini(counts, total);

    auto make_leaf = [&] {
      auto& leaf = nodes_[static_cast<std::size_t>(id)];
      leaf.probabilities.resize(classes_);
      for (std::size_t c = 0; c < classes_; ++c) leaf.probabilities[c] = counts[c] / total;
      return id;
    };
    if (depth >= hp_.max_depth || idx.size() < hp_.min_samples_split || impurity <= 0.0) {
      return make_leaf();
    }

    // Best split over every feature and every midpoint between distinct values.
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = impurity - 1e-12;  // weighted child impurity must improve on this
    const std::size_t d = train_.dimension();
    const std::size_t min_leaf = std::max<std::size_t>(1, hp_.min_samples_leaf);
    std::vector<std::size_t> sorted = idx;
    for (std::size_t f = 0; f < d; ++f) {
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        const double va = train_[a].features[f], vb = train_[b].features[f];
        return va < vb || (va == vb && a < b);
      });
      std::vector<double> left(classes_, 0.0);
      std::vector<double> right = counts;
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        const auto c = static_cast<std::size_t>(train_[sorted[k]].label);
        left[c] += 1.0;
        right[c] -= 1.0;
        const double v = train_[sorted[k]].features[f];
        const double next = train_[sorted[k + 1]].features[f];
        if (!(next > v)) continue;
        const std::size_t nl = k + 1, nr = sorted.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double wl = static_cast<double>(nl), wr = static_cast<double>(nr);
        const double score = (wl * gini(left, wl) + wr * gini(right, wr)) / total;
        if (score < best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (v + next);
        }
      }
    }
    if (best_feature < 0) return make_leaf();

    std::vector<std::size_t> li, ri;
    for (auto i : idx) {
      (train_[i].features[static_cast<std::size_t>(best_feature)] <= best_threshold ? li : ri)
          .push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const int l = grow(li, depth + 1);
    const int r = grow(ri, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const data::Dataset& train_;
  const TargetHyperparams& hp_;
  std::size_t classes_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

TreeModel fit_tree(const data::Dataset& train, const TargetHyperparams& hp) {
  if (train.empty()) throw TrainingError("empty training set");
  return TreeModel(train.dimension(), train.class_count(), TreeBuilder(train, hp).build());
}

TreeModel read_tree_body(std::istream& is) {
  const auto input = std::stoul(num::io::expect_key(is, "input"));
  const auto classes = std::stoul(num::io::expect_key(is, "classes"));
  const auto count = std::stoul(num::io::expect_key(is, "nodes"));
  std::vector<TreeNode> nodes(count);
  std::string tok;
  for (auto& n : nodes) {
    if (!(is >> tok) || tok != "node") throw FormatError("expected tree node");
    if (!(is >> n.feature >> tok)) throw FormatError("truncated tree node");
    n.threshold = num::io::parse_double(tok);
    if (!(is >> n.left >> n.right)) throw FormatError("truncated tree node");
    if (n.is_leaf()) {
      n.probabilities.resize(classes);
      for (auto& p : n.probabilities) {
        if (!(is >> tok)) throw FormatError("truncated leaf");
        p = num::io::parse_double(tok);
      }
    }
  }
  return TreeModel(input, classes, std::move(nodes));
}

}  // namespace ffa::targets
