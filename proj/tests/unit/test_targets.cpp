#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ffa/blackbox.hpp"
#include "ffa/data/preprocess.hpp"
#include "ffa/error.hpp"
#include "ffa/targets/target.hpp"

using namespace ffa;
using namespace ffa::targets;
using num::Tensor;
namespace fs = std::filesystem;

namespace {

std::pair<data::Dataset, data::Dataset> small_synth(std::uint64_t seed) {
  data::SynthSpec spec;
  spec.samples = 600;
  spec.dimension = 8;
  spec.mutable_count = 6;
  spec.informative = 3;
  spec.seed = seed;
  return data::split(data::synth_tabular(spec), {0.8, seed, false});
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Constant-answer black box: every row gets the same probabilities.
class FixedBox final : public BlackBox {
 public:
  explicit FixedBox(std::vector<double> p) : p_(std::move(p)) {}
  std::size_t input_dim() const override { return 1; }
  std::size_t class_count() const override { return p_.size(); }
  Tensor predict_proba(const Tensor& x) const override {
    Tensor out = Tensor::matrix(x.rows(), p_.size());
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < p_.size(); ++c) out.at(r, c) = p_[c];
    return out;
  }

 private:
  std::vector<double> p_;
};

// Predicts the attack class for rows whose only feature is above 0.5.
class StepBox final : public BlackBox {
 public:
  std::size_t input_dim() const override { return 1; }
  std::size_t class_count() const override { return 2; }
  Tensor predict_proba(const Tensor& x) const override {
    Tensor out = Tensor::matrix(x.rows(), 2);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const bool hit = x.at(r, 0) > 0.5;
      out.at(r, 1) = hit ? 1.0 : 0.0;
      out.at(r, 0) = hit ? 0.0 : 1.0;
    }
    return out;
  }
};

}  // namespace

TEST_CASE("argmax ties go to the lower class") {
  const std::vector<double> p{0.4, 0.4, 0.2};
  CHECK(argmax_class(p) == 0);
  const std::vector<double> q{0.1, 0.45, 0.45};
  CHECK(argmax_class(q) == 1);
  const FixedBox box({0.5, 0.5});
  CHECK(predict_classes(box, Tensor::matrix(3, 1)) == std::vector<int>{0, 0, 0});
}

TEST_CASE("detection rate counts attack-class predictions") {
  StepBox box;
  // 996 of 1000 rows above the threshold -> 0.996.
  Tensor x = Tensor::matrix(1000, 1, 0.9);
  for (std::size_t i = 0; i < 4; ++i) x.at(i, 0) = 0.1;
  CHECK(detection_rate(box, x, 1) == doctest::Approx(0.996));
  CHECK_THROWS_AS(detection_rate(box, Tensor(), 1), ContractError);
}

TEST_CASE("counting wrapper counts rows and calls") {
  StepBox box;
  CountingBlackBox counted(box);
  (void)counted.predict_proba(Tensor::matrix(7, 1));
  (void)counted.predict_proba(Tensor::matrix(3, 1));
  CHECK(counted.queries() == 10);
  CHECK(counted.calls() == 2);
  counted.reset();
  CHECK(counted.queries() == 0);
}

TEST_CASE("every target kind outputs probability simplices") {
  const auto [train, test] = small_synth(1);
  TargetHyperparams hp;
  hp.epochs = 30;
  hp.learning_rate = 1e-2;
  hp.hidden = {16};
  for (auto kind : {TargetKind::logistic, TargetKind::mlp, TargetKind::tree}) {
    auto [model, report] = train_target(kind, train, test, hp);
    CHECK(model->kind() == kind);
    const auto p = model->predict_proba(test.features());
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double s = 0.0;
      for (double v : p.row_span(r)) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(std::fabs(s - 1.0) <= 1e-9);
    }
    CHECK(report.test_accuracy > 0.8);
  }
}

TEST_CASE("mlp target reaches high accuracy on margin-4 data") {
  data::SynthSpec spec;
  spec.samples = 2000;
  spec.seed = 3;
  const auto [train, test] = data::split(data::synth_tabular(spec), {0.8, 3, false});
  TargetHyperparams hp;
  hp.seed = 3;
  auto [model, report] = train_target(TargetKind::mlp, train, test, hp);
  CHECK(report.test_accuracy >= 0.95);
}

TEST_CASE("tree splits on the informative feature at a midpoint threshold") {
  const auto schema = data::FeatureSchema::continuous(2);
  std::vector<data::Sample> s;
  for (int i = 0; i < 10; ++i) {
    const double x = i / 10.0;
    s.push_back({{0.3, x}, x >= 0.5 ? 1 : 0});
  }
  const data::Dataset d(schema, 2, s);
  TargetHyperparams hp;
  const auto tree = fit_tree(d, hp);
  REQUIRE(!tree.nodes().empty());
  CHECK(tree.nodes()[0].feature == 1);
  CHECK(tree.nodes()[0].threshold == doctest::Approx(0.45));
  CHECK(tree.depth() == 1);
  CHECK(accuracy(tree, d) == 1.0);

  hp.max_depth = 0;
  const auto stump = fit_tree(d, hp);
  CHECK(stump.nodes().size() == 1);
  CHECK(stump.nodes()[0].probabilities[0] == doctest::Approx(0.5));
}

TEST_CASE("target files round-trip and training is deterministic") {
  const auto [train, test] = small_synth(5);
  TargetHyperparams hp;
  hp.epochs = 3;
  hp.hidden = {8};
  hp.seed = 5;
  const auto dir = fs::temp_directory_path() / "ffa-unit-targets";
  fs::create_directories(dir);
  for (auto kind : {TargetKind::logistic, TargetKind::mlp, TargetKind::tree}) {
    auto a = train_target(kind, train, test, hp).first;
    auto b = train_target(kind, train, test, hp).first;
    const auto pa = dir / ("a-" + to_string(kind));
    const auto pb = dir / ("b-" + to_string(kind));
    save_target(*a, pa);
    save_target(*b, pb);
    CHECK(file_bytes(pa) == file_bytes(pb));
    const auto back = load_target(pa);
    CHECK(back->kind() == kind);
    CHECK(back->predict_proba(test.features()) == a->predict_proba(test.features()));
  }
  std::ofstream(dir / "junk") << "hello\n";
  CHECK_THROWS_AS(load_target(dir / "junk"), FormatError);
}

TEST_CASE("training needs two classes") {
  const auto [train, test] = small_synth(2);
  CHECK_THROWS_AS(train_target(TargetKind::mlp, train.with_label(1), test, {}), TrainingError);
  CHECK_THROWS_AS(target_kind_from_string("forest"), ConfigError);
}
