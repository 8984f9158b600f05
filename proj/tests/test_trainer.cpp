#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "hullnet/trainer.hpp"

using namespace hullnet;

namespace {

// labels: first half 0, second half 1
std::pair<PointSet, std::vector<int>> balanced_blobs(std::mt19937_64& rng,
                                                     std::size_t n_per_class,
                                                     std::size_t dim,
                                                     double gap) {
  auto [a, b] = testutil::make_blobs(rng, n_per_class, dim, gap);
  PointSet pts(dim);
  std::vector<int> labels;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pts.add(a[i]);
    labels.push_back(0);
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    pts.add(b[i]);
    labels.push_back(1);
  }
  return {std::move(pts), std::move(labels)};
}

}  // namespace

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const ActivationSpec kinds[] = {
      ActivationSpec::make_sigmoid(), ActivationSpec::make_tanh(),
      ActivationSpec::make_relu(), ActivationSpec::make_leaky(0.2, 1.0)};
  for (int draw = 0; draw < 20; ++draw) {
    const auto& act = kinds[draw % 4];
    MlpClassifier net(2, 3, 2, act);
    net.init(rng);
    PointSet xs(2);
    std::vector<int> ys;
    for (int i = 0; i < 5; ++i) {
      xs.add(std::vector<double>{uni(rng), uni(rng)});
      ys.push_back(int(rng() % 2));
    }
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});

    std::vector<double> grad;
    net.loss(xs, ys, idx, &grad);
    auto& params = net.params();
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(params[k]));
      const double orig = params[k];
      params[k] = orig + h;
      const double up = net.loss(xs, ys, idx);
      params[k] = orig - h;
      const double down = net.loss(xs, ys, idx);
      params[k] = orig;
      const double fd = (up - down) / (2.0 * h);
      const double denom = std::max({std::abs(fd), std::abs(grad[k]), 1e-6});
      CAPTURE(draw, act.name(), k, fd, grad[k]);
      REQUIRE(std::abs(fd - grad[k]) / denom < 1e-4);
    }
  }
}

TEST_CASE("softmax outputs sum to one") {
  std::mt19937_64 rng(77);
  MlpClassifier net(3, 4, 3, ActivationSpec::make_tanh());
  net.init(rng);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> x{uni(rng), uni(rng), uni(rng)};
    const auto p = net.predict_proba(x);
    REQUIRE(p[0] >= 0.0);
    REQUIRE(p[1] >= 0.0);
    REQUIRE_THAT(p[0] + p[1], Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("untrained loss sits near ln 2 on balanced data") {
  std::mt19937_64 rng(4096);
  auto [pts, labels] = balanced_blobs(rng, 64, 4, 3.0);
  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (int trial = 0; trial < 5; ++trial) {
    MlpClassifier net(4, 6, 3, ActivationSpec::make_tanh());
    net.init(rng);
    REQUIRE_THAT(net.loss(pts, labels, idx),
                 Catch::Matchers::WithinAbs(std::log(2.0), 0.1));
  }
}

TEST_CASE("train is deterministic given the config") {
  std::mt19937_64 rng(5);
  auto [pts, labels] = balanced_blobs(rng, 30, 2, 4.0);
  TrainConfig cfg;
  cfg.h1 = 4;
  cfg.h2 = 2;
  cfg.epochs = 10;
  cfg.batch_size = 8;
  cfg.seed = 42;
  const auto r1 = train(pts, labels, cfg);
  const auto r2 = train(pts, labels, cfg);
  REQUIRE(r1.loss_curve == r2.loss_curve);
  REQUIRE(r1.final_loss == r2.final_loss);
}

TEST_CASE("train separates easy blobs") {
  std::mt19937_64 rng(99);
  auto [pts, labels] = balanced_blobs(rng, 40, 2, 6.0);
  TrainConfig cfg;
  cfg.h1 = 4;
  cfg.h2 = 2;
  cfg.activation = ActivationSpec::make_relu();
  cfg.epochs = 50;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.05;
  cfg.seed = 7;
  const auto res = train(pts, labels, cfg);
  REQUIRE_FALSE(res.diverged);
  REQUIRE(res.loss_curve.size() == cfg.epochs);
  REQUIRE(res.train_accuracy == 1.0);
  REQUIRE(res.final_loss < 0.01);
}

TEST_CASE("train solves noisy xor with tanh") {
  std::mt19937_64 rng(3);
  auto [a, b] = testutil::make_noisy_xor(rng, 12, 2, 0.05);
  PointSet pts(2);
  std::vector<int> labels;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pts.add(a[i]);
    labels.push_back(0);
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    pts.add(b[i]);
    labels.push_back(1);
  }
  TrainConfig cfg;
  cfg.h1 = 4;
  cfg.h2 = 2;
  cfg.activation = ActivationSpec::make_tanh();
  cfg.epochs = 600;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.2;
  cfg.seed = 12;
  const auto res = train(pts, labels, cfg);
  REQUIRE(res.train_accuracy == 1.0);
}

TEST_CASE("divergence is reported, not thrown") {
  std::mt19937_64 rng(8);
  auto [pts, labels] = balanced_blobs(rng, 20, 2, 4.0);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 1e18;
  const auto res = train(pts, labels, cfg);
  REQUIRE(res.diverged);
}

TEST_CASE("train validates input") {
  PointSet pts(2);
  pts.add(std::vector<double>{0, 0});
  REQUIRE_THROWS_AS(train(pts, {0, 1}, TrainConfig{}), std::invalid_argument);
  REQUIRE_THROWS_AS(train(pts, {2}, TrainConfig{}), std::invalid_argument);
  TrainConfig bad;
  bad.epochs = 0;
  REQUIRE_THROWS_AS(train(pts, {0}, bad), std::invalid_argument);
}

TEST_CASE("size_sweep covers the grid and survives bad cells") {
  std::mt19937_64 rng(21);
  auto [pts, labels] = balanced_blobs(rng, 20, 2, 5.0);
  TrainConfig base;
  base.epochs = 5;
  base.batch_size = 8;
  base.runs = 2;
  const auto cells = size_sweep(pts, labels, {{1, 1}, {4, 2}},
                                {ActivationSpec::make_relu(),
                                 ActivationSpec::make_sigmoid()},
                                base);
  REQUIRE(cells.size() == 4);
  for (const auto& c : cells) {
    REQUIRE(c.ok);
    REQUIRE(c.runs == 2);
  }
  const auto csv = sweep_csv(cells);
  REQUIRE(csv.rfind("h1,h2,activation,final_loss,accuracy,runs,epochs\n", 0) == 0);
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 5);
}
