#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "netadv/checkpoint.hpp"
#include "netadv/error.hpp"
#include "netadv/mlp.hpp"
#include "netadv/svm.hpp"
#include "synthetic.hpp"

using namespace netadv;
using doctest::Approx;

namespace {

std::vector<double> as_vec(const Eigen::Ref<const Eigen::RowVectorXd>& r) { return {r.data(), r.data() + r.size()}; }

std::vector<double> row_of(const Dataset& d, std::size_t i) {
  const auto r = d.row(i);
  return {r.begin(), r.end()};
}

Dataset two_points(std::vector<double> a, std::vector<double> b) {
  Dataset d;
  d.matrix.resize(2, static_cast<Eigen::Index>(a.size()));
  for (std::size_t j = 0; j < a.size(); ++j) {
    d.matrix(0, static_cast<Eigen::Index>(j)) = a[j];
    d.matrix(1, static_cast<Eigen::Index>(j)) = b[j];
  }
  d.labels = {0, 1};
  for (std::size_t j = 0; j < a.size(); ++j) d.feature_names.push_back("f" + std::to_string(j));
  d.class_names = {"neg", "pos"};
  return d;
}

}  // namespace

TEST_CASE("argmax ties go to the lowest index") {
  CHECK(argmax(Eigen::Vector3d(1, 3, 3)) == 1);
  CHECK(argmax(Eigen::Vector3d(2, 2, 2)) == 0);
}

TEST_CASE("softmax of zeros is uniform") {
  MlpModel m = testing::random_mlp(3, 4, {5}, 1);
  m.layers().back().weights.setZero();
  m.layers().back().bias.setZero();
  const std::vector<double> x = {0.1, 0.7, 0.3};
  const auto p = m.predict_proba(x);
  for (Eigen::Index c = 0; c < 4; ++c) CHECK(p[c] == Approx(0.25).epsilon(1e-15));
  CHECK(m.predict(x) == 0);
}

TEST_CASE("probabilities sum to one") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = testing::random_mlp(6, 5, {8, 8}, static_cast<std::uint64_t>(trial), 3.0);
    std::vector<double> x(6);
    for (auto& v : x) v = u(rng);
    const auto p = m.predict_proba(x);
    CHECK(std::abs(p.sum() - 1.0) < 1e-9);
    CHECK(p.minCoeff() >= 0.0);
  }
}

TEST_CASE("hand-evaluated forward pass") {
  // 2 -> 1 (relu) -> 2
  DenseLayer h{Eigen::MatrixXd(2, 1), Eigen::VectorXd(1)};
  h.weights << 0.5, -1.0;
  h.bias << 0.25;
  DenseLayer o{Eigen::MatrixXd(1, 2), Eigen::VectorXd(2)};
  o.weights << 2.0, -1.0;
  o.bias << 0.0, 0.5;
  const MlpModel m({h, o});
  const std::vector<double> x = {0.8, 0.1};
  const double hidden = std::max(0.0, 0.5 * 0.8 - 1.0 * 0.1 + 0.25);  // 0.55
  const double z0 = 2.0 * hidden, z1 = -hidden + 0.5;
  const double p0 = std::exp(z0) / (std::exp(z0) + std::exp(z1));
  const auto p = m.predict_proba(x);
  CHECK(std::abs(p[0] - p0) < 1e-12);
  CHECK(std::abs(p[1] - (1.0 - p0)) < 1e-12);
  CHECK(std::abs(m.loss(x, 1) + std::log(1.0 - p0)) < 1e-12);
}

TEST_CASE("dimension mismatch is an error") {
  const auto m = testing::random_mlp(3, 2, {4}, 1);
  const std::vector<double> x = {0.1, 0.2};
  CHECK_THROWS_AS(m.scores(x), DimensionError);
  CHECK_THROWS_AS(MlpModel({DenseLayer{Eigen::MatrixXd::Ones(2, 3), Eigen::VectorXd::Zero(4)}}), ValidationError);
}

TEST_CASE("input gradients") {
  SUBCASE("zero weights give a zero gradient") {
    auto m = testing::random_mlp(4, 3, {5}, 2);
    for (auto& l : m.layers()) l.weights.setZero();
    const std::vector<double> x = {0.2, 0.4, 0.6, 0.8};
    CHECK(m.input_gradient(x, 1).isZero());
  }
  SUBCASE("single linear-softmax layer closed form") {
    const auto m = testing::random_mlp(4, 3, {}, 5);
    const std::vector<double> x = {0.2, 0.4, 0.6, 0.8};
    Eigen::VectorXd residual = m.predict_proba(x);
    residual[2] -= 1.0;
    const Eigen::VectorXd expected = m.layers()[0].weights * residual;
    CHECK((m.input_gradient(x, 2) - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("finite differences on random models") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int trial = 0; trial < 20; ++trial) {
      const auto m = testing::random_mlp(5, 3, {7, 6}, 100 + static_cast<std::uint64_t>(trial));
      std::vector<double> x(5);
      for (auto& v : x) v = u(rng);
      const std::size_t t = static_cast<std::size_t>(trial) % 3;
      const auto g = m.input_gradient(x, t);
      for (std::size_t j = 0; j < 5; ++j) {
        auto hi = x, lo = x;
        hi[j] += 1e-5;
        lo[j] -= 1e-5;
        const double fd = (m.loss(hi, t) - m.loss(lo, t)) / 2e-5;
        const double denom = std::max({std::abs(fd), std::abs(g[static_cast<Eigen::Index>(j)]), 1e-6});
        CHECK(std::abs(fd - g[static_cast<Eigen::Index>(j)]) / denom < 1e-4);
      }
    }
  }
  SUBCASE("probability Jacobian matches the softmax derivative") {
    const auto m = testing::random_mlp(3, 3, {4}, 9);
    const std::vector<double> x = {0.3, 0.6, 0.9};
    const auto jac = m.probability_jacobian(x);
    const auto p = m.predict_proba(x);
    for (std::size_t c = 0; c < 3; ++c) {
      // d p_c / dx = -p_c * d(-log p_c)/dx
      const Eigen::VectorXd expect = -p[static_cast<Eigen::Index>(c)] * m.input_gradient(x, c);
      CHECK((jac.row(static_cast<Eigen::Index>(c)).transpose() - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("train_mlp") {
  SUBCASE("separable blobs reach full training accuracy") {
    const auto data = testing::blobs(50, 2, 2, 0.04, 1);
    const auto r = train_mlp(data, {60, 16, 0.05, 3, {16, 16}});
    CHECK(accuracy(r.model, data) == 1.0);
    CHECK(r.loss_history.size() == 60);
    CHECK(r.loss_history.back() < r.loss_history.front());
  }
  SUBCASE("XOR with the 4x100 architecture") {
    const auto data = testing::xor_data(400, 2);
    const auto r = train_mlp(data, {300, 16, 0.05, 7, {100, 100, 100, 100}});
    CHECK(accuracy(r.model, data) >= 0.95);
  }
  SUBCASE("zero epochs returns the seeded initialization") {
    const auto data = testing::blobs(5, 3, 4, 0.1, 1);
    const auto r = train_mlp(data, {0, 8, 0.1, 42, {6, 5}});
    CHECK(r.model == MlpModel::initialize(4, 3, {6, 5}, 42));
    CHECK(r.loss_history.empty());
  }
  SUBCASE("equal seeds give bitwise-equal parameters") {
    const auto data = testing::blobs(20, 3, 4, 0.1, 1);
    const MlpConfig cfg{3, 8, 0.05, 9, {10}};
    CHECK(train_mlp(data, cfg).model == train_mlp(data, cfg).model);
    auto other = cfg;
    other.seed = 10;
    CHECK_FALSE(train_mlp(data, other).model == train_mlp(data, cfg).model);
  }
  SUBCASE("divergence names the epoch") {
    const auto data = testing::blobs(20, 2, 3, 0.1, 1);
    try {
      train_mlp(data, {5, 4, 1e200, 1, {10}});
      FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
      CHECK(e.epoch() >= 1);
      CHECK(std::string(e.what()).find("epoch") == 0);
    }
  }
}

TEST_CASE("rbf kernel") {
  const std::vector<double> a = {0.0, 0.0}, b = {1.0, 1.0};
  CHECK(rbf_kernel(a, a, 3.0) == 1.0);
  CHECK(rbf_kernel(a, b, 0.5) == Approx(std::exp(-1.0)));
}

TEST_CASE("train_svm_rbf") {
  SUBCASE("symmetric pair has a zero decision value at the midpoint") {
    const auto d = two_points({0.2, 0.5}, {0.8, 0.5});
    const auto m = train_svm_rbf(d, {});
    const std::vector<double> mid = {0.5, 0.5};
    CHECK(std::abs(m.scores(mid)[1]) < 1e-9);
    CHECK(m.predict(row_of(d, 0)) == 0);
    CHECK(m.predict(row_of(d, 1)) == 1);
  }
  SUBCASE("separable blobs, large C") {
    const auto d = testing::blobs(40, 3, 3, 0.05, 4);
    SvmConfig cfg;
    cfg.c = 100.0;
    cfg.gamma = 5.0;
    const auto m = train_svm_rbf(d, cfg);
    CHECK(accuracy(m, d) == 1.0);
    for (const auto& info : m.machines()) {
      CHECK(info.converged);
      CHECK(info.kkt_gap < cfg.tolerance);
      CHECK(info.support_count >= 1);
    }
    CHECK(m.coefficients().cwiseAbs().maxCoeff() <= cfg.c + 1e-12);
    CHECK(m.gamma() == 5.0);
  }
  SUBCASE("gamma defaults to 1/d") {
    const auto d = testing::blobs(10, 2, 4, 0.1, 4);
    CHECK(train_svm_rbf(d, {}).gamma() == 0.25);
  }
  SUBCASE("an isolated support vector scores positive for its class") {
    auto d = testing::blobs(20, 2, 2, 0.03, 5);
    d.class_names.push_back("far");
    d.matrix.conservativeResize(d.matrix.rows() + 1, Eigen::NoChange);
    d.matrix.row(d.matrix.rows() - 1) << 1.0, 0.0;
    d.labels.push_back(2);
    SvmConfig cfg;
    cfg.gamma = 20.0;
    cfg.c = 10.0;
    const auto m = train_svm_rbf(d, cfg);
    const std::vector<double> x = {1.0, 0.0};
    CHECK(m.scores(x)[2] > 0.0);
    CHECK(m.predict(x) == 2);
  }
  SUBCASE("binary labels flip where the decision value changes sign") {
    const auto d = testing::blobs(30, 2, 2, 0.1, 6);
    const auto m = train_svm_rbf(d, {});
    for (double t = 0.0; t <= 1.0; t += 0.05) {
      const std::vector<double> x = {t, 1.0 - t};
      const auto s = m.scores(x);
      CHECK(m.predict(x) == (s[1] > s[0] ? 1u : 0u));
    }
  }
  SUBCASE("3-class prediction is the argmax over the binary machines") {
    const auto d = testing::blobs(15, 3, 3, 0.2, 7);
    const auto m = train_svm_rbf(d, {});
    for (std::size_t i = 0; i < d.rows(); ++i) {
      const auto x = row_of(d, i);
      const auto s = m.scores(x);
      std::size_t best = 0;
      for (std::size_t c = 1; c < 3; ++c) {
        if (s[static_cast<Eigen::Index>(c)] > s[static_cast<Eigen::Index>(best)]) best = c;
      }
      CHECK(m.predict(x) == best);
      // shifting every decision value leaves the argmax alone
      CHECK(argmax((s.array() + 3.5).matrix()) == best);
    }
  }
  SUBCASE("single-class data is rejected") {
    auto d = testing::blobs(5, 1, 2, 0.1, 1);
    CHECK_THROWS_AS(train_svm_rbf(d, {}), ValidationError);
    d.class_names.push_back("empty");
    CHECK_THROWS_AS(train_svm_rbf(d, {}), ValidationError);
  }
}

TEST_CASE("batch prediction does not depend on worker count") {
  const auto d = testing::blobs(30, 3, 4, 0.2, 2);
  const auto m = testing::random_mlp(4, 3, {8}, 4);
  CHECK(m.predict_all(d.matrix, 1) == m.predict_all(d.matrix, 4));
  CHECK(m.distribution_all(d.matrix, 1) == m.distribution_all(d.matrix, 3));
  const auto x0 = as_vec(d.matrix.row(0));
  CHECK(m.predict_all(d.matrix, 2)[0] == m.predict(x0));
}

TEST_CASE("checkpoint round trip") {
  const auto d = testing::blobs(10, 2, 3, 0.1, 3);
  auto normed = normalize(d, fit_norm_params(d));
  const std::string fp = norm_fingerprint(*normed.norm_params);
  CHECK(fp.size() == 64);

  SUBCASE("mlp") {
    const MlpConfig cfg{2, 4, 0.1, 5, {6}};
    Checkpoint c{train_mlp(normed, cfg).model, d.class_names, fp, to_json(cfg)};
    std::stringstream buf;
    save_checkpoint(buf, c);
    const auto back = load_checkpoint(buf);
    CHECK(std::get<MlpModel>(back.model) == std::get<MlpModel>(c.model));
    CHECK(back.class_names == c.class_names);
    CHECK(back.norm_fingerprint == fp);
    CHECK(std::get<MlpConfig>(train_config_from_json(back.train_config, "mlp")).hidden == cfg.hidden);
    CHECK(model_kind(back.model) == "mlp");
  }
  SUBCASE("svm") {
    SvmConfig cfg;
    cfg.gamma = 2.0;
    const Model m = train_svm_rbf(normed, cfg);
    std::stringstream buf;
    save_checkpoint(buf, {m, d.class_names, fp, to_json(cfg)});
    const auto back = load_checkpoint(buf);
    const auto& a = as_classifier(m);
    const auto& b = as_classifier(back.model);
    for (std::size_t i = 0; i < normed.rows(); ++i) CHECK(a.scores(normed.row(i)) == b.scores(normed.row(i)));
    CHECK(model_kind(back.model) == "svm");
  }
  SUBCASE("inconsistent shapes are rejected") {
    const MlpConfig cfg{1, 4, 0.1, 5, {6}};
    std::stringstream buf;
    save_checkpoint(buf, {train_mlp(normed, cfg).model, d.class_names, fp, to_json(cfg)});
    auto j = nlohmann::json::parse(buf.str());
    j["class_names"].push_back("extra");
    std::istringstream in(j.dump());
    CHECK_THROWS_AS(load_checkpoint(in), ValidationError);
  }
}
