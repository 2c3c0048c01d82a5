#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "netadv/attacks.hpp"
#include "netadv/error.hpp"
#include "netadv/mlp.hpp"
#include "netadv/svm.hpp"
#include "synthetic.hpp"

using namespace netadv;
using doctest::Approx;

namespace {

Dataset from_columns(const std::vector<std::vector<double>>& cols, std::vector<std::size_t> labels,
                     std::size_t classes) {
  Dataset d;
  d.matrix.resize(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      d.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
    }
    d.feature_names.push_back("f" + std::to_string(j));
  }
  d.labels = std::move(labels);
  for (std::size_t c = 0; c < classes; ++c) d.class_names.push_back("c" + std::to_string(c));
  return d;
}

// Logistic regression as a two-logit softmax layer: logits (0, w.x + b).
MlpModel logistic(const std::vector<double>& w, double b) {
  DenseLayer l{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(w.size()), 2), Eigen::VectorXd::Zero(2)};
  for (std::size_t j = 0; j < w.size(); ++j) l.weights(static_cast<Eigen::Index>(j), 1) = w[j];
  l.bias[1] = b;
  return MlpModel({l});
}

AttackSpec spec_of(AttackKind kind, double eps, std::optional<std::size_t> k, std::optional<std::size_t> target) {
  AttackSpec s;
  s.kind = kind;
  s.epsilon = eps;
  s.max_features = k;
  s.target_class = target;
  s.specificity = target ? Specificity::kTargeted : Specificity::kNonTargeted;
  return s;
}

}  // namespace

TEST_CASE("attack taxonomy strings round trip") {
  for (auto k : {AttackKind::kMiL1, AttackKind::kFgsm, AttackKind::kBim, AttackKind::kJsma}) {
    CHECK(parse_attack_kind(to_string(k)) == k);
  }
  for (auto k : {Knowledge::kWhiteBox, Knowledge::kBlackBoxQuery, Knowledge::kBlackBoxZeroQuery}) {
    CHECK(parse_knowledge(to_string(k)) == k);
  }
  CHECK(parse_phase(to_string(Phase::kPoisoning)) == Phase::kPoisoning);
  CHECK(parse_specificity("non-targeted") == Specificity::kNonTargeted);
  try {
    parse_attack_kind("cw-l2");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "attack.kind");
  }
}

TEST_CASE("AttackSpec validation") {
  auto s = spec_of(AttackKind::kMiL1, 0.01, 2, 0);
  s.source_class = 1;
  CHECK_NOTHROW(validate(s, 10, 2));
  auto bad = s;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(validate(bad, 10, 2), ValidationError);
  bad = s;
  bad.max_features = 11;
  CHECK_THROWS_AS(validate(bad, 10, 2), ValidationError);
  bad = s;
  bad.target_class.reset();
  CHECK_THROWS_AS(validate(bad, 10, 2), ValidationError);
  bad = s;
  bad.target_class = 1;
  CHECK_THROWS_AS(validate(bad, 10, 2), ValidationError);

  auto blackbox = s;
  blackbox.knowledge = Knowledge::kBlackBoxQuery;
  CHECK_NOTHROW(validate(blackbox, 10, 2));
  CHECK_THROWS_AS(require_executable(blackbox), UnsupportedAttackError);
  auto poison = s;
  poison.phase = Phase::kPoisoning;
  CHECK_THROWS_AS(require_executable(poison), UnsupportedAttackError);

  const auto j = to_json(s, {"Normal", "DoS"});
  CHECK(j.at("target") == "Normal");
  const auto back = attack_spec_from_json(j, {"Normal", "DoS"});
  CHECK(back.target_class == s.target_class);
  CHECK(back.source_class == s.source_class);
  CHECK(back.epsilon == s.epsilon);
  CHECK(back.max_features == s.max_features);
}

TEST_CASE("mutual information") {
  SUBCASE("feature equal to a balanced binary label carries one bit") {
    std::vector<double> f;
    std::vector<std::size_t> y;
    for (int i = 0; i < 100; ++i) {
      f.push_back(i % 2);
      y.push_back(static_cast<std::size_t>(i % 2));
    }
    CHECK(mutual_information_scores(from_columns({f}, y, 2))[0] == Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("hand joint distribution") {
    std::vector<double> f;
    std::vector<std::size_t> y;
    auto add = [&](double v, std::size_t c, int n) {
      for (int i = 0; i < n; ++i) {
        f.push_back(v);
        y.push_back(c);
      }
    };
    add(0.0, 0, 40);
    add(0.0, 1, 10);
    add(1.0, 0, 10);
    add(1.0, 1, 40);
    // 1 - H(0.2)
    const double expected = 1.0 + 0.2 * std::log2(0.2) + 0.8 * std::log2(0.8);
    CHECK(std::abs(mutual_information_scores(from_columns({f}, y, 2))[0] - expected) < 1e-12);
    CHECK(std::abs(expected - 0.2781) < 1e-4);
  }
  SUBCASE("independent feature is near zero") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> f;
    std::vector<std::size_t> y;
    for (int i = 0; i < 10000; ++i) {
      f.push_back(u(rng));
      y.push_back(u(rng) < 0.5 ? 0 : 1);
    }
    CHECK(mutual_information_scores(from_columns({f}, y, 2))[0] < 0.05);
  }
  SUBCASE("class pair restricts the samples") {
    // feature separates classes 0 and 1 perfectly, class 2 overlaps both
    const auto d = from_columns({{0, 0, 1, 1, 0, 1}}, {0, 0, 1, 1, 2, 2}, 3);
    CHECK(mutual_information_scores(d, std::pair<std::size_t, std::size_t>{0, 1})[0] == Approx(1.0));
    CHECK(mutual_information_scores(d)[0] < 1.0);
  }
  SUBCASE("one_vs_rest relabels") {
    const auto d = one_vs_rest(from_columns({{0, 0, 1}}, {0, 1, 2}, 3), 1);
    CHECK(d.labels == std::vector<std::size_t>{0, 1, 0});
    CHECK(d.num_classes() == 2);
  }
}

TEST_CASE("select_discriminant") {
  CHECK(select_discriminant(std::vector<double>{0.1, 0.9, 0.5}, 2) == std::vector<std::size_t>{1, 2});
  CHECK(select_discriminant(std::vector<double>{0.1, 0.9, 0.5}, 0).empty());
  CHECK(select_discriminant(std::vector<double>{0.5, 0.5}, 1) == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(select_discriminant(std::vector<double>{0.5}, 2), ValidationError);
}

TEST_CASE("class profiles use the median") {
  const auto d = from_columns({{0.2, 0.0, 1.0, 0.9}, {0.7, 0.1, 0.5, 0.9}}, {0, 1, 1, 2}, 3);
  const std::vector<std::size_t> idx = {1, 0};
  SUBCASE("single-sample class") {
    const auto p = class_profile(d, 0, idx);
    CHECK(p.feature_indices == idx);
    CHECK(p.values == std::vector<double>{0.7, 0.2});
  }
  SUBCASE("even count takes the midpoint") { CHECK(class_profile(d, 1, idx).values[1] == 0.5); }
  SUBCASE("symmetric values about 0.3") {
    const auto s = from_columns({{0.1, 0.3, 0.5, 0.2, 0.4}}, {0, 0, 0, 0, 0}, 1);
    CHECK(class_profile(s, 0, std::vector<std::size_t>{0}).values[0] == Approx(0.3));
  }
  SUBCASE("empty class is an error") {
    auto e = d;
    e.class_names.push_back("none");
    CHECK_THROWS_AS(class_profile(e, 3, idx), ValidationError);
  }
  SUBCASE("complement profile") {
    CHECK(complement_profile(d, 0, std::vector<std::size_t>{0}).values[0] == 0.9);
  }
}

TEST_CASE("craft_mi_l1") {
  // class 1 when x0 + x1 > 1
  const auto model = logistic({20.0, 20.0}, -20.0);
  AttackSpec s = spec_of(AttackKind::kMiL1, 0.1, 2, 1);
  s.source_class = 0;
  const ClassProfile profile{{0, 1}, {0.9, 0.9}};

  SUBCASE("already the target: untouched and successful") {
    const std::vector<double> x = {0.8, 0.8};
    const auto ex = craft_mi_l1(x, 0, profile, s, model);
    CHECK(ex.delta_indices.empty());
    CHECK(ex.succeeded);
    CHECK(ex.perturbed == ex.original);
  }
  SUBCASE("profile equal to x: nothing moves") {
    const std::vector<double> x = {0.3, 0.4};
    const auto ex = craft_mi_l1(x, 0, ClassProfile{{0, 1}, {0.3, 0.4}}, s, model);
    CHECK(ex.delta_indices.empty());
    CHECK_FALSE(ex.succeeded);
  }
  SUBCASE("stops at the first success") {
    const std::vector<double> x = {0.45, 0.5};
    const auto ex = craft_mi_l1(x, 0, profile, s, model, 7);
    CHECK(ex.succeeded);
    CHECK(ex.delta_indices == std::vector<std::size_t>{0});
    CHECK(ex.delta_values[0] == Approx(0.1));
    CHECK(ex.predicted_before == 0);
    CHECK(ex.predicted_after == 1);
    CHECK(ex.source_index == 7);
    CHECK_FALSE(check_invariants(ex, s, profile.feature_indices));
  }
  SUBCASE("uses the whole budget when needed") {
    const std::vector<double> x = {0.1, 0.1};
    const auto ex = craft_mi_l1(x, 0, profile, s, model);
    CHECK_FALSE(ex.succeeded);
    CHECK(ex.delta_indices.size() == 2);
    CHECK(ex.max_abs_delta() == Approx(0.1));
    CHECK_FALSE(check_invariants(ex, s));
  }
  SUBCASE("k = 1 stops after one feature") {
    auto s1 = s;
    s1.max_features = 1;
    const std::vector<double> x = {0.1, 0.1};
    CHECK(craft_mi_l1(x, 0, profile, s1, model).delta_indices.size() == 1);
  }
  SUBCASE("L1 distance to the profile never grows") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      const std::vector<double> x = {u(rng), u(rng)};
      double prev = std::abs(x[0] - 0.9) + std::abs(x[1] - 0.9);
      for (std::size_t k = 1; k <= 2; ++k) {
        auto sk = s;
        sk.max_features = k;
        sk.target_class = 1;
        const auto ex = craft_mi_l1(x, 0, profile, sk, logistic({0.0, 0.0}, -50.0), 0);
        const double dist = std::abs(ex.perturbed[0] - 0.9) + std::abs(ex.perturbed[1] - 0.9);
        CHECK(dist <= prev + 1e-15);
        prev = dist;
      }
    }
  }
  SUBCASE("non-targeted succeeds on leaving the source class") {
    auto nt = spec_of(AttackKind::kMiL1, 0.1, 2, std::nullopt);
    nt.source_class = 0;
    const std::vector<double> x = {0.45, 0.5};
    const auto ex = craft_mi_l1(x, 0, profile, nt, model);
    CHECK(ex.succeeded);
  }
}

TEST_CASE("build_profile ranks by mutual information") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> noise, signal;
  std::vector<std::size_t> y;
  for (int i = 0; i < 400; ++i) {
    const std::size_t c = static_cast<std::size_t>(i % 2);
    y.push_back(c);
    noise.push_back(u(rng));
    signal.push_back(c == 0 ? 0.1 + 0.05 * u(rng) : 0.8 + 0.05 * u(rng));
  }
  const auto d = from_columns({noise, signal}, y, 2);
  auto s = spec_of(AttackKind::kMiL1, 0.01, 1, 0);
  s.source_class = 1;
  const auto p = build_profile(d, s);
  CHECK(p.feature_indices == std::vector<std::size_t>{1});
  CHECK(p.values[0] == Approx(0.125).epsilon(0.05));

  auto nt = spec_of(AttackKind::kMiL1, 0.01, 1, std::nullopt);
  CHECK_THROWS_AS(build_profile(d, nt), ValidationError);
  nt.source_class = 1;
  CHECK(build_profile(d, nt).feature_indices == std::vector<std::size_t>{1});
}

TEST_CASE("fgsm") {
  SUBCASE("logistic model moves against the label times sign(w)") {
    const std::vector<double> w = {2.0, -3.0, 0.5, -0.1};
    const auto m = logistic(w, 0.0);
    const std::vector<double> x = {0.5, 0.5, 0.5, 0.5};
    for (std::size_t y : {0u, 1u}) {
      const auto ex = fgsm(m, x, y, spec_of(AttackKind::kFgsm, 0.05, std::nullopt, std::nullopt));
      const double ysign = y == 1 ? 1.0 : -1.0;
      REQUIRE(ex.delta_indices.size() == 4);
      for (std::size_t j = 0; j < 4; ++j) {
        CHECK(ex.delta_values[j] == Approx(-ysign * (w[j] > 0 ? 1.0 : -1.0) * 0.05));
      }
    }
  }
  SUBCASE("epsilon zero is the identity") {
    const auto m = testing::random_mlp(5, 3, {6}, 2);
    const std::vector<double> x = {0.1, 0.2, 0.3, 0.4, 0.5};
    const auto ex = fgsm(m, x, 0, spec_of(AttackKind::kFgsm, 0.0, std::nullopt, std::nullopt));
    CHECK(ex.perturbed == ex.original);
    CHECK(ex.delta_indices.empty());
  }
  SUBCASE("unclipped coordinates move by exactly epsilon") {
    const auto m = testing::random_mlp(6, 3, {8}, 3);
    const std::vector<double> x = {0.3, 0.4, 0.5, 0.6, 0.7, 0.5};
    const auto s = spec_of(AttackKind::kFgsm, 0.02, std::nullopt, 2);
    const auto ex = fgsm(m, x, 0, s);
    for (double v : ex.delta_values) CHECK(std::abs(v) == 0.02);
    CHECK_FALSE(check_invariants(ex, s));
  }
  SUBCASE("k < d keeps the largest gradients") {
    const std::vector<double> w = {0.1, -5.0, 0.2, 3.0};
    const auto ex = fgsm(logistic(w, 0.0), std::vector<double>{0.5, 0.5, 0.5, 0.5}, 1,
                         spec_of(AttackKind::kFgsm, 0.05, 2, std::nullopt));
    CHECK(ex.delta_indices == std::vector<std::size_t>{1, 3});
  }
  SUBCASE("domain clipping") {
    const auto ex = fgsm(logistic({1.0, -1.0}, 0.0), std::vector<double>{1.0, 0.0}, 0,
                         spec_of(AttackKind::kFgsm, 0.1, std::nullopt, std::nullopt));
    CHECK(ex.delta_indices.empty());
  }
  SUBCASE("SVM has no gradients") {
    const auto d = testing::blobs(5, 2, 2, 0.1, 1);
    const auto svm = train_svm_rbf(d, {});
    CHECK_THROWS_AS(fgsm(svm, d.row(0), 0, spec_of(AttackKind::kFgsm, 0.1, std::nullopt, std::nullopt)),
                    UnsupportedAttackError);
    CHECK_THROWS_AS(bim(svm, d.row(0), 0, spec_of(AttackKind::kBim, 0.1, std::nullopt, std::nullopt)),
                    UnsupportedAttackError);
    CHECK_THROWS_AS(jsma(svm, d.row(0), 0, spec_of(AttackKind::kJsma, 0.1, std::nullopt, 1)),
                    UnsupportedAttackError);
  }
}

TEST_CASE("bim") {
  const auto m = testing::random_mlp(6, 3, {8}, 5);
  const std::vector<double> x = {0.3, 0.4, 0.5, 0.6, 0.7, 0.5};
  SUBCASE("one step of size epsilon equals fgsm") {
    auto s = spec_of(AttackKind::kBim, 0.03, std::nullopt, std::nullopt);
    s.iterations = 1;
    s.step_size = 0.03;
    const auto b = bim(m, x, 1, s);
    auto f = s;
    f.kind = AttackKind::kFgsm;
    const auto g = fgsm(m, x, 1, f);
    CHECK(b.perturbed == g.perturbed);
    CHECK(b.delta_values == g.delta_values);
  }
  SUBCASE("projection keeps the budget") {
    for (std::size_t it : {1u, 5u, 40u}) {
      auto s = spec_of(AttackKind::kBim, 0.02, 3, std::nullopt);
      s.iterations = it;
      s.step_size = 0.015;
      const auto ex = bim(m, x, 1, s);
      CHECK_FALSE(check_invariants(ex, s));
    }
  }
  SUBCASE("bad step size") {
    auto s = spec_of(AttackKind::kBim, 0.02, 3, std::nullopt);
    s.step_size = 0.05;
    CHECK_THROWS_AS(bim(m, x, 1, s), ValidationError);
  }
}

TEST_CASE("jsma") {
  const auto m = testing::random_mlp(6, 3, {8}, 7, 2.0);
  const std::vector<double> x = {0.3, 0.4, 0.5, 0.6, 0.7, 0.5};
  SUBCASE("already the target") {
    const std::size_t now = m.predict(x);
    const auto ex = jsma(m, x, (now + 1) % 3, spec_of(AttackKind::kJsma, 0.1, 2, now));
    CHECK(ex.delta_indices.empty());
    CHECK(ex.succeeded);
  }
  SUBCASE("budget and direction") {
    for (std::size_t t = 0; t < 3; ++t) {
      for (std::size_t k = 1; k <= 3; ++k) {
        auto s = spec_of(AttackKind::kJsma, 0.2, k, t);
        s.theta = 0.05;
        s.iterations = 50;
        const auto ex = jsma(m, x, 0, s);
        CHECK(ex.delta_indices.size() <= k);
        for (double v : ex.delta_values) CHECK(v > 0.0);
        CHECK_FALSE(check_invariants(ex, s));
      }
    }
  }
  SUBCASE("non-targeted is rejected") {
    CHECK_THROWS_AS(jsma(m, x, 0, spec_of(AttackKind::kJsma, 0.1, 2, std::nullopt)), ValidationError);
  }
}

TEST_CASE("check_invariants flags violations") {
  const auto s = spec_of(AttackKind::kMiL1, 0.1, 1, 1);
  AdversarialExample ex;
  ex.original = {0.5, 0.5};
  ex.perturbed = {0.6, 0.5};
  ex.delta_indices = {0};
  ex.delta_values = {0.1};
  CHECK_FALSE(check_invariants(ex, s));
  auto big = ex;
  big.delta_values = {0.2};
  CHECK(check_invariants(big, s));
  auto many = ex;
  many.delta_indices = {0, 1};
  many.delta_values = {0.1, 0.1};
  CHECK(check_invariants(many, s));
  auto leak = ex;
  leak.perturbed[1] = 0.50001;
  CHECK(check_invariants(leak, s));
  auto outside = ex;
  outside.perturbed[0] = 1.2;
  CHECK(check_invariants(outside, s));
  CHECK(check_invariants(ex, s, std::vector<std::size_t>{1}));
}

TEST_CASE("craft_batch ordering, candidates and persistence") {
  const auto d = testing::blobs(30, 3, 5, 0.15, 2);
  const auto m = train_mlp(d, {5, 8, 0.1, 1, {12}}).model;
  auto s = spec_of(AttackKind::kMiL1, 0.05, 3, 0);
  const auto candidates = attack_candidates(d, s);
  CHECK(candidates.size() == 60);
  s.source_class = 2;
  CHECK(attack_candidates(d, s).size() == 30);
  s.source_class.reset();

  const auto profile = build_profile(d, s);
  CHECK_THROWS_AS(craft_batch(m, d, candidates, s, nullptr), ValidationError);
  const auto one = craft_batch(m, d, candidates, s, &profile, 1);
  const auto four = craft_batch(m, d, candidates, s, &profile, 4);
  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].source_index == candidates[i]);
    CHECK(one[i].perturbed == four[i].perturbed);
    CHECK(one[i].succeeded == four[i].succeeded);
    CHECK_FALSE(check_invariants(one[i], s, profile.feature_indices));
  }

  std::stringstream buf;
  write_examples_csv(buf, one, d);
  const std::string header = buf.str().substr(0, buf.str().find('\n'));
  CHECK(header.rfind("source_index,source_class,predicted_before,predicted_after,succeeded,support,delta,f0", 0) == 0);
  const auto back = read_examples_csv(buf, d);
  REQUIRE(back.size() == one.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(back[i].source_index == one[i].source_index);
    CHECK(back[i].original == one[i].original);
    CHECK(back[i].perturbed == one[i].perturbed);
    CHECK(back[i].delta_indices == one[i].delta_indices);
    CHECK(back[i].delta_values == one[i].delta_values);
    CHECK(back[i].predicted_after == one[i].predicted_after);
    CHECK(back[i].succeeded == one[i].succeeded);
  }

  std::istringstream bad(header + "\n1,c0,c0,c0,1,,,0.1\n");
  CHECK_THROWS_AS(read_examples_csv(bad, d), ParseError);

  const auto r = transfer(one, m, s);
  CHECK(r.attempted == one.size());
  std::size_t succeeded = 0;
  for (const auto& ex : one) succeeded += ex.succeeded;
  CHECK(r.fooled == succeeded);  // same model
  CHECK(r.fooled_given_success == succeeded);
  CHECK(r.succeeded_on_source == succeeded);
}
