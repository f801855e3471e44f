#include <doctest.h>

#include <cmath>
#include <sstream>

#include "carol/carol.hpp"
#include "oracles/finite_diff.hpp"

using namespace carol;

namespace {

Mlp linear_2x1() {
  Mlp m = mlp_init({1, 1}, {}, Activation::Identity, 0);
  m.params = {2.0, 1.0};
  return m;
}

}  // namespace

TEST_CASE("mlp_init") {
  const Mlp a = mlp_init({2, 1}, {}, Activation::Identity, 7);
  CHECK(a.params.size() == 3);
  CHECK(a.params[2] == 0.0);
  CHECK(mlp_init({2, 1}, {}, Activation::Identity, 7) == a);
  CHECK(param_count({4, 8, 2}) == 58);
  CHECK(mlp_init({4, 8, 2}, {Activation::ReLU}, Activation::Identity, 1).params.size() == 58);

  const Mlp wide = mlp_init({30, 20}, {}, Activation::Identity, 3);
  const double bound = std::sqrt(6.0 / 50.0);
  for (std::size_t i = 0; i < 600; ++i) CHECK(std::fabs(wide.params[i]) <= bound);
  CHECK_THROWS_AS(mlp_init({}, {}, Activation::Identity, 0), ConfigError);
  CHECK_THROWS_AS(mlp_init({3}, {}, Activation::Identity, 0), ConfigError);
}

TEST_CASE("forward") {
  Mlp zero = mlp_init({3, 4, 2}, {Activation::Tanh}, Activation::Identity, 1);
  std::fill(zero.params.begin(), zero.params.end(), 0.0);
  CHECK(forward(zero, std::vector<double>{1, -2, 3}) == std::vector<double>{0.0, 0.0});

  CHECK(forward(linear_2x1(), std::vector<double>{3.0}) == std::vector<double>{7.0});

  Mlp relu = mlp_init({1, 2, 2}, {Activation::ReLU}, Activation::Identity, 0);
  // hidden pre-activation [-1, 2], output is the identity
  relu.params = {1.0, 1.0, -2.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0};
  CHECK(forward(relu, std::vector<double>{1.0}) == std::vector<double>{0.0, 2.0});

  CHECK_THROWS_AS(forward(zero, std::vector<double>{1.0}), DomainError);
}

TEST_CASE("backward by hand") {
  const MlpGradients g = backward(linear_2x1(), std::vector<double>{3.0}, std::vector<double>{1.0});
  CHECK(g.params == std::vector<double>{3.0, 1.0});
  CHECK(g.input == std::vector<double>{2.0});

  const Mlp m = mlp_init({3, 5, 2}, {Activation::Tanh}, Activation::ReLU, 4);
  const MlpGradients z = backward(m, std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{0.0, 0.0});
  for (double v : z.params) CHECK(v == 0.0);
  for (double v : z.input) CHECK(v == 0.0);
  CHECK_THROWS_AS(backward(m, std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{1.0}), DomainError);
}

TEST_CASE("backward matches finite differences") {
  Rng rng(17);
  const Activation acts[3] = {Activation::Identity, Activation::ReLU, Activation::Tanh};
  for (int i = 0; i < 27; ++i) {
    std::vector<int> sizes{1 + static_cast<int>(rng.index(4)), 1 + static_cast<int>(rng.index(5)),
                           1 + static_cast<int>(rng.index(5)), 1 + static_cast<int>(rng.index(3))};
    Mlp m = mlp_init(sizes, {acts[i % 3], acts[(i / 3) % 3]}, acts[(i / 9) % 3], i);
    for (double& p : m.params) p = rng.uniform(-1.0, 1.0);
    std::vector<double> x(sizes.front()), up(sizes.back());
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    for (double& v : up) v = rng.uniform(-1.0, 1.0);
    auto dot = [&](const Mlp& net, const std::vector<double>& in) {
      const auto y = forward(net, in);
      double s = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) s += up[k] * y[k];
      return s;
    };
    const MlpGradients g = backward(m, x, up);
    const auto fd = oracle::central_gradient(
        [&](const std::vector<double>& p) {
          Mlp c = m;
          c.params = p;
          return dot(c, x);
        },
        m.params, 1e-5);
    const auto fdx = oracle::central_gradient([&](const std::vector<double>& in) { return dot(m, in); }, x, 1e-5);
    CHECK(oracle::max_relative_error(g.params, fd) < 1e-4);
    CHECK(oracle::max_relative_error(g.input, fdx) < 1e-4);
  }
}

TEST_CASE("optimizers") {
  Mlp m = linear_2x1();
  CHECK(sgd_step(m, std::vector<double>{5.0, -3.0}, 0.0) == m);
  m.params = {1.0, 0.0};
  CHECK(sgd_step(m, std::vector<double>{0.5, 0.0}, 0.1).params[0] == doctest::Approx(0.95).epsilon(1e-15));

  for (double g : {1e-4, 0.3, 250.0, -7.0}) {
    AdamState st = AdamState::zeros(2);
    const Mlp stepped = adam_step(m, std::vector<double>{g, 0.0}, st, 0.01);
    CHECK(std::fabs(stepped.params[0] - m.params[0]) == doctest::Approx(0.01).epsilon(1e-3));
    CHECK(stepped.params[1] == m.params[1]);
    CHECK(st.step_count == 1);
  }
  AdamState st = AdamState::zeros(2);
  CHECK(adam_step(m, std::vector<double>{1.0, 1.0}, st, 0.0) == m);
  CHECK_THROWS_AS(sgd_step(m, std::vector<double>{1.0}, 0.1), DomainError);

  Rng rng(2);
  std::vector<double> p(6, 0.0), grads(6);
  AdamState big = AdamState::zeros(6);
  for (int k = 0; k < 200; ++k) {
    for (double& v : grads) v = rng.uniform(-1e6, 1e6);
    adam_update(p, grads, big, 0.1);
    sgd_update(p, grads, 1e-9);
  }
  for (double v : p) CHECK(std::isfinite(v));
}

TEST_CASE("softmax") {
  const auto u = softmax(std::vector<double>{2.0, 2.0, 2.0, 2.0});
  for (double v : u) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
  const auto p = softmax(std::vector<double>{std::log(3.0), 0.0});
  CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-14));
  const auto hot = softmax(std::vector<double>{5.0, 0.0}, 100.0);
  CHECK(std::fabs(hot[0] - 0.5) < 0.02);
  CHECK_THROWS_AS(softmax(std::vector<double>{1.0}, 0.0), DomainError);

  Rng rng(8);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> l(5), shifted(5);
    const double c = rng.uniform(-100.0, 100.0);
    for (std::size_t i = 0; i < l.size(); ++i) {
      l[i] = rng.uniform(-30.0, 30.0);
      shifted[i] = l[i] + c;
    }
    const auto a = softmax(l), b = softmax(shifted);
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      total += a[i];
      CHECK(std::fabs(a[i] - b[i]) < 1e-12);
    }
    CHECK(std::fabs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("kl_softmax") {
  const std::vector<double> t{0.3, -1.0, 2.0};
  CHECK(kl_softmax(t, t) == doctest::Approx(0.0));
  const double expected = (2.0 / 3.0) * std::log(4.0 / 3.0) + (1.0 / 3.0) * std::log(2.0 / 3.0);
  CHECK(kl_softmax(std::vector<double>{std::log(2.0), 0.0}, std::vector<double>{0.0, 0.0}) ==
        doctest::Approx(expected).epsilon(1e-13));
  CHECK_THROWS_AS(kl_softmax(t, std::vector<double>{0.0, 0.0}), DomainError);

  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> a(4), b(4);
    for (double& v : a) v = rng.uniform(-5.0, 5.0);
    for (double& v : b) v = rng.uniform(-5.0, 5.0);
    const double temp = rng.uniform(0.2, 3.0);
    CHECK(kl_softmax(a, b, temp) >= -1e-12);
    const auto g = kl_softmax_grad(a, b, temp);
    const auto fd = oracle::central_gradient([&](const std::vector<double>& s) { return kl_softmax(a, s, temp); }, b);
    CHECK(oracle::max_relative_error(g, fd, 1e-6) < 1e-4);
  }
  // shifting the student logits leaves the distribution and the KL unchanged
  CHECK(kl_softmax(t, std::vector<double>{1.3, 0.0, 3.0}) == doctest::Approx(kl_softmax(t, std::vector<double>{2.3, 1.0, 4.0})));
  CHECK(kl_softmax(t, std::vector<double>{t[0] + 4, t[1] + 4, t[2] + 4}) < 1e-12);
}

TEST_CASE("kl_gaussian") {
  const std::vector<double> m{0.3, -0.2}, s{-0.5, 0.1};
  CHECK(kl_gaussian(m, s, m, s) == doctest::Approx(0.0));
  CHECK(kl_gaussian(std::vector<double>{1.0}, std::vector<double>{0.0}, std::vector<double>{0.0},
                    std::vector<double>{0.0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS(kl_gaussian(m, s, std::vector<double>{0.0}, std::vector<double>{0.0}));

  const GaussianKl k = kl_gaussian_with_grad(m, s, std::vector<double>{0.0, 0.4}, std::vector<double>{0.2, -0.3});
  const auto fd_mean = oracle::central_gradient(
      [&](const std::vector<double>& x) { return kl_gaussian(m, s, x, std::vector<double>{0.2, -0.3}); }, {0.0, 0.4});
  const auto fd_std = oracle::central_gradient(
      [&](const std::vector<double>& x) { return kl_gaussian(m, s, std::vector<double>{0.0, 0.4}, x); }, {0.2, -0.3});
  CHECK(oracle::max_relative_error(k.d_student_mean, fd_mean) < 1e-6);
  CHECK(oracle::max_relative_error(k.d_student_log_std, fd_std) < 1e-6);
}

TEST_CASE("kl_gaussian matches a Monte-Carlo estimate") {
  const double tm = 0.4, ts = std::log(0.7), sm = -0.3, ss = std::log(1.2);
  const double exact =
      kl_gaussian(std::vector<double>{tm}, std::vector<double>{ts}, std::vector<double>{sm}, std::vector<double>{ss});
  auto log_pdf = [](double x, double mean, double log_std) {
    const double z = (x - mean) / std::exp(log_std);
    return -0.5 * z * z - log_std - 0.5 * std::log(2.0 * M_PI);
  };
  Rng rng(99);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = tm + std::exp(ts) * rng.normal();
    sum += log_pdf(x, tm, ts) - log_pdf(x, sm, ss);
  }
  CHECK(std::fabs(sum / n - exact) < 0.01 * exact);
}

TEST_CASE("mlp serialization round trips") {
  Mlp m = mlp_init({3, 4, 2}, {Activation::Tanh}, Activation::ReLU, 12);
  std::stringstream buf;
  write_mlp(buf, m);
  CHECK(read_mlp(buf) == m);
  std::stringstream junk("not a network");
  CHECK_THROWS(read_mlp(junk));
}
