#include <doctest.h>

#include <cmath>
#include <sstream>

#include "carol/carol.hpp"

using namespace carol;

TEST_CASE("tabular policies lift to near one-hot distributions") {
  const TabularPolicy p{{2, 0}, 4};
  const auto probs = action_probabilities(p, std::vector<double>{1.0, 0.0});
  CHECK(probs[2] == doctest::Approx(kTabularLiftMass).epsilon(1e-12));
  double total = 0.0;
  for (double v : probs) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::get<int>(greedy_action(p, std::vector<double>{0.0, 1.0})) == 0);
}

TEST_CASE("argmax ties go to the lowest index") {
  CHECK(argmax_lowest(std::vector<double>{1.0, 3.0, 3.0}) == 1);
  CHECK_THROWS_AS(argmax_lowest(std::vector<double>{}), DomainError);
}

TEST_CASE("gaussian policies clamp the log standard deviation") {
  const SpaceSpec car = make_frictioncar(FrictionCarSpec{}).space();
  NetworkPolicy p = make_policy_net(car, {{3}, Activation::Tanh, 1});
  CHECK(p.family == PolicyFamily::DiagonalGaussian);
  CHECK(p.net.output_size() == 2);
  p.net.params.back() = 50.0;
  const GaussianParams g = gaussian_params(p, std::vector<double>{0.0, 0.0});
  CHECK(g.log_std[0] <= kMaxLogStd);
}

TEST_CASE("knowledge round trips through files") {
  const TaskHandle g = make_gridslip(GridSlipSpec{});
  const Knowledge value{ValueK{value_iteration(g, 0.9)}, g.space()};
  std::stringstream a;
  write_knowledge(a, value);
  CHECK(read_knowledge(a) == value);

  const SpaceSpec car = make_frictioncar(FrictionCarSpec{}).space();
  const Knowledge ac{ActorCriticK{make_policy_net(car, {{4}, Activation::Tanh, 2}), make_q_net(car, {{5}, Activation::ReLU, 3})},
                     car};
  std::stringstream b;
  write_knowledge(b, ac);
  const Knowledge back = read_knowledge(b);
  CHECK(back == ac);
  CHECK(knowledge_kind_name(back) != knowledge_kind_name(value));

  std::stringstream junk("garbage");
  CHECK_THROWS(read_knowledge(junk));
}

TEST_CASE("knowledge must match the task spaces") {
  const SpaceSpec grid = make_gridslip(GridSlipSpec{}).space();
  GridSlipSpec small;
  small.width = 3;
  small.height = 3;
  small.goal = {2, 2};
  CHECK_NOTHROW(check_compatible(grid, grid));
  CHECK_THROWS_AS(check_compatible(grid, make_gridslip(small).space()), DomainError);
  CHECK_THROWS_AS(check_compatible(grid, make_frictioncar(FrictionCarSpec{}).space()), DomainError);
}
