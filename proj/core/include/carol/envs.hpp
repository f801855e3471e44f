#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "carol/task.hpp"

namespace carol {

void validate(const GridSlipSpec& spec);
void validate(const FrictionCarSpec& spec);
void validate(const WindyLanderSpec& spec);

TaskHandle make_gridslip(const GridSlipSpec& spec, std::uint64_t seed = 0, int episode_cap = 100);
TaskHandle make_frictioncar(const FrictionCarSpec& spec, std::uint64_t seed = 0, int episode_cap = 200);
TaskHandle make_windylander(const WindyLanderSpec& spec, std::uint64_t seed = 0, int episode_cap = 300);

namespace gridslip {

enum Move : int { Up = 0, Right = 1, Down = 2, Left = 3 };
inline constexpr int kActions = 4;

int cell_index(const GridSlipSpec& spec, Cell c);
Cell cell_at(const GridSlipSpec& spec, int index);
State one_hot(const GridSlipSpec& spec, Cell c);
/// Index of the single set entry of a one-hot state; throws DomainError otherwise.
int state_index(std::span<const double> state);
bool is_terminal(const GridSlipSpec& spec, Cell c);
/// Deterministic successor of c under move, honouring walls.
Cell neighbour(const GridSlipSpec& spec, Cell c, int move);
/// Reward collected when a step lands in c.
double entry_reward(const GridSlipSpec& spec, Cell c);

}  // namespace gridslip

/// Exact dynamics of a tabular task.
struct TabularDynamics {
  int n_states = 0;
  int n_actions = 0;
  int start_state = 0;
  /// transition[a][s * n_states + s2] = P(s2 | s, a). Terminal rows self-loop.
  std::vector<std::vector<double>> transition;
  /// Reward for any step that lands in s2.
  std::vector<double> entry_reward;
  std::vector<bool> terminal;

  double prob(int a, int s, int s2) const { return transition[a][static_cast<std::size_t>(s) * n_states + s2]; }
};

/// Per-action row-stochastic matrices matching env_step's law; GridSlip only.
TabularDynamics exact_transition_matrix(const TaskHandle& task);

}  // namespace carol
