#include "carol/task.hpp"

#include <algorithm>
#include <set>

#include "carol/envs.hpp"
#include "carol/error.hpp"

namespace carol {

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::GridSlip: return "GridSlip";
    case EnvKind::FrictionCar: return "FrictionCar";
    case EnvKind::WindyLander: return "WindyLander";
  }
  return "unknown";
}

EnvKind env_kind_from_string(std::string_view name) {
  if (name == "GridSlip") return EnvKind::GridSlip;
  if (name == "FrictionCar") return EnvKind::FrictionCar;
  if (name == "WindyLander") return EnvKind::WindyLander;
  throw ConfigError("unknown environment kind '" + std::string(name) + "'");
}

void validate(const ActionSpec& spec) {
  if (const auto* d = std::get_if<DiscreteActions>(&spec)) {
    if (d->n <= 0) throw ConfigError("discrete action count must be positive");
    return;
  }
  const auto& box = std::get<BoxActions>(spec);
  if (box.lo.empty() || box.lo.size() != box.hi.size())
    throw ConfigError("action box bounds must be non-empty and of equal length");
  for (std::size_t d = 0; d < box.lo.size(); ++d)
    if (!(box.lo[d] < box.hi[d])) throw ConfigError("action box requires lo < hi in every dimension");
}

bool is_discrete(const ActionSpec& spec) { return std::holds_alternative<DiscreteActions>(spec); }

int action_count(const ActionSpec& spec) {
  if (const auto* d = std::get_if<DiscreteActions>(&spec)) return d->n;
  throw UnsupportedError("action count requested for a continuous action space");
}

int action_width(const ActionSpec& spec) {
  if (const auto* d = std::get_if<DiscreteActions>(&spec)) return d->n;
  return static_cast<int>(std::get<BoxActions>(spec).lo.size());
}

void append_encoded_action(const ActionSpec& spec, const Action& action, std::vector<double>& out) {
  if (const auto* d = std::get_if<DiscreteActions>(&spec)) {
    const int* idx = std::get_if<int>(&action);
    if (idx == nullptr) throw DomainError("continuous action given to a discrete action space");
    if (*idx < 0 || *idx >= d->n) throw DomainError("action index " + std::to_string(*idx) + " out of range");
    const std::size_t base = out.size();
    out.resize(base + d->n, 0.0);
    out[base + *idx] = 1.0;
    return;
  }
  const auto& box = std::get<BoxActions>(spec);
  const auto* v = std::get_if<std::vector<double>>(&action);
  if (v == nullptr) throw DomainError("discrete action given to a continuous action space");
  if (v->size() != box.lo.size()) throw DomainError("action dimension mismatch");
  out.insert(out.end(), v->begin(), v->end());
}

std::vector<double> encode_action(const ActionSpec& spec, const Action& action) {
  std::vector<double> out;
  out.reserve(action_width(spec));
  append_encoded_action(spec, action, out);
  return out;
}

std::vector<std::string> context_param_names(EnvKind kind) {
  switch (kind) {
    case EnvKind::GridSlip: return {"slip_p"};
    case EnvKind::FrictionCar: return {"friction_mu"};
    case EnvKind::WindyLander: return {"gravity_g", "wind_f"};
  }
  return {};
}

namespace {

EnvKind kind_of(const EnvSpec& spec) {
  switch (spec.index()) {
    case 0: return EnvKind::GridSlip;
    case 1: return EnvKind::FrictionCar;
    default: return EnvKind::WindyLander;
  }
}

double* context_slot(EnvSpec& spec, const std::string& name) {
  if (auto* g = std::get_if<GridSlipSpec>(&spec)) {
    if (name == "slip_p") return &g->slip_p;
  } else if (auto* f = std::get_if<FrictionCarSpec>(&spec)) {
    if (name == "friction_mu") return &f->friction_mu;
  } else if (auto* w = std::get_if<WindyLanderSpec>(&spec)) {
    if (name == "gravity_g") return &w->gravity_g;
    if (name == "wind_f") return &w->wind_f;
  }
  return nullptr;
}

SpaceSpec space_of(const EnvSpec& spec) {
  SpaceSpec space;
  space.env = kind_of(spec);
  if (const auto* g = std::get_if<GridSlipSpec>(&spec)) {
    space.state_dim = g->width * g->height;
    space.action = DiscreteActions{gridslip::kActions};
  } else if (std::holds_alternative<FrictionCarSpec>(spec)) {
    space.state_dim = 2;
    space.action = BoxActions{{-1.0}, {1.0}, true};
  } else {
    const auto& w = std::get<WindyLanderSpec>(spec);
    space.state_dim = 4;
    if (w.action_mode == LanderActionMode::Discrete9)
      space.action = DiscreteActions{9};
    else
      space.action = BoxActions{{-1.0, -1.0}, {1.0, 1.0}, true};
  }
  return space;
}

}  // namespace

EnvSpec with_context(EnvSpec base, const std::map<std::string, double>& params) {
  const auto names = context_param_names(kind_of(base));
  for (const auto& name : names)
    if (!params.contains(name)) throw ConfigError("missing context parameter '" + name + "'");
  for (const auto& [name, value] : params) {
    double* slot = context_slot(base, name);
    if (slot == nullptr)
      throw ConfigError("unknown context parameter '" + name + "' for " + std::string(to_string(kind_of(base))));
    *slot = value;
  }
  return base;
}

TaskHandle::TaskHandle(EnvSpec spec, std::uint64_t seed, int episode_cap)
    : spec_(std::move(spec)), seed_(seed), episode_cap_(episode_cap) {
  if (episode_cap_ <= 0) throw ConfigError("episode_cap must be positive");
  std::visit([](const auto& s) { validate(s); }, spec_);
  space_ = space_of(spec_);
}

EnvKind TaskHandle::env_kind() const { return kind_of(spec_); }

std::map<std::string, double> TaskHandle::context_params() const {
  std::map<std::string, double> out;
  EnvSpec copy = spec_;
  for (const auto& name : context_param_names(env_kind())) out[name] = *context_slot(copy, name);
  return out;
}

}  // namespace carol
