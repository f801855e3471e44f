#include <fstream>

#include "binary_io.hpp"
#include "space_io.hpp"
#include "carol/knowledge.hpp"

namespace carol {

namespace {

constexpr char kMagic[9] = "CAROLKNW";
constexpr std::uint32_t kVersion = 1;

}  // namespace

namespace bin {

void write_space(std::ostream& out, const SpaceSpec& space) {
  bin::put_u8(out, static_cast<std::uint8_t>(space.env));
  bin::put_u32(out, static_cast<std::uint32_t>(space.state_dim));
  if (const auto* d = std::get_if<DiscreteActions>(&space.action)) {
    bin::put_u8(out, 0);
    bin::put_u32(out, static_cast<std::uint32_t>(d->n));
    return;
  }
  const auto& box = std::get<BoxActions>(space.action);
  bin::put_u8(out, 1);
  bin::put_u32(out, static_cast<std::uint32_t>(box.lo.size()));
  for (std::size_t k = 0; k < box.lo.size(); ++k) {
    bin::put_f64(out, box.lo[k]);
    bin::put_f64(out, box.hi[k]);
  }
  bin::put_u8(out, box.clamps ? 1 : 0);
}

SpaceSpec read_space(std::istream& in) {
  SpaceSpec space;
  const std::uint8_t env = bin::get_u8(in);
  if (env > 2) throw DataError("unknown environment code in knowledge file");
  space.env = static_cast<EnvKind>(env);
  space.state_dim = static_cast<int>(bin::get_u32(in));
  if (bin::get_u8(in) == 0) {
    space.action = DiscreteActions{static_cast<int>(bin::get_u32(in))};
  } else {
    BoxActions box;
    const std::uint32_t n = bin::get_u32(in);
    if (n > 1024) throw DataError("implausible action dimension in knowledge file");
    for (std::uint32_t k = 0; k < n; ++k) {
      box.lo.push_back(bin::get_f64(in));
      box.hi.push_back(bin::get_f64(in));
    }
    box.clamps = bin::get_u8(in) != 0;
    space.action = std::move(box);
  }
  return space;
}

}  // namespace bin

namespace {

using bin::read_space;
using bin::write_space;

void write_policy(std::ostream& out, const Policy& policy) {
  if (const auto* t = std::get_if<TabularPolicy>(&policy)) {
    bin::put_u8(out, 0);
    bin::put_u32(out, static_cast<std::uint32_t>(t->n_actions));
    bin::put_u32(out, static_cast<std::uint32_t>(t->actions.size()));
    for (int a : t->actions) bin::put_u32(out, static_cast<std::uint32_t>(a));
    return;
  }
  const auto& n = std::get<NetworkPolicy>(policy);
  bin::put_u8(out, 1);
  bin::put_u8(out, static_cast<std::uint8_t>(n.family));
  write_mlp(out, n.net);
}

Policy read_policy(std::istream& in) {
  if (bin::get_u8(in) == 0) {
    TabularPolicy t;
    t.n_actions = static_cast<int>(bin::get_u32(in));
    const std::uint32_t n = bin::get_u32(in);
    if (n > (1u << 24)) throw DataError("implausible tabular policy size");
    t.actions.resize(n);
    for (int& a : t.actions) {
      a = static_cast<int>(bin::get_u32(in));
      if (a < 0 || a >= t.n_actions) throw DataError("tabular policy action out of range");
    }
    return t;
  }
  const std::uint8_t family = bin::get_u8(in);
  if (family > 1) throw DataError("unknown policy family code");
  NetworkPolicy n;
  n.family = static_cast<PolicyFamily>(family);
  n.net = read_mlp(in);
  return n;
}

void write_q(std::ostream& out, const QFunction& q) {
  if (const auto* t = std::get_if<TabularQ>(&q)) {
    bin::put_u8(out, 0);
    bin::put_u32(out, static_cast<std::uint32_t>(t->n_states));
    bin::put_u32(out, static_cast<std::uint32_t>(t->n_actions));
    bin::put_f64(out, t->gamma);
    for (double v : t->values) bin::put_f64(out, v);
    return;
  }
  bin::put_u8(out, 1);
  write_mlp(out, std::get<NetworkQ>(q).net);
}

QFunction read_q(std::istream& in) {
  if (bin::get_u8(in) == 0) {
    const int n_states = static_cast<int>(bin::get_u32(in));
    const int n_actions = static_cast<int>(bin::get_u32(in));
    if (static_cast<std::uint64_t>(n_states) * n_actions > (1u << 24)) throw DataError("implausible Q table size");
    TabularQ t = TabularQ::zeros(n_states, n_actions, bin::get_f64(in));
    for (double& v : t.values) v = bin::get_f64(in);
    return t;
  }
  return NetworkQ{read_mlp(in)};
}

}  // namespace

void write_knowledge(std::ostream& out, const Knowledge& k) {
  bin::put_magic(out, kMagic);
  bin::put_u32(out, kVersion);
  bin::put_u8(out, static_cast<std::uint8_t>(k.body.index()));
  write_space(out, k.space);
  if (const auto* p = std::get_if<PolicyK>(&k.body)) {
    write_policy(out, p->policy);
  } else if (const auto* v = std::get_if<ValueK>(&k.body)) {
    write_q(out, v->q);
  } else {
    const auto& ac = std::get<ActorCriticK>(k.body);
    write_policy(out, ac.policy);
    write_q(out, ac.q);
  }
  if (!out) throw IoError("failed writing knowledge");
}

Knowledge read_knowledge(std::istream& in) {
  bin::expect_magic(in, kMagic);
  if (const std::uint32_t version = bin::get_u32(in); version != kVersion)
    throw DataError("unsupported knowledge format version " + std::to_string(version));
  const std::uint8_t kind = bin::get_u8(in);
  Knowledge k;
  k.space = read_space(in);
  switch (kind) {
    case 0: k.body = PolicyK{read_policy(in)}; break;
    case 1: k.body = ValueK{read_q(in)}; break;
    case 2: {
      Policy p = read_policy(in);
      k.body = ActorCriticK{std::move(p), read_q(in)};
      break;
    }
    default: throw DataError("unknown knowledge kind code " + std::to_string(kind));
  }
  return k;
}

void save_knowledge(const std::string& path, const Knowledge& k) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_knowledge(out, k);
}

Knowledge load_knowledge(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_knowledge(in);
}

}  // namespace carol
