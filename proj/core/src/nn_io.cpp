#include <istream>
#include <ostream>

#include "binary_io.hpp"
#include "carol/nn.hpp"

namespace carol {

namespace {

constexpr char kMagic[9] = "CAROLMLP";
constexpr std::uint32_t kVersion = 1;

Activation activation_from_code(std::uint8_t code) {
  if (code > 2) throw DataError("unknown activation code " + std::to_string(code));
  return static_cast<Activation>(code);
}

}  // namespace

void write_mlp(std::ostream& out, const Mlp& mlp) {
  bin::put_magic(out, kMagic);
  bin::put_u32(out, kVersion);
  bin::put_u32(out, static_cast<std::uint32_t>(mlp.layer_sizes.size()));
  for (int s : mlp.layer_sizes) bin::put_u32(out, static_cast<std::uint32_t>(s));
  for (Activation a : mlp.activations) bin::put_u8(out, static_cast<std::uint8_t>(a));
  bin::put_u8(out, static_cast<std::uint8_t>(mlp.output_activation));
  bin::put_u64(out, mlp.params.size());
  for (double p : mlp.params) bin::put_f64(out, p);
  if (!out) throw IoError("failed writing mlp");
}

Mlp read_mlp(std::istream& in) {
  bin::expect_magic(in, kMagic);
  if (const std::uint32_t version = bin::get_u32(in); version != kVersion)
    throw DataError("unsupported mlp format version " + std::to_string(version));
  const std::uint32_t n = bin::get_u32(in);
  if (n < 2 || n > 64) throw DataError("implausible mlp layer count " + std::to_string(n));
  Mlp mlp;
  for (std::uint32_t k = 0; k < n; ++k) {
    const std::uint32_t s = bin::get_u32(in);
    if (s == 0 || s > (1u << 20)) throw DataError("implausible mlp layer size");
    mlp.layer_sizes.push_back(static_cast<int>(s));
  }
  for (std::uint32_t k = 0; k + 2 < n; ++k) mlp.activations.push_back(activation_from_code(bin::get_u8(in)));
  mlp.output_activation = activation_from_code(bin::get_u8(in));
  const std::uint64_t count = bin::get_u64(in);
  if (count != param_count(mlp.layer_sizes)) throw DataError("mlp parameter count does not match its layer sizes");
  mlp.params.resize(count);
  for (double& p : mlp.params) p = bin::get_f64(in);
  return mlp;
}

}  // namespace carol
