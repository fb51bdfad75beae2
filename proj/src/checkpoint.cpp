#include "suflow/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "suflow/errors.hpp"

namespace suflow {

namespace {

constexpr char kMagic[8] = {'S', 'U', 'F', 'L', 'O', 'W', '0', '1'};
constexpr std::size_t kHeader = 8 + 3 * 8 + 5 * 8;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const std::uint8_t* p) { return std::bit_cast<double>(get_u64(p)); }

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const FlowState& state, const FlowParams& params) {
  const MapField& f = state.field;
  std::vector<std::uint8_t> out;
  out.reserve(kHeader + f.values.size() * 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(kMagic[i]));
  put_u64(out, static_cast<std::uint64_t>(f.grid.nx));
  put_u64(out, static_cast<std::uint64_t>(f.grid.ny));
  put_u64(out, static_cast<std::uint64_t>(f.k));
  put_f64(out, f.grid.L);
  put_f64(out, params.alpha);
  put_f64(out, params.r_scale);
  put_f64(out, state.t);
  put_f64(out, state.cumulative_dissipation);
  for (double v : f.values) put_f64(out, v);
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, std::optional<double> R_M) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw CheckpointError("not a checkpoint");
  if (bytes.size() < kHeader) throw CheckpointError("truncated checkpoint header");
  const std::uint8_t* p = bytes.data() + 8;
  const std::uint64_t nx = get_u64(p), ny = get_u64(p + 8), k = get_u64(p + 16);
  const std::uint64_t limit = static_cast<std::uint64_t>(std::numeric_limits<int>::max());
  if (nx > limit || ny > limit || k > limit) throw CheckpointError("dimension overflow");
  const std::uint64_t max_values = std::numeric_limits<std::uint64_t>::max() / 8;
  if (nx != 0 && ny > max_values / nx) throw CheckpointError("dimension overflow");
  if (nx * ny != 0 && k > max_values / (nx * ny)) throw CheckpointError("dimension overflow");
  const std::uint64_t expected = nx * ny * k;
  const std::uint64_t got = (bytes.size() - kHeader) / 8;
  if (got != expected || (bytes.size() - kHeader) % 8 != 0)
    throw CheckpointError("expected " + std::to_string(expected) + " values, got " +
                          std::to_string(got));
  Checkpoint c;
  const double L = get_f64(p + 24);
  c.alpha = get_f64(p + 32);
  c.r_scale = get_f64(p + 40);
  TorusGrid grid;
  grid.nx = static_cast<int>(nx);
  grid.ny = static_cast<int>(ny);
  grid.L = L;
  grid.R_M = R_M ? *R_M : 0.25 * L;
  try {
    grid.validate();
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("invalid checkpoint grid: ") + e.what());
  }
  if (k < 3) throw CheckpointError("invalid checkpoint target dimension");
  c.state.t = get_f64(p + 48);
  c.state.cumulative_dissipation = get_f64(p + 56);
  c.state.step_count = 0;
  c.state.field = MapField(grid, static_cast<int>(k));
  const std::uint8_t* v = bytes.data() + kHeader;
  for (std::size_t i = 0; i < c.state.field.values.size(); ++i)
    c.state.field.values[i] = get_f64(v + 8 * i);
  return c;
}

void write_checkpoint(const std::string& path, const FlowState& state, const FlowParams& params) {
  const auto bytes = encode_checkpoint(state, params);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointError("failed writing '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path, std::optional<double> R_M) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes, R_M);
}

}  // namespace suflow
