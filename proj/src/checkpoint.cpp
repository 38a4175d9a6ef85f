#include "evgraph/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "evgraph/errors.hpp"

namespace evgraph {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("truncated checkpoint '" + path + "'");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const GraphReasoner& model, std::uint64_t step) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  const ModelConfig& c = model.config();
  out.write(kCheckpointMagic, 8);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, c.mode == Mode::kMtl ? 1 : 0);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.input_dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.hidden));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.mlp_hidden));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.evidence_hidden));
  put<double>(out, c.leaky_slope);
  put<double>(out, c.lambda);
  put<std::uint64_t>(out, step);
  std::uint32_t count = 0;
  model.visit([&](const std::string&, const Matrix&) { ++count; });
  put<std::uint32_t>(out, count);
  model.visit([&](const std::string& name, const Matrix& p) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.cols()));
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j) put<double>(out, p(i, j));
  });
  if (!out) throw Error("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  char magic[8] = {};
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw DataError("'" + path + "' is not a checkpoint file");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  ModelConfig c;
  const auto mode = get<std::uint32_t>(in, path);
  if (mode > 1) throw DataError("checkpoint has unknown mode " + std::to_string(mode));
  c.mode = mode == 1 ? Mode::kMtl : Mode::kStl;
  c.input_dim = static_cast<int>(get<std::uint32_t>(in, path));
  c.hidden = static_cast<int>(get<std::uint32_t>(in, path));
  c.mlp_hidden = static_cast<int>(get<std::uint32_t>(in, path));
  c.evidence_hidden = static_cast<int>(get<std::uint32_t>(in, path));
  c.leaky_slope = get<double>(in, path);
  c.lambda = get<double>(in, path);
  Checkpoint ckpt;
  ckpt.step = get<std::uint64_t>(in, path);
  ckpt.model = GraphReasoner::zeros(c);

  std::map<std::string, Matrix> tensors;
  const auto count = get<std::uint32_t>(in, path);
  for (std::uint32_t t = 0; t < count; ++t) {
    const auto len = get<std::uint32_t>(in, path);
    if (len > 4096) throw DataError("checkpoint tensor name too long");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw DataError("truncated checkpoint '" + path + "'");
    const auto rows = get<std::uint32_t>(in, path);
    const auto cols = get<std::uint32_t>(in, path);
    if (std::uint64_t{rows} * cols > (std::uint64_t{1} << 28)) throw DataError("checkpoint tensor '" + name + "' is too large");
    Matrix m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
      for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = get<double>(in, path);
    tensors[name] = std::move(m);
  }
  ckpt.model.visit([&](const std::string& name, Matrix& p) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw DataError("checkpoint is missing tensor '" + name + "'");
    if (it->second.rows() != p.rows() || it->second.cols() != p.cols())
      throw DataError("checkpoint tensor '" + name + "' has the wrong shape");
    p = it->second;
    tensors.erase(it);
  });
  if (!tensors.empty()) throw DataError("checkpoint has unexpected tensor '" + tensors.begin()->first + "'");
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes in checkpoint '" + path + "'");
  return ckpt;
}

}  // namespace evgraph
