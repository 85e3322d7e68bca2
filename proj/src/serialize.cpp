#include "etd/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace etd {
namespace {

constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

struct Reader {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  std::uint8_t u8() {
    if (pos >= bytes.size()) throw std::runtime_error("model file truncated");
    return bytes[pos++];
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const NeuralModel& model) {
  std::vector<std::uint8_t> out;
  out.push_back('E');
  out.push_back('T');
  out.push_back('D');
  out.push_back('M');
  put_u32(out, kFormatVersion);
  put_f64(out, model.temperature);
  put_u32(out, std::uint32_t(model.input_shape.size()));
  for (std::size_t d : model.input_shape) put_u64(out, d);
  put_u32(out, std::uint32_t(model.layers.size()));
  for (const LayerSpec& s : model.layers) {
    out.push_back(std::uint8_t(s.kind));
    out.push_back(std::uint8_t(s.activation));
    out.push_back(std::uint8_t(s.return_sequences ? 1 : 0));
    put_u64(out, s.units);
    put_f64(out, s.rate);
    put_u64(out, s.rows);
    put_u64(out, s.cols);
  }
  for (const LayerParams& lp : model.params) {
    put_u32(out, std::uint32_t(lp.tensors.size()));
    for (const Tensor& t : lp.tensors) {
      put_u32(out, std::uint32_t(t.rank()));
      for (std::size_t d : t.shape) put_u64(out, d);
      for (double v : t.values) put_f64(out, v);
    }
  }
  return out;
}

NeuralModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  if (bytes.size() < 4 || bytes[0] != 'E' || bytes[1] != 'T' || bytes[2] != 'D' ||
      bytes[3] != 'M')
    throw std::runtime_error("not a model file (bad magic)");
  r.pos = 4;
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion)
    throw std::runtime_error("unsupported model format version " +
                             std::to_string(version));
  NeuralModel model;
  model.temperature = r.f64();
  const std::uint32_t in_rank = r.u32();
  model.input_shape.resize(in_rank);
  for (auto& d : model.input_shape) d = r.u64();
  const std::uint32_t nlayers = r.u32();
  model.layers.resize(nlayers);
  for (LayerSpec& s : model.layers) {
    s.kind = LayerKind(r.u8());
    s.activation = Activation(r.u8());
    s.return_sequences = r.u8() != 0;
    s.units = r.u64();
    s.rate = r.f64();
    s.rows = r.u64();
    s.cols = r.u64();
  }
  model.params.resize(nlayers);
  for (LayerParams& lp : model.params) {
    const std::uint32_t nt = r.u32();
    for (std::uint32_t t = 0; t < nt; ++t) {
      const std::uint32_t rank = r.u32();
      std::vector<std::size_t> shape(rank);
      for (auto& d : shape) d = r.u64();
      std::vector<double> values(shape_product(shape));
      for (double& v : values) v = r.f64();
      lp.tensors.push_back(Tensor(std::move(shape), std::move(values)));
    }
  }
  if (r.pos != bytes.size())
    throw std::runtime_error("model file has trailing bytes");
  return model;
}

void save_model(const NeuralModel& model, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

NeuralModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::uint64_t model_hash(const NeuralModel& model) {
  const std::vector<std::uint8_t> bytes = serialize_model(model);
  return fnv1a64(bytes.data(), bytes.size());
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[std::size_t(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace etd
