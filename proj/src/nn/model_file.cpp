#include "qd/nn/model_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "qd/error.hpp"

namespace qd::nn {

namespace {

constexpr char kMagic[4] = {'G', 'F', 'N', 'N'};
constexpr std::uint32_t kMaxLayers = 1024;


template <typename U>
void put(std::vector<char>& out, U value) {
  static_assert(std::is_unsigned_v<U>);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

void put_f32(std::vector<char>& out, float v) { put(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::vector<char>& out, double v) { put(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(const std::vector<char>& buf) : buf_(buf) {}

  template <typename U>
  U get() {
    if (pos_ + sizeof(U) > buf_.size()) throw FormatError("model file is truncated");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<U>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }
  float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  const std::vector<char>& buf_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  if (model.params.size() != model.spec.parameter_count())
    throw ModelMismatch("parameter count does not match the spec");
  std::vector<char> out(kMagic, kMagic + 4);
  put(out, kModelFileVersion);
  put(out, static_cast<std::uint32_t>(model.spec.in_channels));
  put(out, static_cast<std::uint32_t>(model.spec.in_height));
  put(out, static_cast<std::uint32_t>(model.spec.in_width));
  put(out, static_cast<std::uint32_t>(model.spec.layers.size()));
  for (const LayerSpec& l : model.spec.layers) {
    put(out, static_cast<std::uint32_t>(l.kind));
    put(out, static_cast<std::uint32_t>(l.out));
    put(out, static_cast<std::uint32_t>(l.kernel));
  }
  put(out, static_cast<std::uint32_t>(model.grid ? 1 : 0));
  if (model.grid) {
    put(out, static_cast<std::uint32_t>(model.grid->num_axes));
    put(out, static_cast<std::uint32_t>(model.grid->num_rolls));
    put_f64(out, model.grid->cap_half_angle_deg);
    put_f64(out, model.grid->roll_step_deg);
  }
  put(out, static_cast<std::uint64_t>(model.params.size()));
  for (float v : model.params) put_f32(out, v);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("failed writing " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) throw FormatError("not a GFNN model file");
  std::vector<char> body(buf.begin() + 4, buf.end());
  Reader r(body);
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFileVersion) throw FormatError("unsupported model file version " + std::to_string(version));

  ModelFile m;
  m.spec.in_channels = static_cast<int>(r.get<std::uint32_t>());
  m.spec.in_height = static_cast<int>(r.get<std::uint32_t>());
  m.spec.in_width = static_cast<int>(r.get<std::uint32_t>());
  const auto layers = r.get<std::uint32_t>();
  if (layers > kMaxLayers) throw FormatError("implausible layer count");
  for (std::uint32_t i = 0; i < layers; ++i) {
    LayerSpec l;
    const auto kind = r.get<std::uint32_t>();
    if (kind < 1 || kind > 4) throw FormatError("unknown layer kind " + std::to_string(kind));
    l.kind = static_cast<LayerKind>(kind);
    l.out = static_cast<int>(r.get<std::uint32_t>());
    l.kernel = static_cast<int>(r.get<std::uint32_t>());
    m.spec.layers.push_back(l);
  }
  const auto has_grid = r.get<std::uint32_t>();
  if (has_grid > 1) throw FormatError("bad grid flag");
  if (has_grid) {
    GridParams g;
    g.num_axes = static_cast<int>(r.get<std::uint32_t>());
    g.num_rolls = static_cast<int>(r.get<std::uint32_t>());
    g.cap_half_angle_deg = r.get_f64();
    g.roll_step_deg = r.get_f64();
    m.grid = g;
  }
  const auto count = r.get<std::uint64_t>();
  std::size_t expected = 0;
  try {
    expected = m.spec.parameter_count();
  } catch (const ShapeMismatch& e) {
    throw FormatError(std::string("inconsistent network spec: ") + e.what());
  }
  if (count != expected) throw FormatError("parameter count does not match the spec");
  if (r.remaining() != count * 4) throw FormatError("model file is truncated or has trailing bytes");
  m.params.resize(count);
  for (auto& v : m.params) v = r.get_f32();
  return m;
}

}  // namespace qd::nn
