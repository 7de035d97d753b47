#include "pnpmri/weights.hpp"

#include "pnpmri/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

namespace pnpmri {

namespace {

constexpr char kMagic[4] = {'P', 'N', 'P', 'D'};
constexpr std::uint32_t kMetadataBytes = 28;
constexpr std::uint32_t kFlagResidual = 1u;
constexpr std::uint32_t kFlagBias = 2u;

class Writer {
public:
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) {
      bytes_.push_back(std::uint8_t(v >> (8 * k)));
    }
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const char *p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
  explicit Reader(const std::vector<std::uint8_t> &b) : b_(b) {}

  std::uint32_t u32(const char *what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      v |= std::uint32_t(b_[pos_ + k]) << (8 * k);
    }
    pos_ += 4;
    return v;
  }
  float f32(const char *what) { return std::bit_cast<float>(u32(what)); }
  void need(std::size_t n, const char *what) const {
    if (b_.size() - pos_ < n) {
      throw FormatError(std::string("weight file truncated while reading ") + what);
    }
  }
  std::size_t remaining() const { return b_.size() - pos_; }
  const std::uint8_t *cursor() const { return b_.data() + pos_; }
  void skip(std::size_t n) { pos_ += n; }

private:
  const std::vector<std::uint8_t> &b_;
  std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> encode_weights(const DenoiserNet &net) {
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kWeightFormatVersion);
  w.u32(kMetadataBytes);
  const auto &meta = net.metadata();
  w.u32(std::uint32_t(net.layers().size()));
  w.u32((net.residual_mode() ? kFlagResidual : 0u) | (net.has_bias() ? kFlagBias : 0u));
  w.f32(meta.training_snr_db);
  w.u32(meta.patch_nx);
  w.u32(meta.patch_ny);
  w.u32(meta.patch_nt);
  w.u32(meta.revision);
  for (const auto &l : net.layers()) {
    w.u32(std::uint32_t(l.out_ch));
    w.u32(std::uint32_t(l.in_ch));
    w.u32(3);
    w.u32(3);
    w.u32(3);
    w.f32(l.declared_spectral_norm);
    for (float k : l.kernel) {
      w.f32(k);
    }
    if (net.has_bias()) {
      for (float b : l.bias) {
        w.f32(b);
      }
    }
  }
  return w.take();
}

DenoiserNet decode_weights(const std::vector<std::uint8_t> &bytes, const LoadOptions &options) {
  Reader r(bytes);
  r.need(4, "magic");
  if (std::memcmp(r.cursor(), kMagic, 4) != 0) {
    throw FormatError("not a PNPD weight file (bad magic)");
  }
  r.skip(4);
  const std::uint32_t version = r.u32("version");
  if (version != kWeightFormatVersion) {
    throw FormatError("unsupported weight file version " + std::to_string(version));
  }
  if (r.u32("metadata size") != kMetadataBytes) {
    throw FormatError("unexpected metadata block size");
  }
  const std::uint32_t n_layers = r.u32("layer count");
  const std::uint32_t flags = r.u32("flags");
  if ((flags & ~(kFlagResidual | kFlagBias)) != 0) {
    throw FormatError("unknown flag bits in weight file");
  }
  NetMetadata meta;
  meta.training_snr_db = r.f32("training SNR");
  meta.patch_nx = r.u32("patch nx");
  meta.patch_ny = r.u32("patch ny");
  meta.patch_nt = r.u32("patch nt");
  meta.revision = r.u32("revision");
  if (n_layers == 0 || n_layers > 64) {
    throw FormatError("implausible layer count " + std::to_string(n_layers));
  }
  const bool has_bias = (flags & kFlagBias) != 0;

  std::vector<ConvLayer3D> layers(n_layers);
  for (std::uint32_t k = 0; k < n_layers; ++k) {
    auto &l = layers[k];
    l.out_ch = r.u32("layer header");
    l.in_ch = r.u32("layer header");
    const std::uint32_t kt = r.u32("layer header"), ky = r.u32("layer header"), kx = r.u32("layer header");
    if (kt != 3 || ky != 3 || kx != 3) {
      throw FormatError("layer " + std::to_string(k) + ": kernel extent must be 3x3x3");
    }
    if (l.out_ch == 0 || l.in_ch == 0 || l.out_ch > 4096 || l.in_ch > 4096) {
      throw FormatError("layer " + std::to_string(k) + ": implausible channel counts");
    }
    l.declared_spectral_norm = r.f32("declared norm");
    const std::size_t nk = l.out_ch * l.in_ch * ConvLayer3D::kTaps;
    r.need(4 * (nk + (has_bias ? l.out_ch : 0)), "layer tensors");
    l.kernel.resize(nk);
    for (auto &v : l.kernel) {
      v = r.f32("kernel");
    }
    if (has_bias) {
      l.bias.resize(l.out_ch);
      for (auto &v : l.bias) {
        v = r.f32("bias");
      }
    }
  }
  if (r.remaining() != 0) {
    throw FormatError("trailing bytes after last layer");
  }

  std::optional<DenoiserNet> net;
  try {
    net.emplace(std::move(layers), (flags & kFlagResidual) != 0, has_bias, meta);
  } catch (const Error &e) {
    throw FormatError(std::string("invalid network: ") + e.what());
  }
  if (options.require_reference_architecture && !net->matches_reference_architecture()) {
    throw FormatError("network is not the 2-64-64-64-64-2 five-layer architecture");
  }
  if (options.certify) {
    for (const auto &c : certify(*net, options.certification)) {
      if (!c.passed) {
        std::ostringstream msg;
        msg << "layer " << c.layer << " spectral norm estimate " << c.estimate << " exceeds declared "
            << c.declared;
        throw CertificationError(msg.str());
      }
    }
  }
  return std::move(*net);
}

void save_weights(const DenoiserNet &net, const std::filesystem::path &path) {
  const auto bytes = encode_weights(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char *>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) {
    throw FormatError("cannot write " + path.string());
  }
}

DenoiserNet load_weights(const std::filesystem::path &path, const LoadOptions &options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_weights(bytes, options);
}

Manifest read_manifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  Manifest m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    m[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return m;
}

void write_manifest(const Manifest &manifest, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::trunc);
  for (const auto &[k, v] : manifest) {
    out << k << " = " << v << '\n';
  }
  if (!out) {
    throw FormatError("cannot write " + path.string());
  }
}

std::filesystem::path manifest_path_for(const std::filesystem::path &weights) {
  auto p = weights;
  p += ".manifest";
  return p;
}

} // namespace pnpmri
