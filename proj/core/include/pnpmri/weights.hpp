#pragma once

#include "pnpmri/cnn.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pnpmri {

// PNPD weight file, all fields little-endian:
//
//   char[4]  "PNPD"
//   u32      format version (1)
//   u32      metadata byte count (28)
//   metadata: u32 n_layers, u32 flags (bit 0 residual, bit 1 bias),
//             f32 training SNR dB, u32 patch nx, u32 patch ny, u32 patch nt,
//             u32 revision
//   per layer:
//     u32 out_ch, u32 in_ch, u32 kt, u32 ky, u32 kx   (kernel extent 3,3,3)
//     f32 declared spectral norm
//     f32 kernel[out_ch][in_ch][kt][ky][kx]
//     f32 bias[out_ch]                                (only with bit 1)
//
// Nothing may follow the last layer.

inline constexpr std::uint32_t kWeightFormatVersion = 1;

struct LoadOptions {
  bool certify = true;
  bool require_reference_architecture = true;
  CertificationOptions certification{};
};

std::vector<std::uint8_t> encode_weights(const DenoiserNet &net);
DenoiserNet decode_weights(const std::vector<std::uint8_t> &bytes, const LoadOptions &options = {});

void save_weights(const DenoiserNet &net, const std::filesystem::path &path);

/// Throws FormatError on any structural problem and CertificationError naming
/// the first layer whose estimated norm exceeds its declared value.
DenoiserNet load_weights(const std::filesystem::path &path, const LoadOptions &options = {});

/// `key = value` lines; '#' starts a comment. Keys are written sorted.
using Manifest = std::map<std::string, std::string>;
Manifest read_manifest(const std::filesystem::path &path);
void write_manifest(const Manifest &manifest, const std::filesystem::path &path);

/// Manifest path that accompanies a weight file: `<file>.manifest`.
std::filesystem::path manifest_path_for(const std::filesystem::path &weights);

} // namespace pnpmri
