#ifndef AGGSTEM_IMAGE_IO_HPP
#define AGGSTEM_IMAGE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "aggstem/geometry.hpp"
#include "aggstem/image.hpp"

namespace aggstem {

// 16-bit grayscale PGM (P5, maxval 65535, big-endian samples) after an
// affine map of [0, v_max] onto [0, 65535]. v_max is the image maximum,
// reported for the sidecar.
std::string pgm16_bytes(const ImageGrid& img, double& v_max_out);
double save_pgm16(const ImageGrid& img, const std::filesystem::path& file);

// Inverse of save_pgm16 given the recorded v_max and pixel size.
ImageGrid load_pgm16(const std::filesystem::path& file, double v_max, double pixel_size);

// Raw row-major float32 little-endian dump (exact up to float precision).
void save_raw_f32(const ImageGrid& img, const std::filesystem::path& file);

// Metadata record written next to every rendered image.
struct ImageSidecar {
    double pixel_size = 1.0;
    double v_max = 0.0;
    std::uint64_t seed = 0;
    std::optional<ModelParams> theta;
    std::string config_hash;
};

void save_sidecar(const ImageSidecar& s, const std::filesystem::path& file);
ImageSidecar load_sidecar(const std::filesystem::path& file);

// FNV-1a 64 over a string; used for config snapshots and content naming.
std::uint64_t fnv1a64(const std::string& data);
std::string hex16(std::uint64_t v);

} // namespace aggstem

#endif
