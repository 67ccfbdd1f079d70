#include "aggstem/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "aggstem/errors.hpp"
#include "aggstem/image.hpp"

namespace aggstem {

std::string pgm16_bytes(const ImageGrid& img, double& v_max_out) {
    auto [lo, hi] = image_min_max(img);
    (void)lo;
    const double v_max = hi > 0.0 ? hi : 0.0;
    const double scale = v_max > 0.0 ? 65535.0 / v_max : 0.0;

    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n65535\n";
    out.reserve(out.size() + img.values.size() * 2);
    for (int iy = 0; iy < img.height; ++iy) {
        for (int ix = 0; ix < img.width; ++ix) {
            double v = img.at(ix, iy) * scale;
            long q = std::lround(std::clamp(v, 0.0, 65535.0));
            out.push_back(static_cast<char>((q >> 8) & 0xFF));
            out.push_back(static_cast<char>(q & 0xFF));
        }
    }
    v_max_out = v_max;
    return out;
}

double save_pgm16(const ImageGrid& img, const std::filesystem::path& file) {
    double v_max = 0.0;
    std::string bytes = pgm16_bytes(img, v_max);
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + file.string());
    return v_max;
}

ImageGrid load_pgm16(const std::filesystem::path& file, double v_max, double pixel_size) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open: " + file.string());
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P5" || w <= 0 || h <= 0 || maxval != 65535)
        throw ParseError("not a 16-bit P5 PGM: " + file.string());
    in.get(); // single whitespace after the header

    ImageGrid img(w, h, pixel_size);
    std::vector<unsigned char> raw(static_cast<size_t>(w) * h * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw ParseError("truncated PGM: " + file.string());
    const double scale = v_max / 65535.0;
    for (size_t i = 0; i < img.values.size(); ++i) {
        unsigned q = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
        img.values[i] = q * scale;
    }
    return img;
}

void save_raw_f32(const ImageGrid& img, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    for (double v : img.values) {
        float f = static_cast<float>(v);
        unsigned char b[4];
        std::uint32_t bits;
        static_assert(sizeof(bits) == sizeof(f));
        std::memcpy(&bits, &f, 4);
        b[0] = bits & 0xFF;
        b[1] = (bits >> 8) & 0xFF;
        b[2] = (bits >> 16) & 0xFF;
        b[3] = (bits >> 24) & 0xFF;
        out.write(reinterpret_cast<const char*>(b), 4);
    }
    if (!out) throw IoError("write failed: " + file.string());
}

void save_sidecar(const ImageSidecar& s, const std::filesystem::path& file) {
    nlohmann::json j;
    j["pixel_size"] = s.pixel_size;
    j["v_max"] = s.v_max;
    j["seed"] = s.seed;
    if (s.theta) {
        j["theta"] = {{"df", s.theta->theta_df},
                      {"rho", s.theta->theta_rho},
                      {"c0", s.theta->theta_0},
                      {"c1", s.theta->theta_1}};
    }
    j["config_hash"] = s.config_hash;
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    out << j.dump(2) << "\n";
}

ImageSidecar load_sidecar(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open: " + file.string());
    nlohmann::json j;
    in >> j;
    ImageSidecar s;
    s.pixel_size = j.at("pixel_size").get<double>();
    s.v_max = j.at("v_max").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("theta")) {
        ModelParams t;
        t.theta_df = j["theta"].at("df").get<double>();
        t.theta_rho = j["theta"].at("rho").get<double>();
        t.theta_0 = j["theta"].at("c0").get<int>();
        t.theta_1 = j["theta"].at("c1").get<int>();
        s.theta = t;
    }
    s.config_hash = j.value("config_hash", "");
    return s;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace aggstem
