#include "aggstem/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "aggstem/errors.hpp"
#include "aggstem/parallel.hpp"

namespace aggstem {

double RenderConfig::sigma_stem(double z) const { return std::fabs(z) * std::tan(beta); }

namespace {

// Normalized 1D Gaussian kernel sampled at integer offsets, truncated at
// 4 sigma. Returns {1.0} for sigma <= 0 (identity).
std::vector<double> gaussian_kernel(double sigma_px) {
    if (!(sigma_px > 0.0)) return {1.0};
    const int radius = static_cast<int>(std::ceil(4.0 * sigma_px));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double w = std::exp(-0.5 * (i / sigma_px) * (i / sigma_px));
        k[i + radius] = w;
        sum += w;
    }
    for (double& w : k) w /= sum;
    return k;
}

// Separable convolution of a w x h buffer, zero padding outside.
void blur_buffer(std::vector<double>& v, int w, int h, const std::vector<double>& kernel) {
    if (kernel.size() == 1) return;
    const int radius = static_cast<int>(kernel.size() / 2);
    std::vector<double> tmp(v.size(), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                int xs = x + k;
                if (xs < 0 || xs >= w) continue;
                acc += kernel[k + radius] * v[static_cast<size_t>(y) * w + xs];
            }
            tmp[static_cast<size_t>(y) * w + x] = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                int ys = y + k;
                if (ys < 0 || ys >= h) continue;
                acc += kernel[k + radius] * tmp[static_cast<size_t>(ys) * w + x];
            }
            v[static_cast<size_t>(y) * w + x] = acc;
        }
}

double chord(const Particle& p, double x, double y) {
    double dx = x - p.position.x;
    double dy = y - p.position.y;
    double s2 = dx * dx + dy * dy;
    double r2 = p.radius * p.radius;
    return s2 < r2 ? 2.0 * std::sqrt(r2 - s2) : 0.0;
}

struct Tile {
    int x0 = 0, y0 = 0, w = 0, h = 0;
    std::vector<double> v;
};

// Blurred intensity footprint of one (already centered) particle. The
// tile margin covers the blur kernel, so zero padding inside the tile is
// exact with respect to a full-grid convolution.
Tile particle_tile(const Particle& p, const ImageGrid& grid, const IntensityCurve& curve,
                   double sigma_px) {
    const auto kernel = gaussian_kernel(sigma_px);
    const int kr = static_cast<int>(kernel.size() / 2);
    const double cx = (p.position.x - grid.origin_x) / grid.pixel_size;
    const double cy = (p.position.y - grid.origin_y) / grid.pixel_size;
    const int half = static_cast<int>(std::ceil(p.radius / grid.pixel_size)) + kr + 1;

    Tile t;
    t.x0 = static_cast<int>(std::floor(cx)) - half;
    t.y0 = static_cast<int>(std::floor(cy)) - half;
    t.w = 2 * half + 1;
    t.h = 2 * half + 1;
    t.v.assign(static_cast<size_t>(t.w) * t.h, 0.0);
    for (int iy = 0; iy < t.h; ++iy) {
        double y = grid.y_of(t.y0 + iy);
        for (int ix = 0; ix < t.w; ++ix) {
            double th = chord(p, grid.x_of(t.x0 + ix), y);
            if (th > 0.0) t.v[static_cast<size_t>(iy) * t.w + ix] = curve.eval(th);
        }
    }
    blur_buffer(t.v, t.w, t.h, kernel);
    return t;
}

std::vector<Particle> centered_particles(const Aggregate& a) {
    Vec3 com = center_of_mass(a, Weighting::EqualMass);
    std::vector<Particle> out = a.particles;
    for (auto& p : out) p.position -= com;
    return out;
}

void check_fov(const std::vector<Particle>& centered, const RenderConfig& cfg) {
    const double half_x = cfg.width * cfg.pixel_size / 2.0;
    const double half_y = cfg.height * cfg.pixel_size / 2.0;
    for (const auto& p : centered) {
        double margin = p.radius + 3.0 * cfg.sigma_stem(p.position.z);
        if (std::fabs(p.position.x) + margin > half_x ||
            std::fabs(p.position.y) + margin > half_y)
            throw FieldOfViewOverflow("particle at (" + std::to_string(p.position.x) + ", " +
                                      std::to_string(p.position.y) +
                                      ") nm exceeds the field of view");
    }
}

std::vector<int> draw_variants(const std::vector<Particle>& ps, const IntensityModel& model,
                               const RandomStream& rng) {
    RandomStream vs = rng.child(0);
    std::vector<int> variants(ps.size());
    for (size_t i = 0; i < ps.size(); ++i)
        variants[i] = static_cast<int>(
            vs.uniform_int(static_cast<std::uint64_t>(model.variant_count(ps[i].label))));
    return variants;
}

} // namespace

ImageGrid thickness_map(const Particle& p, const ImageGrid& grid) {
    ImageGrid out = grid;
    for (int iy = 0; iy < out.height; ++iy) {
        double y = out.y_of(iy);
        for (int ix = 0; ix < out.width; ++ix) out.at(ix, iy) = chord(p, out.x_of(ix), y);
    }
    return out;
}

ImageGrid particle_intensity_map(const Particle& p, const ImageGrid& grid,
                                 const IntensityModel& model, RandomStream& rng) {
    const int v = static_cast<int>(
        rng.uniform_int(static_cast<std::uint64_t>(model.variant_count(p.label))));
    const IntensityCurve& curve = model.curve(p.label, v);
    ImageGrid out = thickness_map(p, grid);
    for (double& x : out.values) x = curve.eval(x);
    return out;
}

ImageGrid defocus_blur(const ImageGrid& img, double sigma_px, int jobs) {
    if (sigma_px < 0.0) throw InvalidParams("blur sigma must be >= 0");
    ImageGrid out = img;
    if (!(sigma_px > 0.0)) return out;
    const auto kernel = gaussian_kernel(sigma_px);
    const int radius = static_cast<int>(kernel.size() / 2);
    const int w = img.width, h = img.height;

    std::vector<double> tmp(img.values.size(), 0.0);
    parallel_for(h, jobs, [&](long long y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                int xs = static_cast<int>(x) + k;
                if (xs < 0 || xs >= w) continue;
                acc += kernel[k + radius] * img.values[static_cast<size_t>(y) * w + xs];
            }
            tmp[static_cast<size_t>(y) * w + x] = acc;
        }
    });
    parallel_for(h, jobs, [&](long long y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                long long ys = y + k;
                if (ys < 0 || ys >= h) continue;
                acc += kernel[k + radius] * tmp[static_cast<size_t>(ys) * w + x];
            }
            out.values[static_cast<size_t>(y) * w + x] = acc;
        }
    });
    return out;
}

ImageGrid compose(const Aggregate& a, const RenderConfig& cfg, const IntensityModel& model,
                  const RandomStream& rng, int jobs) {
    if (a.particles.empty()) throw InvalidParams("compose of empty aggregate");
    model.validate();
    const auto ps = centered_particles(a);
    check_fov(ps, cfg);
    const auto variants = draw_variants(ps, model, rng);

    ImageGrid img = cfg.make_grid();
    std::vector<Tile> tiles(ps.size());
    parallel_for(static_cast<long long>(ps.size()), jobs, [&](long long i) {
        const auto& p = ps[i];
        double sigma_px = cfg.sigma_stem(p.position.z) / cfg.pixel_size;
        tiles[i] = particle_tile(p, img, model.curve(p.label, variants[i]), sigma_px);
    });

    // Fixed-order accumulation: the result is independent of how the tile
    // loop above was scheduled.
    for (const auto& t : tiles) {
        for (int iy = 0; iy < t.h; ++iy) {
            int gy = t.y0 + iy;
            if (gy < 0 || gy >= img.height) continue;
            for (int ix = 0; ix < t.w; ++ix) {
                int gx = t.x0 + ix;
                if (gx < 0 || gx >= img.width) continue;
                img.at(gx, gy) += t.v[static_cast<size_t>(iy) * t.w + ix];
            }
        }
    }
    return img;
}

ImageGrid apply_shot_noise(const ImageGrid& img, const RenderConfig& cfg,
                           const RandomStream& rng, int jobs) {
    if (std::isinf(cfg.dose)) return img; // noiseless mode
    if (!(cfg.dose > 0.0)) throw InvalidParams("dose must be positive");
    const double area_A2 = 100.0 * cfg.pixel_size * cfg.pixel_size; // nm^2 -> A^2
    const double scale = cfg.dose * area_A2;

    ImageGrid out = img;
    parallel_for(img.height, jobs, [&](long long iy) {
        RandomStream rows = rng.child(static_cast<std::uint64_t>(iy));
        for (int ix = 0; ix < img.width; ++ix) {
            double v = img.at(ix, static_cast<int>(iy));
            double noisy = 0.0;
            if (v > 0.0) noisy = static_cast<double>(rows.poisson(scale * v)) / scale;
            out.at(ix, static_cast<int>(iy)) = noisy;
        }
    });
    return out;
}

namespace {

double bilinear(const ImageGrid& img, double xs, double ys) {
    xs = std::clamp(xs, 0.0, static_cast<double>(img.width - 1));
    ys = std::clamp(ys, 0.0, static_cast<double>(img.height - 1));
    int x0 = static_cast<int>(xs), y0 = static_cast<int>(ys);
    int x1 = std::min(x0 + 1, img.width - 1);
    int y1 = std::min(y0 + 1, img.height - 1);
    double fx = xs - x0, fy = ys - y0;
    double a = img.at(x0, y0) + fx * (img.at(x1, y0) - img.at(x0, y0));
    double b = img.at(x0, y1) + fx * (img.at(x1, y1) - img.at(x0, y1));
    return a + fy * (b - a);
}

} // namespace

ImageGrid apply_scan_noise(const ImageGrid& img, const RenderConfig& cfg,
                           const RandomStream& rng, int jobs) {
    if (cfg.scan_sigma < 0.0) throw InvalidParams("scan_sigma must be >= 0");
    if (cfg.scan_sigma == 0.0) return img;
    const double sigma_px = cfg.scan_sigma / cfg.pixel_size;

    ImageGrid out = img;
    parallel_for(img.height, jobs, [&](long long iy) {
        RandomStream rows = rng.child(static_cast<std::uint64_t>(iy));
        if (cfg.scan_per_row) {
            double dx = rows.normal() * sigma_px;
            double dy = rows.normal() * sigma_px;
            for (int ix = 0; ix < img.width; ++ix)
                out.at(ix, static_cast<int>(iy)) = bilinear(img, ix + dx, iy + dy);
        } else {
            for (int ix = 0; ix < img.width; ++ix) {
                double dx = rows.normal() * sigma_px;
                double dy = rows.normal() * sigma_px;
                out.at(ix, static_cast<int>(iy)) = bilinear(img, ix + dx, iy + dy);
            }
        }
    });
    return out;
}

ImageGrid render(const Aggregate& a, const RenderConfig& cfg, const IntensityModel& model,
                 const RandomStream& rng, int jobs) {
    ImageGrid img = compose(a, cfg, model, rng, jobs);
    img = apply_shot_noise(img, cfg, rng.child(1), jobs);
    img = apply_scan_noise(img, cfg, rng.child(2), jobs);
    return img;
}

namespace reference {

ImageGrid defocus_blur(const ImageGrid& img, double sigma_px) {
    ImageGrid out = img;
    if (!(sigma_px > 0.0)) return out;
    const auto k1 = gaussian_kernel(sigma_px);
    const int radius = static_cast<int>(k1.size() / 2);
    // Direct dense 2D convolution with the outer-product kernel.
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int ky = -radius; ky <= radius; ++ky) {
                int ys = y + ky;
                if (ys < 0 || ys >= img.height) continue;
                for (int kx = -radius; kx <= radius; ++kx) {
                    int xs = x + kx;
                    if (xs < 0 || xs >= img.width) continue;
                    acc += k1[ky + radius] * k1[kx + radius] * img.at(xs, ys);
                }
            }
            out.at(x, y) = acc;
        }
    return out;
}

ImageGrid compose(const Aggregate& a, const RenderConfig& cfg, const IntensityModel& model,
                  const RandomStream& rng) {
    if (a.particles.empty()) throw InvalidParams("compose of empty aggregate");
    const auto ps = centered_particles(a);
    check_fov(ps, cfg);
    const auto variants = draw_variants(ps, model, rng);

    ImageGrid img = cfg.make_grid();
    for (size_t i = 0; i < ps.size(); ++i) {
        ImageGrid m = thickness_map(ps[i], img);
        const IntensityCurve& curve = model.curve(ps[i].label, variants[i]);
        for (double& v : m.values) v = curve.eval(v);
        m = reference::defocus_blur(m, cfg.sigma_stem(ps[i].position.z) / cfg.pixel_size);
        for (size_t k = 0; k < img.values.size(); ++k) img.values[k] += m.values[k];
    }
    return img;
}

ImageGrid apply_shot_noise(const ImageGrid& img, const RenderConfig& cfg,
                           const RandomStream& rng) {
    if (std::isinf(cfg.dose)) return img;
    const double scale = cfg.dose * 100.0 * cfg.pixel_size * cfg.pixel_size;
    ImageGrid out = img;
    for (int iy = 0; iy < img.height; ++iy) {
        RandomStream rows = rng.child(static_cast<std::uint64_t>(iy));
        for (int ix = 0; ix < img.width; ++ix) {
            double v = img.at(ix, iy);
            out.at(ix, iy) = v > 0.0 ? static_cast<double>(rows.poisson(scale * v)) / scale : 0.0;
        }
    }
    return out;
}

ImageGrid apply_scan_noise(const ImageGrid& img, const RenderConfig& cfg,
                           const RandomStream& rng) {
    if (cfg.scan_sigma == 0.0) return img;
    const double sigma_px = cfg.scan_sigma / cfg.pixel_size;
    ImageGrid out = img;
    for (int iy = 0; iy < img.height; ++iy) {
        RandomStream rows = rng.child(static_cast<std::uint64_t>(iy));
        if (cfg.scan_per_row) {
            double dx = rows.normal() * sigma_px;
            double dy = rows.normal() * sigma_px;
            for (int ix = 0; ix < img.width; ++ix)
                out.at(ix, iy) = bilinear(img, ix + dx, iy + dy);
        } else {
            for (int ix = 0; ix < img.width; ++ix) {
                double dx = rows.normal() * sigma_px;
                double dy = rows.normal() * sigma_px;
                out.at(ix, iy) = bilinear(img, ix + dx, iy + dy);
            }
        }
    }
    return out;
}

} // namespace reference

} // namespace aggstem
