#ifndef AGGSTEM_RENDER_HPP
#define AGGSTEM_RENDER_HPP

#include "aggstem/geometry.hpp"
#include "aggstem/image.hpp"
#include "aggstem/intensity_model.hpp"
#include "aggstem/rng.hpp"

namespace aggstem {

struct RenderConfig {
    double beta = 0.0211;     // semi-convergence angle, rad
    double dose = 149.0;      // electrons per Angstrom^2; +inf disables shot noise
    double scan_sigma = 0.01; // beam displacement std, nm; 0 disables scan noise
    int width = 512;
    int height = 512;
    double pixel_size = 1.0; // nm per pixel
    int quantize_levels = 256;
    bool scan_per_row = false; // jitter whole scan rows instead of single pixels

    ImageGrid make_grid() const { return ImageGrid(width, height, pixel_size); }
    double sigma_stem(double z) const; // |z| * tan(beta), nm
};

// Chord length of the z-ray through the sphere at each pixel center, nm.
ImageGrid thickness_map(const Particle& p, const ImageGrid& grid);

// Thickness map pushed through a uniformly drawn curve variant of the
// particle's material. Advances rng by one draw.
ImageGrid particle_intensity_map(const Particle& p, const ImageGrid& grid,
                                 const IntensityModel& model, RandomStream& rng);

// Separable Gaussian convolution, kernel truncated at 4 sigma, zero
// padding at the borders. sigma_px = 0 is the identity.
ImageGrid defocus_blur(const ImageGrid& img, double sigma_px, int jobs = 0);

// Noiseless image: per-particle intensity maps, each blurred with its own
// defocus width, summed in particle order. The aggregate is centered so
// its equal-mass center of mass projects to the grid center and lies in
// the focal plane. Per-particle work runs in parallel; the result does
// not depend on the thread count. Curve variants are drawn from
// rng.child(0) in particle order. Throws FieldOfViewOverflow if any
// particle plus a 3 sigma blur margin leaves the grid.
ImageGrid compose(const Aggregate& a, const RenderConfig& cfg, const IntensityModel& model,
                  const RandomStream& rng, int jobs = 0);

// Counting noise at cfg.dose: per pixel an independent count with mean
// dose * pixel_area * value, mapped back to detector fraction. Rows use
// child streams rng.child(row), so the output is thread-count invariant.
ImageGrid apply_shot_noise(const ImageGrid& img, const RenderConfig& cfg,
                           const RandomStream& rng, int jobs = 0);

// Gaussian lateral resampling jitter of std cfg.scan_sigma (bilinear,
// edge clamp). Row streams as in apply_shot_noise.
ImageGrid apply_scan_noise(const ImageGrid& img, const RenderConfig& cfg,
                           const RandomStream& rng, int jobs = 0);

// compose -> shot noise -> scan noise. Substreams: child(0) variants,
// child(1) shot, child(2) scan.
ImageGrid render(const Aggregate& a, const RenderConfig& cfg, const IntensityModel& model,
                 const RandomStream& rng, int jobs = 0);

// Plain single-threaded implementations with independent loop structure,
// kept as oracles for the parallel kernels and for the benchmark.
namespace reference {
ImageGrid defocus_blur(const ImageGrid& img, double sigma_px);
ImageGrid compose(const Aggregate& a, const RenderConfig& cfg, const IntensityModel& model,
                  const RandomStream& rng);
ImageGrid apply_shot_noise(const ImageGrid& img, const RenderConfig& cfg,
                           const RandomStream& rng);
ImageGrid apply_scan_noise(const ImageGrid& img, const RenderConfig& cfg,
                           const RandomStream& rng);
} // namespace reference

} // namespace aggstem

#endif
