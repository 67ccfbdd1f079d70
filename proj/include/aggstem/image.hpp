#ifndef AGGSTEM_IMAGE_HPP
#define AGGSTEM_IMAGE_HPP

#include <utility>
#include <vector>

namespace aggstem {

// Real-valued 2D image with physical pixel geometry. Values are detector
// fractions (noiseless range [0,1] per particle) unless a pipeline stage
// says otherwise. Pixel (ix, iy) covers world coordinates centered at
// (origin_x + ix*pixel_size, origin_y + iy*pixel_size), in nm.
struct ImageGrid {
    int width = 512;
    int height = 512;
    double pixel_size = 1.0; // nm per pixel
    double origin_x = 0.0;   // world x of pixel (0,0) center
    double origin_y = 0.0;
    std::vector<double> values; // row-major, size width*height

    ImageGrid() = default;
    ImageGrid(int w, int h, double px) : width(w), height(h), pixel_size(px) {
        values.assign(static_cast<size_t>(w) * h, 0.0);
        center_origin();
    }

    void center_origin() {
        origin_x = -pixel_size * (width - 1) / 2.0;
        origin_y = -pixel_size * (height - 1) / 2.0;
    }

    double& at(int ix, int iy) { return values[static_cast<size_t>(iy) * width + ix]; }
    double at(int ix, int iy) const { return values[static_cast<size_t>(iy) * width + ix]; }

    double x_of(int ix) const { return origin_x + ix * pixel_size; }
    double y_of(int iy) const { return origin_y + iy * pixel_size; }

    bool same_geometry(const ImageGrid& o) const {
        return width == o.width && height == o.height && pixel_size == o.pixel_size &&
               origin_x == o.origin_x && origin_y == o.origin_y;
    }
};

// Compensated (Neumaier) sum of all pixel values.
double image_sum(const ImageGrid& img);

std::pair<double, double> image_min_max(const ImageGrid& img);

double image_mean(const ImageGrid& img);

} // namespace aggstem

#endif
