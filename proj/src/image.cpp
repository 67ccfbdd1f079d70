#include "aggstem/image.hpp"

#include <algorithm>
#include <cmath>

namespace aggstem {

double image_sum(const ImageGrid& img) {
    double sum = 0.0, comp = 0.0;
    for (double v : img.values) {
        double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    return sum + comp;
}

std::pair<double, double> image_min_max(const ImageGrid& img) {
    auto [lo, hi] = std::minmax_element(img.values.begin(), img.values.end());
    return {*lo, *hi};
}

double image_mean(const ImageGrid& img) {
    return image_sum(img) / static_cast<double>(img.values.size());
}

} // namespace aggstem
