#ifndef AGGSTEM_INTENSITY_MODEL_HPP
#define AGGSTEM_INTENSITY_MODEL_HPP

#include <array>
#include <filesystem>
#include <vector>

namespace aggstem {

// Monotone nondecreasing piecewise-linear thickness (nm) -> intensity
// (detector fraction) curve with intensity(0) = 0. Evaluation clamps to
// the last knot beyond the tabulated domain.
struct IntensityCurve {
    std::vector<double> thickness;
    std::vector<double> intensity;

    double eval(double t) const;
    double max_thickness() const { return thickness.empty() ? 0.0 : thickness.back(); }
};

// Per material (label 0/1): a set of curve variants standing in for the
// crystal phase/orientation dependence of the detector signal. A variant
// is drawn uniformly per particle at render time.
struct IntensityModel {
    std::array<std::vector<IntensityCurve>, 2> variants;

    int variant_count(int label) const { return static_cast<int>(variants[label].size()); }
    const IntensityCurve& curve(int label, int variant) const {
        return variants[label][variant];
    }
    // Throws InvalidParams if any curve violates the contract.
    void validate() const;

    // Built-in model: saturating-exponential curves sampled to LUTs,
    // label 0 strictly brighter than label 1, 10 variants per material
    // spanning +-10% multiplicative spread.
    static IntensityModel default_model();

    // Text LUT exchange format, one knot per line:
    //   material variant thickness intensity
    static IntensityModel load_lut(const std::filesystem::path& file);
    void save_lut(const std::filesystem::path& file) const;
};

} // namespace aggstem

#endif
