#include "aggstem/intensity_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "aggstem/errors.hpp"
#include "aggstem/geometry_io.hpp"

namespace aggstem {

double IntensityCurve::eval(double t) const {
    if (t <= 0.0 || thickness.empty()) return 0.0;
    if (t >= thickness.back()) return intensity.back();
    auto it = std::upper_bound(thickness.begin(), thickness.end(), t);
    size_t hi = static_cast<size_t>(it - thickness.begin());
    size_t lo = hi - 1;
    double f = (t - thickness[lo]) / (thickness[hi] - thickness[lo]);
    return intensity[lo] + f * (intensity[hi] - intensity[lo]);
}

void IntensityModel::validate() const {
    for (int label = 0; label < 2; ++label) {
        if (variants[label].empty())
            throw InvalidParams("intensity model needs >= 1 variant per material");
        for (const auto& c : variants[label]) {
            if (c.thickness.size() < 2 || c.thickness.size() != c.intensity.size())
                throw InvalidParams("intensity curve needs >= 2 knots");
            if (c.thickness.front() != 0.0 || c.intensity.front() != 0.0)
                throw InvalidParams("intensity curve must start at (0, 0)");
            for (size_t i = 1; i < c.thickness.size(); ++i) {
                if (c.thickness[i] <= c.thickness[i - 1])
                    throw InvalidParams("curve thickness knots must increase");
                if (c.intensity[i] < c.intensity[i - 1])
                    throw InvalidParams("intensity curve must be nondecreasing");
            }
        }
    }
}

IntensityModel IntensityModel::default_model() {
    // Saturating exponential I(t) = I_inf * (1 - exp(-t/lambda)); label 0
    // (WO3) dominates label 1 (TiO2) pointwise across all variants.
    constexpr double i_inf[2] = {0.60, 0.20};
    constexpr double lambda_nm[2] = {40.0, 60.0};
    constexpr int n_variants = 10;
    constexpr double t_max = 120.0;
    constexpr double t_step = 0.5;

    IntensityModel m;
    for (int label = 0; label < 2; ++label) {
        for (int v = 0; v < n_variants; ++v) {
            double factor = 0.9 + 0.2 * static_cast<double>(v) / (n_variants - 1);
            IntensityCurve c;
            for (double t = 0.0; t <= t_max + 1e-9; t += t_step) {
                c.thickness.push_back(t);
                c.intensity.push_back(factor * i_inf[label] *
                                      (1.0 - std::exp(-t / lambda_nm[label])));
            }
            m.variants[label].push_back(std::move(c));
        }
    }
    m.validate();
    return m;
}

IntensityModel IntensityModel::load_lut(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open LUT: " + file.string());
    std::map<std::pair<int, int>, std::vector<std::pair<double, double>>> knots;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int material, variant;
        double t, intensity;
        if (!(ls >> material >> variant >> t >> intensity))
            throw ParseError("LUT line " + std::to_string(lineno) +
                             ": expected `material variant thickness intensity`");
        if (material != 0 && material != 1)
            throw ParseError("LUT line " + std::to_string(lineno) + ": material must be 0 or 1");
        knots[{material, variant}].emplace_back(t, intensity);
    }

    IntensityModel m;
    for (auto& [key, pts] : knots) {
        std::sort(pts.begin(), pts.end());
        IntensityCurve c;
        for (auto [t, i] : pts) {
            c.thickness.push_back(t);
            c.intensity.push_back(i);
        }
        m.variants[key.first].push_back(std::move(c));
    }
    m.validate();
    return m;
}

void IntensityModel::save_lut(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write LUT: " + file.string());
    for (int label = 0; label < 2; ++label)
        for (size_t v = 0; v < variants[label].size(); ++v) {
            const auto& c = variants[label][v];
            for (size_t k = 0; k < c.thickness.size(); ++k)
                out << label << ' ' << v << ' ' << format_double(c.thickness[k]) << ' '
                    << format_double(c.intensity[k]) << '\n';
        }
}

} // namespace aggstem
