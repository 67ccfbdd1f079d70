#include "aggstem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "aggstem/descriptors.hpp"
#include "aggstem/errors.hpp"
#include "aggstem/geometry_io.hpp"
#include "aggstem/image_io.hpp"
#include "aggstem/parallel.hpp"

namespace aggstem {

void PairedSeries::validate() const {
    if (y.empty() || y.size() != y_hat.size())
        throw InvalidParams("paired series must be nonempty and equally long");
    for (size_t i = 0; i < y.size(); ++i)
        if (!std::isfinite(y[i]) || !std::isfinite(y_hat[i]))
            throw InvalidParams("paired series values must be finite");
}

double mse(const PairedSeries& s) {
    s.validate();
    double acc = 0.0;
    for (size_t i = 0; i < s.y.size(); ++i) {
        double d = s.y[i] - s.y_hat[i];
        acc += d * d;
    }
    return acc / static_cast<double>(s.y.size());
}

double mae(const PairedSeries& s) {
    s.validate();
    double acc = 0.0;
    for (size_t i = 0; i < s.y.size(); ++i) acc += std::fabs(s.y[i] - s.y_hat[i]);
    return acc / static_cast<double>(s.y.size());
}

double r_squared(const PairedSeries& s) {
    s.validate();
    double mean = 0.0;
    for (double v : s.y) mean += v;
    mean /= static_cast<double>(s.y.size());
    double denom = 0.0;
    for (double v : s.y) denom += (v - mean) * (v - mean);
    if (denom == 0.0) throw ConstantTruth("ground truth series is constant");
    return 1.0 - mse(s) * static_cast<double>(s.y.size()) / denom;
}

// --- descriptor distribution comparison -------------------------------------

namespace {

struct SampleSet {
    std::vector<double> values[3]; // s_label1, z_hetero, z_total
};

SampleSet sample_descriptors(const ModelParams& theta, int n, const GrowthConfig& growth,
                             const RandomStream& side_rng) {
    SampleSet out;
    for (int k = 0; k < n; ++k) {
        RandomStream rs = side_rng.child(static_cast<std::uint64_t>(k));
        Aggregate a = build_hetero_aggregate(theta, growth, rs);
        try {
            out.values[0].push_back(average_cluster_size(a, 1));
        } catch (const LabelAbsent&) {
            // homogeneous label-0 aggregate; S_label1 undefined
        }
        out.values[1].push_back(hetero_coordination(a));
        out.values[2].push_back(total_coordination(a));
    }
    return out;
}

double mean_or_nan(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_or_nan(const std::vector<double>& v) {
    if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double m = mean_or_nan(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

DescriptorHistogram make_histogram(const std::vector<double>& truth,
                                   const std::vector<double>& pred) {
    DescriptorHistogram h;
    if (truth.empty() && pred.empty()) return h;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto* v : {&truth, &pred})
        for (double x : *v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    if (!(hi > lo)) hi = lo + 1.0; // degenerate range
    h.lo = lo;
    h.hi = hi;
    auto bin_of = [&](double x) {
        int b = static_cast<int>((x - lo) / (hi - lo) * kComparisonBins);
        return std::clamp(b, 0, kComparisonBins - 1);
    };
    for (double x : truth) ++h.truth_counts[bin_of(x)];
    for (double x : pred) ++h.predicted_counts[bin_of(x)];
    return h;
}

} // namespace

ComparisonReport compare_descriptor_distributions(const std::vector<ConfigPair>& pairs,
                                                  int per_config_samples,
                                                  const GrowthConfig& growth,
                                                  const RandomStream& rng, int jobs) {
    if (per_config_samples < 1) throw InvalidParams("per_config_samples must be >= 1");
    ComparisonReport report;
    report.per_config_samples = per_config_samples;
    report.pairs.resize(pairs.size());

    parallel_for(static_cast<long long>(pairs.size()), jobs, [&](long long i) {
        RandomStream ps = rng.child(static_cast<std::uint64_t>(i));
        RandomStream truth_rng = ps.child(0);
        RandomStream pred_rng = ps.child(1);
        SampleSet truth =
            sample_descriptors(pairs[static_cast<size_t>(i)].truth, per_config_samples, growth, truth_rng);
        SampleSet pred = sample_descriptors(pairs[static_cast<size_t>(i)].predicted,
                                            per_config_samples, growth, pred_rng);
        ComparisonPairResult r;
        r.pair = pairs[static_cast<size_t>(i)];
        for (int d = 0; d < 3; ++d) {
            r.mean_truth[d] = mean_or_nan(truth.values[d]);
            r.mean_predicted[d] = mean_or_nan(pred.values[d]);
            r.sd_truth[d] = sd_or_nan(truth.values[d]);
            r.sd_predicted[d] = sd_or_nan(pred.values[d]);
            r.histograms[d] = make_histogram(truth.values[d], pred.values[d]);
        }
        report.pairs[static_cast<size_t>(i)] = std::move(r);
    });

    for (int d = 0; d < 3; ++d) {
        PairedSeries means;
        for (const auto& r : report.pairs) {
            if (std::isnan(r.mean_truth[d]) || std::isnan(r.mean_predicted[d])) continue;
            means.y.push_back(r.mean_truth[d]);
            means.y_hat.push_back(r.mean_predicted[d]);
        }
        if (means.y.empty()) {
            report.mae_of_means[d] = std::numeric_limits<double>::quiet_NaN();
            report.r2_of_means[d] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        report.mae_of_means[d] = mae(means);
        try {
            report.r2_of_means[d] = r_squared(means);
        } catch (const ConstantTruth&) {
            report.r2_of_means[d] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return report;
}

void write_comparison_report(const ComparisonReport& report, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::ofstream summary(dir / "summary.csv", std::ios::binary);
    summary << "descriptor,mae_of_means,r_squared,pairs,per_config_samples\n";
    for (int d = 0; d < 3; ++d)
        summary << kComparisonDescriptors[d] << "," << format_double(report.mae_of_means[d])
                << "," << format_double(report.r2_of_means[d]) << "," << report.pairs.size()
                << "," << report.per_config_samples << "\n";

    std::ofstream rep(dir / "report.csv", std::ios::binary);
    rep << "pair,theta_df,theta_rho,theta_0,theta_1,hat_df,hat_rho,hat_0,hat_1";
    for (int d = 0; d < 3; ++d)
        rep << ",mean_truth_" << kComparisonDescriptors[d] << ",mean_predicted_"
            << kComparisonDescriptors[d] << ",sd_truth_" << kComparisonDescriptors[d]
            << ",sd_predicted_" << kComparisonDescriptors[d];
    rep << "\n";
    for (size_t i = 0; i < report.pairs.size(); ++i) {
        const auto& r = report.pairs[i];
        rep << i << "," << format_double(r.pair.truth.theta_df) << ","
            << format_double(r.pair.truth.theta_rho) << "," << r.pair.truth.theta_0 << ","
            << r.pair.truth.theta_1 << "," << format_double(r.pair.predicted.theta_df) << ","
            << format_double(r.pair.predicted.theta_rho) << "," << r.pair.predicted.theta_0
            << "," << r.pair.predicted.theta_1;
        for (int d = 0; d < 3; ++d)
            rep << "," << format_double(r.mean_truth[d]) << ","
                << format_double(r.mean_predicted[d]) << "," << format_double(r.sd_truth[d])
                << "," << format_double(r.sd_predicted[d]);
        rep << "\n";
    }

    for (size_t i = 0; i < report.pairs.size(); ++i) {
        for (int d = 0; d < 3; ++d) {
            const auto& h = report.pairs[i].histograms[d];
            char name[64];
            std::snprintf(name, sizeof(name), "hist_%03zu_%s.csv", i, kComparisonDescriptors[d]);
            std::ofstream hf(dir / name, std::ios::binary);
            hf << "bin_lo,bin_hi,truth_count,predicted_count\n";
            const double w = (h.hi - h.lo) / kComparisonBins;
            for (int b = 0; b < kComparisonBins; ++b)
                hf << format_double(h.lo + b * w) << "," << format_double(h.lo + (b + 1) * w)
                   << "," << h.truth_counts[b] << "," << h.predicted_counts[b] << "\n";
        }
    }
}

// --- threshold baseline -----------------------------------------------------

double threshold_mixing_ratio(const ImageGrid& img, double t_bg, double t_mat,
                              double mean_area_0, double mean_area_1) {
    if (!(t_bg >= 0.0 && t_bg < t_mat))
        throw InvalidParams("thresholds must satisfy 0 <= t_bg < t_mat");
    if (!(mean_area_0 > 0.0 && mean_area_1 > 0.0))
        throw InvalidParams("mean projected areas must be positive");
    long long n_bright = 0, n_dark = 0;
    for (double v : img.values) {
        if (v > t_mat)
            ++n_bright;
        else if (v > t_bg)
            ++n_dark;
    }
    if (n_bright == 0 && n_dark == 0) {
        std::clog << "threshold_mixing_ratio: no pixel above background, returning 0.5\n";
        return 0.5;
    }
    const double px_area = img.pixel_size * img.pixel_size;
    const double count0 = static_cast<double>(n_bright) * px_area / mean_area_0;
    const double count1 = static_cast<double>(n_dark) * px_area / mean_area_1;
    return count0 / (count0 + count1);
}

double mean_projected_area(const RadiusDistribution& dist) {
    return 3.14159265358979323846 * (dist.mean * dist.mean + dist.std * dist.std);
}

std::vector<std::pair<double, double>> threshold_candidates(double v_hi, int grid_resolution) {
    if (grid_resolution < 1) throw InvalidParams("grid_resolution must be >= 1");
    if (!(v_hi > 0.0)) throw InvalidParams("candidate range must be positive");
    std::vector<std::pair<double, double>> out;
    const int g = grid_resolution;
    for (int kb = 0; kb < g; ++kb) {
        double b = v_hi * kb / g;
        for (int km = 1; km <= g; ++km) {
            double m = v_hi * km / g;
            if (b < m) out.emplace_back(b, m);
        }
    }
    return out;
}

double baseline_mae(const std::vector<BaselineSample>& samples, double t_bg, double t_mat,
                    double mean_area_0, double mean_area_1) {
    if (samples.empty()) throw InvalidParams("baseline needs at least one sample");
    double acc = 0.0;
    for (const auto& s : samples)
        acc += std::fabs(threshold_mixing_ratio(s.image, t_bg, t_mat, mean_area_0, mean_area_1) -
                         s.rho_truth);
    return acc / static_cast<double>(samples.size());
}

ThresholdCalibration calibrate_thresholds(const std::vector<BaselineSample>& train,
                                          int grid_resolution, double mean_area_0,
                                          double mean_area_1) {
    if (train.empty()) throw InvalidParams("calibration needs training samples");
    double v_hi = 0.0;
    for (const auto& s : train) v_hi = std::max(v_hi, image_min_max(s.image).second);
    if (!(v_hi > 0.0)) throw InvalidParams("all training images are empty");

    ThresholdCalibration best;
    best.v_hi = v_hi;
    best.grid_resolution = grid_resolution;
    best.train_mae = std::numeric_limits<double>::infinity();
    for (auto [b, m] : threshold_candidates(v_hi, grid_resolution)) {
        double err = baseline_mae(train, b, m, mean_area_0, mean_area_1);
        if (err < best.train_mae) {
            best.train_mae = err;
            best.t_bg = b;
            best.t_mat = m;
        }
    }
    return best;
}

std::vector<BaselineSample> baseline_samples_from_manifest(const Manifest& m,
                                                           const std::string& split) {
    std::vector<BaselineSample> out;
    for (const auto& e : m.entries) {
        if (e.split != split) continue;
        char meta_name[32];
        std::snprintf(meta_name, sizeof(meta_name), "%06lld.json", e.id);
        const auto meta = m.root / "meta" / meta_name;
        std::ifstream in(meta, std::ios::binary);
        if (!in) throw IoError("missing meta record: " + meta.string());
        nlohmann::json j;
        in >> j;
        const double v_max = j.at("v_max").get<double>();
        const double pixel_size = j.at("pixel_size").get<double>();
        BaselineSample s;
        s.image = load_pgm16(m.root / e.image_path, v_max, pixel_size);
        s.rho_truth = e.descriptors.mixing_ratio;
        out.push_back(std::move(s));
    }
    return out;
}

bool gap_set_check(const std::vector<double>& values, int n_max) {
    (void)n_max;
    for (double v : values)
        if (v > 1.975 && v < 2.0) return false;
    return true;
}

} // namespace aggstem
