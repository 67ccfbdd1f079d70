#ifndef AGGSTEM_METRICS_HPP
#define AGGSTEM_METRICS_HPP

#include <array>
#include <filesystem>
#include <utility>
#include <vector>

#include "aggstem/aggregation.hpp"
#include "aggstem/dataset.hpp"
#include "aggstem/image.hpp"

namespace aggstem {

struct PairedSeries {
    std::vector<double> y;     // ground truth
    std::vector<double> y_hat; // predictions

    void validate() const;
};

double mse(const PairedSeries& s);
double mae(const PairedSeries& s);
// 1 - MSE(y, y_hat) / MSE(y, mean(y)); throws ConstantTruth when y is constant.
double r_squared(const PairedSeries& s);

// --- descriptor distribution comparison ------------------------------------

struct ConfigPair {
    ModelParams truth;
    ModelParams predicted;
};

inline constexpr int kComparisonBins = 20;
inline constexpr const char* kComparisonDescriptors[3] = {"s_label1", "z_hetero", "z_total"};

struct DescriptorHistogram {
    double lo = 0.0, hi = 0.0; // bin range over both sample sets
    std::array<int, kComparisonBins> truth_counts{};
    std::array<int, kComparisonBins> predicted_counts{};
};

struct ComparisonPairResult {
    ConfigPair pair;
    // Mean and sample standard deviation of the descriptor values over
    // the generated samples; NaN when the descriptor was undefined for
    // every sample (label absent).
    std::array<double, 3> mean_truth{};
    std::array<double, 3> mean_predicted{};
    std::array<double, 3> sd_truth{};
    std::array<double, 3> sd_predicted{};
    std::array<DescriptorHistogram, 3> histograms{};
};

struct ComparisonReport {
    int per_config_samples = 0;
    std::vector<ComparisonPairResult> pairs;
    std::array<double, 3> mae_of_means{}; // across pairs, per descriptor
    std::array<double, 3> r2_of_means{};
};

// Draws per_config_samples aggregates under theta and theta_hat for each
// pair, compares the distributions of S_label1, Z_hetero and Z_total, and
// bins them into 20 equidistant histogram bins per pair.
ComparisonReport compare_descriptor_distributions(const std::vector<ConfigPair>& pairs,
                                                  int per_config_samples,
                                                  const GrowthConfig& growth,
                                                  const RandomStream& rng, int jobs = 0);

// report.csv + summary.csv + per-pair histogram CSVs under dir.
void write_comparison_report(const ComparisonReport& report,
                             const std::filesystem::path& dir);

// --- threshold baseline -----------------------------------------------------

// Pixel-classification estimate of the mixing ratio: values above t_mat
// count as label 0 (bright), values in (t_bg, t_mat] as label 1. Areas
// are converted to particle counts with the given mean projected areas
// (nm^2). Returns 0.5 when nothing classifies.
double threshold_mixing_ratio(const ImageGrid& img, double t_bg, double t_mat,
                              double mean_area_0, double mean_area_1);

// E[pi r^2] of the radius law: pi (mean^2 + std^2).
double mean_projected_area(const RadiusDistribution& dist);

struct BaselineSample {
    ImageGrid image;
    double rho_truth = 0.0;
};

struct ThresholdCalibration {
    double t_bg = 0.0;
    double t_mat = 0.0;
    double train_mae = 0.0;
    double v_hi = 0.0; // grid upper bound used for the candidates
    int grid_resolution = 0;
};

// Candidate enumeration shared by calibration and its re-scan check:
// t_bg in {v_hi*k/G : k=0..G-1}, t_mat in {v_hi*k/G : k=1..G}, t_bg < t_mat.
std::vector<std::pair<double, double>> threshold_candidates(double v_hi, int grid_resolution);

// Exhaustive grid search minimizing the MAE of threshold_mixing_ratio
// against the ground-truth mixing ratios.
ThresholdCalibration calibrate_thresholds(const std::vector<BaselineSample>& train,
                                          int grid_resolution, double mean_area_0,
                                          double mean_area_1);

// Loads the split's images of a dataset manifest (via their meta records)
// as baseline samples.
std::vector<BaselineSample> baseline_samples_from_manifest(const Manifest& m,
                                                           const std::string& split);

// Mean absolute error of the calibrated estimator over the given samples.
double baseline_mae(const std::vector<BaselineSample>& samples, double t_bg, double t_mat,
                    double mean_area_0, double mean_area_1);

// --- coordination number gap -----------------------------------------------

// For aggregates of at most n_max particles, Z_total = 2q1/q2 cannot fall
// inside (1.975, 2); true iff no value does.
bool gap_set_check(const std::vector<double>& values, int n_max = 80);

} // namespace aggstem

#endif
