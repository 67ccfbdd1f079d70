#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "aggstem/errors.hpp"
#include "aggstem/metrics.hpp"
#include "oracles.hpp"

using namespace aggstem;

TEST_CASE("error metrics hand values") {
    PairedSeries s{{1, 2}, {2, 4}};
    CHECK(mse(s) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(mae(s) == doctest::Approx(1.5).epsilon(1e-12));

    PairedSeries perfect{{3, 1, 4}, {3, 1, 4}};
    CHECK(mse(perfect) == 0.0);
    CHECK(mae(perfect) == 0.0);
    CHECK(r_squared(perfect) == 1.0);

    PairedSeries mean_pred{{0, 1, 2}, {1, 1, 1}};
    CHECK(r_squared(mean_pred) == doctest::Approx(0.0).epsilon(1e-12));

    PairedSeries bad{{0, 1, 2}, {0, 0, 0}};
    CHECK(r_squared(bad) == doctest::Approx(-1.5).epsilon(1e-12));

    PairedSeries constant{{2, 2, 2}, {1, 2, 3}};
    CHECK_THROWS_AS(r_squared(constant), ConstantTruth);
}

TEST_CASE("error metric properties on random series") {
    RandomStream rng(81);
    for (int k = 0; k < 20; ++k) {
        const int n = 50;
        PairedSeries s;
        for (int i = 0; i < n; ++i) {
            s.y.push_back(rng.uniform(-5, 5));
            s.y_hat.push_back(rng.uniform(-5, 5));
        }
        // direct formula evaluation
        double m2 = 0, m1 = 0;
        for (int i = 0; i < n; ++i) {
            m2 += (s.y[i] - s.y_hat[i]) * (s.y[i] - s.y_hat[i]);
            m1 += std::fabs(s.y[i] - s.y_hat[i]);
        }
        CHECK(mse(s) == doctest::Approx(m2 / n).epsilon(1e-12));
        CHECK(mae(s) == doctest::Approx(m1 / n).epsilon(1e-12));
        CHECK(mae(s) <= std::sqrt(mse(s)) + 1e-15);

        // invariance under simultaneous permutation
        PairedSeries p = s;
        for (size_t i = p.y.size(); i > 1; --i) {
            size_t j = rng.uniform_int(i);
            std::swap(p.y[i - 1], p.y[j]);
            std::swap(p.y_hat[i - 1], p.y_hat[j]);
        }
        CHECK(mse(p) == doctest::Approx(mse(s)).epsilon(1e-12));
        CHECK(mae(p) == doctest::Approx(mae(s)).epsilon(1e-12));
    }
}

TEST_CASE("mean computation routes agree to 1e-12") {
    RandomStream rng(82);
    std::vector<double> xs(10000);
    for (auto& x : xs) x = rng.lognormal(2.0, 0.6);

    double naive = 0.0;
    for (double x : xs) naive += x;
    naive /= static_cast<double>(xs.size());

    // compensated (Neumaier) streaming sum
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double kahan = (sum + comp) / static_cast<double>(xs.size());

    // two-pass: sort ascending for a different accumulation order
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    double sorted_sum = 0.0;
    for (double x : sorted) sorted_sum += x;
    double two_pass = sorted_sum / static_cast<double>(xs.size());

    CHECK(naive == doctest::Approx(kahan).epsilon(1e-12));
    CHECK(two_pass == doctest::Approx(kahan).epsilon(1e-12));
}

TEST_CASE("self comparison of descriptor distributions") {
    GrowthConfig growth;
    growth.target_size_min = 20;
    growth.target_size_max = 40;
    std::vector<ConfigPair> pairs;
    for (const auto& t : {ModelParams{1.6, 0.3, 1, 4}, ModelParams{2.0, 0.5, 3, 3},
                          ModelParams{2.4, 0.7, 5, 2}, ModelParams{1.8, 0.2, 2, 6}}) {
        ConfigPair p;
        p.truth = t;
        p.predicted = t;
        pairs.push_back(p);
    }
    ComparisonReport rep =
        compare_descriptor_distributions(pairs, 80, growth, RandomStream(83), 2);
    REQUIRE(rep.pairs.size() == 4);

    // truth and prediction are the same model: mean discrepancy is Monte
    // Carlo noise only
    for (int d = 0; d < 3; ++d) {
        REQUIRE(std::isfinite(rep.mae_of_means[d]));
        double se_sum = 0.0;
        int counted = 0;
        for (const auto& pr : rep.pairs) {
            if (std::isnan(pr.mean_truth[d])) continue;
            se_sum += std::sqrt(pr.sd_truth[d] * pr.sd_truth[d] / rep.per_config_samples +
                                pr.sd_predicted[d] * pr.sd_predicted[d] / rep.per_config_samples);
            ++counted;
        }
        REQUIRE(counted > 0);
        CHECK(rep.mae_of_means[d] <= 2.0 * se_sum / counted);
        CHECK(rep.r2_of_means[d] > 0.9);
    }

    // histograms count every generated sample
    for (const auto& pr : rep.pairs) {
        int total = 0;
        for (int b = 0; b < kComparisonBins; ++b) total += pr.histograms[1].truth_counts[b];
        CHECK(total == rep.per_config_samples);
    }

    SUBCASE("report files") {
        auto dir = std::filesystem::temp_directory_path() / "aggstem_report_test";
        std::filesystem::remove_all(dir);
        write_comparison_report(rep, dir);
        CHECK(std::filesystem::exists(dir / "summary.csv"));
        CHECK(std::filesystem::exists(dir / "report.csv"));
        CHECK(std::filesystem::exists(dir / "hist_000_z_hetero.csv"));
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("threshold mixing ratio estimator") {
    SUBCASE("nothing classifies: 0.5 fallback") {
        ImageGrid img(16, 16, 1.0);
        for (auto& v : img.values) v = 0.001;
        CHECK(threshold_mixing_ratio(img, 0.01, 0.5, 100.0, 100.0) == 0.5);
    }

    SUBCASE("two equal-area disks balance at 0.5") {
        ImageGrid img(100, 100, 1.0);
        auto disk = [&](double cx, double cy, double r, double value) {
            for (int iy = 0; iy < img.height; ++iy)
                for (int ix = 0; ix < img.width; ++ix) {
                    double dx = ix - cx, dy = iy - cy;
                    if (dx * dx + dy * dy <= r * r) img.at(ix, iy) = value;
                }
        };
        disk(30, 50, 10.0, 0.5);  // bright: class 0
        disk(70, 50, 10.0, 0.15); // dark: class 1
        double est = threshold_mixing_ratio(img, 0.05, 0.3, 314.0, 314.0);
        CHECK(est == doctest::Approx(0.5).epsilon(0.02));
    }

    SUBCASE("raising t_mat never increases the estimate") {
        RandomStream rng(84);
        ImageGrid img(64, 64, 1.0);
        for (auto& v : img.values) v = rng.uniform01() < 0.3 ? rng.uniform(0.0, 0.7) : 0.0;
        double prev = 1.0;
        for (double t_mat = 0.1; t_mat < 0.7; t_mat += 0.05) {
            double est = threshold_mixing_ratio(img, 0.01, t_mat, 450.0, 450.0);
            CHECK(est <= prev + 1e-12);
            prev = est;
        }
    }

    SUBCASE("invalid thresholds") {
        ImageGrid img(4, 4, 1.0);
        CHECK_THROWS_AS(threshold_mixing_ratio(img, 0.5, 0.5, 1.0, 1.0), InvalidParams);
    }
}

TEST_CASE("mean projected area from the radius law") {
    RadiusDistribution d{12.0, 3.0};
    CHECK(mean_projected_area(d) ==
          doctest::Approx(3.14159265358979323846 * 153.0).epsilon(1e-12));
}

TEST_CASE("threshold calibration") {
    // synthetic training set: mixture images whose bright fraction tracks rho
    RandomStream rng(85);
    std::vector<BaselineSample> train;
    for (int k = 0; k < 12; ++k) {
        double rho = 0.1 + 0.8 * k / 11.0;
        ImageGrid img(48, 48, 1.0);
        for (auto& v : img.values) {
            double u = rng.uniform01();
            if (u < 0.2 * rho)
                v = rng.uniform(0.4, 0.6); // bright material
            else if (u < 0.2)
                v = rng.uniform(0.1, 0.2); // dark material
            else
                v = 0.0;
        }
        train.push_back({img, rho});
    }

    SUBCASE("grid resolution 1 yields the single candidate pair") {
        auto cands = threshold_candidates(1.0, 1);
        REQUIRE(cands.size() == 1);
        CHECK(cands[0].first == 0.0);
        CHECK(cands[0].second == 1.0);
        ThresholdCalibration cal = calibrate_thresholds(train, 1, 100.0, 100.0);
        CHECK(cal.t_bg == 0.0);
        CHECK(cal.t_mat == cal.v_hi);
    }

    SUBCASE("returned pair is grid optimal under exhaustive re-scan") {
        ThresholdCalibration cal = calibrate_thresholds(train, 8, 100.0, 100.0);
        double best = std::numeric_limits<double>::infinity();
        for (auto [b, m] : threshold_candidates(cal.v_hi, 8))
            best = std::min(best, baseline_mae(train, b, m, 100.0, 100.0));
        CHECK(cal.train_mae == doctest::Approx(best).epsilon(1e-12));
        double returned = baseline_mae(train, cal.t_bg, cal.t_mat, 100.0, 100.0);
        CHECK(returned == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("gap set check") {
    CHECK(gap_set_check({1.5}));          // 2*3/4, member of the value set
    CHECK(gap_set_check({1.975, 2.0}));   // boundary values are allowed
    CHECK_FALSE(gap_set_check({1.99}));   // inside the forbidden gap
    CHECK(gap_set_check({}));             // empty sequence
    CHECK(gap_set_check({0.0, 1.2, 2.5, 1.9749999}));
}
