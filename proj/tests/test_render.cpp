#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "aggstem/errors.hpp"
#include "aggstem/image_io.hpp"
#include "aggstem/render.hpp"
#include "oracles.hpp"

using namespace aggstem;

namespace {

// single linear curve I = c * t, no variant spread
IntensityModel linear_model(double c0 = 0.01, double c1 = 0.004) {
    IntensityModel m;
    for (int label = 0; label < 2; ++label) {
        IntensityCurve c;
        c.thickness = {0.0, 400.0};
        double slope = label == 0 ? c0 : c1;
        c.intensity = {0.0, slope * 400.0};
        m.variants[label] = {c};
    }
    return m;
}

double image_variance_px(const ImageGrid& img) {
    // lateral second moment about the intensity centroid, x-direction
    double w = 0.0, mx = 0.0;
    for (int iy = 0; iy < img.height; ++iy)
        for (int ix = 0; ix < img.width; ++ix) {
            w += img.at(ix, iy);
            mx += img.at(ix, iy) * ix;
        }
    mx /= w;
    double var = 0.0;
    for (int iy = 0; iy < img.height; ++iy)
        for (int ix = 0; ix < img.width; ++ix)
            var += img.at(ix, iy) * (ix - mx) * (ix - mx);
    return var / w;
}

} // namespace

TEST_CASE("thickness map chord values") {
    ImageGrid grid(64, 64, 1.0);
    Particle p{{0, 0, 0}, 10.0, 0};
    ImageGrid t = thickness_map(p, grid);

    // pixel (31.5, 31.5) is the center; with 64 px the axis falls between
    // pixels, so probe a grid whose pixel centers hit the axis exactly
    ImageGrid odd(65, 65, 1.0);
    ImageGrid t2 = thickness_map(p, odd);
    CHECK(t2.at(32, 32) == doctest::Approx(20.0).epsilon(1e-12));      // on axis
    CHECK(t2.at(38, 32) == doctest::Approx(16.0).epsilon(1e-12));      // offset 6
    CHECK(t2.at(42, 32) == 0.0);                                       // outside
    (void)t;
}

TEST_CASE("thickness map integrates to the sphere volume") {
    for (double r : {8.0, 12.0, 20.0}) {
        ImageGrid grid(128, 128, 1.0);
        Particle p{{0, 0, 0}, r, 0};
        ImageGrid t = thickness_map(p, grid);
        double vol = image_sum(t) * grid.pixel_size * grid.pixel_size;
        double expect = 4.0 / 3.0 * 3.14159265358979323846 * r * r * r;
        CHECK(vol == doctest::Approx(expect).epsilon(0.01));
    }
}

TEST_CASE("particle intensity map") {
    ImageGrid grid(65, 65, 1.0);
    IntensityModel m = linear_model();

    SUBCASE("zero thickness stays zero") {
        Particle far{{500, 500, 0}, 5.0, 0};
        RandomStream rng(31);
        ImageGrid img = particle_intensity_map(far, grid, m, rng);
        CHECK(image_sum(img) == 0.0);
    }
    SUBCASE("linear curve scales the thickness map") {
        Particle p{{0, 0, 0}, 10.0, 1};
        RandomStream rng(32);
        ImageGrid img = particle_intensity_map(p, grid, m, rng);
        ImageGrid t = thickness_map(p, grid);
        for (size_t i = 0; i < img.values.size(); ++i)
            CHECK(img.values[i] == doctest::Approx(0.004 * t.values[i]).epsilon(1e-12));
    }
    SUBCASE("fixed seed reproduces the variant choice") {
        IntensityModel def = IntensityModel::default_model();
        Particle p{{0, 0, 0}, 10.0, 0};
        RandomStream r1(33), r2(33);
        ImageGrid a = particle_intensity_map(p, grid, def, r1);
        ImageGrid b = particle_intensity_map(p, grid, def, r2);
        CHECK(a.values == b.values);
    }
}

TEST_CASE("defocus blur") {
    RenderConfig cfg;
    SUBCASE("sigma formula") {
        CHECK(cfg.sigma_stem(0.0) == 0.0);
        CHECK(cfg.sigma_stem(100.0) == doctest::Approx(100.0 * std::tan(0.0211)).epsilon(1e-12));
        CHECK(cfg.sigma_stem(100.0) == doctest::Approx(2.1103).epsilon(1e-4));
        CHECK(cfg.sigma_stem(-100.0) == cfg.sigma_stem(100.0));
    }
    SUBCASE("zero sigma is the identity") {
        ImageGrid img(32, 32, 1.0);
        img.at(10, 12) = 3.0;
        ImageGrid out = defocus_blur(img, 0.0);
        CHECK(out.values == img.values);
    }
    SUBCASE("impulse response second moment") {
        for (double sigma : {1.5, 2.5, 4.0}) {
            ImageGrid img(129, 129, 1.0);
            img.at(64, 64) = 1.0;
            ImageGrid out = defocus_blur(img, sigma);
            CHECK(image_variance_px(out) == doctest::Approx(sigma * sigma).epsilon(0.02));
        }
    }
    SUBCASE("conservation for interior support") {
        ImageGrid img(128, 128, 1.0);
        Particle p{{0, 0, 0}, 12.0, 0};
        img = thickness_map(p, img);
        double before = image_sum(img);
        ImageGrid out = defocus_blur(img, 3.0);
        CHECK(image_sum(out) == doctest::Approx(before).epsilon(0.01));
    }
    SUBCASE("matches the dense reference convolution") {
        RandomStream rng(34);
        ImageGrid img(96, 96, 1.0);
        for (auto& v : img.values) v = rng.uniform01();
        ImageGrid fast = defocus_blur(img, 2.2);
        ImageGrid slow = reference::defocus_blur(img, 2.2);
        for (size_t i = 0; i < img.values.size(); ++i)
            CHECK(fast.values[i] == doctest::Approx(slow.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("compose") {
    RenderConfig cfg;
    cfg.width = cfg.height = 128;
    IntensityModel m = linear_model();

    SUBCASE("single particle in focus equals its unblurred intensity map") {
        Aggregate a;
        a.particles = {{{0, 0, 0}, 10.0, 0}};
        RandomStream rng(35);
        ImageGrid img = compose(a, cfg, m, rng);
        ImageGrid grid = cfg.make_grid();
        RandomStream rv(36);
        ImageGrid expect = particle_intensity_map(a.particles[0], grid, m, rv);
        for (size_t i = 0; i < img.values.size(); ++i)
            CHECK(img.values[i] == doctest::Approx(expect.values[i]).epsilon(1e-12));
    }

    SUBCASE("disjoint particles add exactly") {
        Aggregate both;
        both.particles = {{{-30, 0, 4}, 8.0, 0}, {{30, 0, -4}, 8.0, 1}};
        RandomStream rng(37);
        ImageGrid img = compose(both, cfg, m, rng);

        // compose each particle alone on the same centered grid
        ImageGrid acc = cfg.make_grid();
        const Vec3 com = center_of_mass(both);
        for (const auto& p : both.particles) {
            Particle q{p.position - com, p.radius, p.label};
            ImageGrid t = thickness_map(q, acc);
            const auto& curve = m.variants[q.label][0];
            for (auto& v : t.values) v = curve.eval(v);
            t = defocus_blur(t, cfg.sigma_stem(q.position.z) / cfg.pixel_size);
            for (size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += t.values[i];
        }
        for (size_t i = 0; i < img.values.size(); ++i)
            CHECK(img.values[i] == doctest::Approx(acc.values[i]).epsilon(1e-9));
    }

    SUBCASE("matches the reference compose") {
        RandomStream gen(38);
        Aggregate a = oracle::random_aggregate(gen, 20, 25);
        RandomStream rng(39);
        ImageGrid fast = compose(a, cfg, IntensityModel::default_model(), rng);
        ImageGrid slow = reference::compose(a, cfg, IntensityModel::default_model(), rng);
        double scale = image_min_max(fast).second;
        for (size_t i = 0; i < fast.values.size(); ++i)
            CHECK(fast.values[i] == doctest::Approx(slow.values[i]).epsilon(1e-10).scale(scale));
    }

    SUBCASE("field of view overflow") {
        Aggregate a;
        a.particles = {{{0, 0, 0}, 10.0, 0}, {{140, 0, 0}, 10.0, 0}};
        RandomStream rng(40);
        CHECK_THROWS_AS(compose(a, cfg, m, rng), FieldOfViewOverflow);
    }
}

TEST_CASE("shot noise") {
    RenderConfig cfg;
    cfg.width = cfg.height = 32;

    SUBCASE("zero pixels stay zero, infinite dose is the identity") {
        ImageGrid img = cfg.make_grid();
        img.at(3, 3) = 0.25;
        RandomStream rng(41);
        ImageGrid noisy = apply_shot_noise(img, cfg, rng);
        CHECK(noisy.at(0, 0) == 0.0);
        RenderConfig quiet = cfg;
        quiet.dose = std::numeric_limits<double>::infinity();
        ImageGrid same = apply_shot_noise(img, quiet, rng);
        CHECK(same.values == img.values);
    }

    SUBCASE("counts scale: 1 nm pixel means lambda = 14900 I") {
        // every outcome is an integer multiple of 1/14900
        ImageGrid img = cfg.make_grid();
        for (auto& v : img.values) v = 0.3;
        RandomStream rng(42);
        ImageGrid noisy = apply_shot_noise(img, cfg, rng);
        const double unit = 1.0 / (149.0 * 100.0);
        for (double v : noisy.values) {
            double k = v / unit;
            CHECK(std::fabs(k - std::nearbyint(k)) < 1e-9);
        }
    }

    SUBCASE("unbiased over 200 realizations") {
        ImageGrid img = cfg.make_grid();
        for (int iy = 0; iy < cfg.height; ++iy)
            for (int ix = 0; ix < cfg.width; ++ix)
                img.at(ix, iy) = 0.1 + 0.4 * ix / cfg.width;
        RandomStream rng(43);
        const int reps = 200;
        std::vector<double> means(reps);
        for (int k = 0; k < reps; ++k)
            means[k] = image_mean(apply_shot_noise(img, cfg, rng.child(k)));
        double se = oracle::stddev(means) / std::sqrt(static_cast<double>(reps));
        CHECK(std::fabs(oracle::mean(means) - image_mean(img)) < 3 * se);
    }
}

TEST_CASE("scan noise") {
    RenderConfig cfg;
    cfg.width = cfg.height = 48;

    SUBCASE("zero sigma is the identity") {
        ImageGrid img = cfg.make_grid();
        img.at(5, 7) = 1.0;
        RenderConfig c0 = cfg;
        c0.scan_sigma = 0.0;
        RandomStream rng(44);
        CHECK(apply_scan_noise(img, c0, rng).values == img.values);
    }
    SUBCASE("constant images are unchanged") {
        ImageGrid img = cfg.make_grid();
        for (auto& v : img.values) v = 0.37;
        RenderConfig big = cfg;
        big.scan_sigma = 1.5; // strong jitter
        RandomStream rng(45);
        ImageGrid out = apply_scan_noise(img, big, rng);
        for (double v : out.values) CHECK(v == 0.37);
    }
    SUBCASE("displacement sampler std within 3 percent") {
        RandomStream rng(46);
        const int n = 100000;
        std::vector<double> d(n);
        for (auto& x : d) x = rng.normal() * 0.01;
        CHECK(oracle::stddev(d) == doctest::Approx(0.01).epsilon(0.03));
    }
    SUBCASE("per-row mode shifts whole rows") {
        ImageGrid img = cfg.make_grid();
        for (int iy = 0; iy < cfg.height; ++iy)
            for (int ix = 0; ix < cfg.width; ++ix) img.at(ix, iy) = ix; // column ramp
        RenderConfig rowcfg = cfg;
        rowcfg.scan_sigma = 0.5;
        rowcfg.scan_per_row = true;
        RandomStream rng(47);
        ImageGrid out = apply_scan_noise(img, rowcfg, rng);
        // within one row the ramp stays a ramp: constant first difference
        for (int iy = 0; iy < cfg.height; ++iy)
            for (int ix = 2; ix < cfg.width - 2; ++ix)
                CHECK(out.at(ix + 1, iy) - out.at(ix, iy) ==
                      doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("render pipeline") {
    RenderConfig cfg;
    cfg.width = cfg.height = 192;
    IntensityModel model = IntensityModel::default_model();
    RandomStream gen(48);
    Aggregate a = oracle::random_aggregate(gen, 20, 25);

    SUBCASE("noiseless limit equals compose") {
        RenderConfig quiet = cfg;
        quiet.dose = std::numeric_limits<double>::infinity();
        quiet.scan_sigma = 0.0;
        RandomStream rng(49);
        ImageGrid r = render(a, quiet, model, rng);
        ImageGrid c = compose(a, quiet, model, rng);
        CHECK(r.values == c.values);
    }

    SUBCASE("same seed, same bytes") {
        RandomStream rng(50);
        ImageGrid r1 = render(a, cfg, model, rng);
        ImageGrid r2 = render(a, cfg, model, rng);
        CHECK(r1.values == r2.values);
        double v1 = 0.0, v2 = 0.0;
        CHECK(pgm16_bytes(r1, v1) == pgm16_bytes(r2, v2));
    }

    SUBCASE("label 0 renders brighter than label 1") {
        for (int k = 0; k < 10; ++k) {
            Aggregate bright, dark;
            bright.particles = {{{0, 0, 0}, 12.0, 0}};
            dark.particles = {{{0, 0, 0}, 12.0, 1}};
            RandomStream rng(51 + k);
            ImageGrid b = compose(bright, cfg, model, rng);
            ImageGrid d = compose(dark, cfg, model, rng);
            CHECK(image_min_max(b).second > image_min_max(d).second);
        }
    }

    SUBCASE("on-axis value is monotone in the radius") {
        double prev = -1.0;
        RenderConfig odd = cfg;
        odd.width = odd.height = 129; // axis on a pixel center
        IntensityModel m = linear_model();
        for (double r : {4.0, 8.0, 12.0, 16.0}) {
            Aggregate one;
            one.particles = {{{0, 0, 0}, r, 0}};
            RandomStream rng(52);
            ImageGrid img = compose(one, odd, m, rng);
            double peak = img.at(64, 64);
            CHECK(peak >= prev);
            prev = peak;
        }
    }
}

TEST_CASE("pgm round trip") {
    RenderConfig cfg;
    cfg.width = cfg.height = 96;
    RandomStream gen(53);
    Aggregate a = oracle::random_aggregate(gen, 20, 25);
    ImageGrid img = render(a, cfg, IntensityModel::default_model(), RandomStream(54));

    auto tmp = std::filesystem::temp_directory_path() / "aggstem_pgm_test.pgm";
    double v_max = save_pgm16(img, tmp);
    ImageGrid back = load_pgm16(tmp, v_max, cfg.pixel_size);
    REQUIRE(back.values.size() == img.values.size());
    const double step = v_max / 65535.0;
    for (size_t i = 0; i < img.values.size(); ++i)
        CHECK(std::fabs(back.values[i] - img.values[i]) <= 0.5 * step + 1e-12);
    std::filesystem::remove(tmp);
}

TEST_CASE("intensity model contract") {
    IntensityModel m = IntensityModel::default_model();
    CHECK_NOTHROW(m.validate());
    CHECK(m.variant_count(0) == 10);
    CHECK(m.variant_count(1) == 10);
    // label-0 curves dominate label-1 curves pointwise
    for (double t : {1.0, 5.0, 20.0, 60.0, 119.0}) {
        double min0 = 1e9, max1 = -1e9;
        for (int v = 0; v < 10; ++v) {
            min0 = std::min(min0, m.curve(0, v).eval(t));
            max1 = std::max(max1, m.curve(1, v).eval(t));
        }
        CHECK(min0 > max1);
    }

    SUBCASE("LUT round trip") {
        auto tmp = std::filesystem::temp_directory_path() / "aggstem_lut_test.txt";
        m.save_lut(tmp);
        IntensityModel back = IntensityModel::load_lut(tmp);
        REQUIRE(back.variant_count(0) == 10);
        for (double t : {0.0, 3.3, 47.0, 200.0})
            CHECK(back.curve(0, 3).eval(t) == doctest::Approx(m.curve(0, 3).eval(t)).epsilon(1e-12));
        std::filesystem::remove(tmp);
    }
    SUBCASE("non-monotone LUT rejected") {
        IntensityModel bad = linear_model();
        bad.variants[0][0].intensity[1] = -1.0;
        CHECK_THROWS_AS(bad.validate(), InvalidParams);
    }
}

TEST_CASE("parallel kernels match the single-thread path bit for bit") {
    RenderConfig cfg;
    cfg.width = cfg.height = 160;
    IntensityModel model = IntensityModel::default_model();
    RandomStream gen(55);
    Aggregate a = oracle::random_aggregate(gen, 20, 30);

    ImageGrid c1 = compose(a, cfg, model, RandomStream(56), 1);
    ImageGrid c4 = compose(a, cfg, model, RandomStream(56), 4);
    CHECK(c1.values == c4.values);

    ImageGrid b1 = defocus_blur(c1, 2.3, 1);
    ImageGrid b4 = defocus_blur(c1, 2.3, 4);
    CHECK(b1.values == b4.values);

    ImageGrid s1 = apply_shot_noise(c1, cfg, RandomStream(57), 1);
    ImageGrid s4 = apply_shot_noise(c1, cfg, RandomStream(57), 4);
    CHECK(s1.values == s4.values);
    CHECK(s1.values == reference::apply_shot_noise(c1, cfg, RandomStream(57)).values);

    ImageGrid n1 = apply_scan_noise(s1, cfg, RandomStream(58), 1);
    ImageGrid n4 = apply_scan_noise(s1, cfg, RandomStream(58), 4);
    CHECK(n1.values == n4.values);
    CHECK(n1.values == reference::apply_scan_noise(s1, cfg, RandomStream(58)).values);

    ImageGrid r1 = render(a, cfg, model, RandomStream(59), 1);
    ImageGrid r4 = render(a, cfg, model, RandomStream(59), 4);
    CHECK(r1.values == r4.values);
}
