// aggstem: generate fractal hetero-aggregates, render synthetic STEM-like
// images, assemble labeled datasets, and evaluate estimators against them.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aggstem/aggregation.hpp"
#include "aggstem/config.hpp"
#include "aggstem/dataset.hpp"
#include "aggstem/descriptors.hpp"
#include "aggstem/errors.hpp"
#include "aggstem/geometry_io.hpp"
#include "aggstem/image_io.hpp"
#include "aggstem/metrics.hpp"
#include "aggstem/parallel.hpp"
#include "aggstem/render.hpp"

namespace fs = std::filesystem;
using namespace aggstem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitGeneration = 3;
constexpr int kExitIo = 4;

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 1;
    bool seed_given = false;
    int jobs = 0;
    std::string out = ".";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    const char* env = std::getenv("AGGSTEM_CONFIG");
    if (env) o.config_path = env;
    cmd->add_option("--config", o.config_path, "key-value config file");
    cmd->add_option("--seed", o.seed, "master seed")->each([&](const std::string&) {
        o.seed_given = true;
    });
    cmd->add_option("--jobs", o.jobs, "worker threads (0 = all)");
    cmd->add_option("--out", o.out, "output directory");
}

KeyValueConfig resolve_config(const CommonOpts& o) {
    KeyValueConfig kv;
    if (!o.config_path.empty()) kv = KeyValueConfig::load(o.config_path);
    if (o.seed_given || !kv.has("seed")) kv.set("seed", std::to_string(o.seed));
    if (o.jobs > 0 || !kv.has("jobs")) kv.set("jobs", std::to_string(o.jobs));
    return kv;
}

void write_snapshot(const KeyValueConfig& kv, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    kv.save(out_dir / "resolved_config.cfg");
}

ModelParams parse_theta(const std::string& s) {
    ModelParams t;
    if (std::sscanf(s.c_str(), "%lf,%lf,%d,%d", &t.theta_df, &t.theta_rho, &t.theta_0,
                    &t.theta_1) != 4)
        throw InvalidParams("--theta expects df,rho,c0,c1");
    t.validate();
    return t;
}

void print_error(const std::string& type, const std::string& message) {
    nlohmann::json j;
    j["error"] = type;
    j["message"] = message;
    std::cerr << j.dump() << "\n";
}

IntensityModel model_from(const std::string& lut_path) {
    return lut_path.empty() ? IntensityModel::default_model()
                            : IntensityModel::load_lut(lut_path);
}

// --- generate ---------------------------------------------------------------

int cmd_generate(const CommonOpts& o, const std::string& theta_str, long long count) {
    KeyValueConfig kv = resolve_config(o);
    ModelParams theta = parse_theta(theta_str);
    GrowthConfig growth = growth_from_config(kv);
    kv.set("theta", theta_str);
    kv.set("count", std::to_string(count));
    write_snapshot(kv, o.out);

    const std::uint64_t seed = kv.get_u64("seed", 1);
    RandomStream master(seed);
    std::ofstream csv(fs::path(o.out) / "descriptors.csv", std::ios::binary);
    csv << "id," << descriptor_csv_header() << "\n";
    for (long long k = 0; k < count; ++k) {
        RandomStream rs = master.child(static_cast<std::uint64_t>(k));
        Aggregate a = build_hetero_aggregate(theta, growth, rs);
        char name[32];
        std::snprintf(name, sizeof(name), "agg_%06lld.txt", k);
        save_geometry(a, fs::path(o.out) / name);
        csv << k << "," << descriptor_csv_row(descriptor_report(a, growth.k_f)) << "\n";
    }
    std::cout << "generated " << count << " aggregates under " << o.out << "\n";
    return kExitOk;
}

// --- render -----------------------------------------------------------------

int cmd_render(const CommonOpts& o, const std::string& input, const std::string& lut,
               bool raw) {
    KeyValueConfig kv = resolve_config(o);
    RenderConfig rc = render_from_config(kv);
    IntensityModel model = model_from(lut);
    write_snapshot(kv, o.out);

    std::vector<fs::path> inputs;
    if (fs::is_directory(input)) {
        for (const auto& e : fs::directory_iterator(input))
            if (e.path().extension() == ".txt") inputs.push_back(e.path());
        std::sort(inputs.begin(), inputs.end());
    } else {
        inputs.push_back(input);
    }
    if (inputs.empty()) throw InvalidParams("no geometry files under " + input);

    const std::uint64_t seed = kv.get_u64("seed", 1);
    const int jobs = kv.get_int("jobs", 0);
    const std::string config_hash = hex16(fnv1a64(kv.canonical_text()));
    RandomStream master(seed);

    int failed = 0;
    for (size_t i = 0; i < inputs.size(); ++i) {
        try {
            Aggregate a = load_geometry(inputs[i]);
            RandomStream rs = master.child(static_cast<std::uint64_t>(i));
            ImageGrid img = render(a, rc, model, rs, jobs);
            fs::path base = fs::path(o.out) / inputs[i].stem();
            double v_max = save_pgm16(img, base.string() + ".pgm");
            if (raw) save_raw_f32(img, base.string() + ".f32");
            ImageSidecar sc;
            sc.pixel_size = rc.pixel_size;
            sc.v_max = v_max;
            sc.seed = rs.seed();
            if (a.provenance) sc.theta = a.provenance->theta;
            sc.config_hash = config_hash;
            save_sidecar(sc, base.string() + ".json");
        } catch (const FieldOfViewOverflow& e) {
            print_error("FieldOfViewOverflow", inputs[i].string() + ": " + e.what());
            ++failed;
        }
    }
    std::cout << "rendered " << (inputs.size() - failed) << "/" << inputs.size()
              << " geometries to " << o.out << "\n";
    return failed == static_cast<int>(inputs.size()) ? kExitGeneration : kExitOk;
}

// --- dataset ----------------------------------------------------------------

int cmd_dataset(const CommonOpts& o, const std::string& lut, double fraction) {
    KeyValueConfig kv = resolve_config(o);
    SweepSpec spec = sweep_from_config(kv);
    GrowthConfig growth = growth_from_config(kv);
    RenderConfig rc = render_from_config(kv);
    IntensityModel model = model_from(lut);
    const std::uint64_t seed = kv.get_u64("seed", 1);
    const int jobs = kv.get_int("jobs", 0);
    const double frac = fraction > 0.0 ? fraction : kv.get_double("split.fraction", 0.6);
    const int min_per_config = kv.get_int("split.min_per_config", 20);
    kv.set("split.fraction", format_double(frac));
    kv.set("split.min_per_config", std::to_string(min_per_config));
    write_snapshot(kv, o.out);

    Manifest m = run_sweep(spec, growth, rc, model, seed, o.out, jobs);
    m.min_per_config = min_per_config;
    RandomStream split_rng = RandomStream(seed).child(3);
    m = split_train_eval(m, frac, split_rng);
    m.save(fs::path(o.out) / "manifest.csv");
    std::cout << "dataset: " << m.entries.size() << " entries ("
              << spec.total_entries() - static_cast<long long>(m.entries.size())
              << " failed or dropped), manifest at " << o.out << "/manifest.csv\n";
    return kExitOk;
}

// --- metrics ----------------------------------------------------------------

std::vector<ConfigPair> pairs_from_file(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open pairs file: " + file.string());
    std::vector<ConfigPair> pairs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        ConfigPair p;
        if (std::sscanf(line.c_str(), "%lf,%lf,%d,%d,%lf,%lf,%d,%d", &p.truth.theta_df,
                        &p.truth.theta_rho, &p.truth.theta_0, &p.truth.theta_1,
                        &p.predicted.theta_df, &p.predicted.theta_rho, &p.predicted.theta_0,
                        &p.predicted.theta_1) != 8)
            throw ParseError("pairs file line " + std::to_string(lineno) +
                             ": expected 8 comma-separated values");
        pairs.push_back(p);
    }
    if (pairs.empty()) throw InvalidParams("pairs file is empty");
    return pairs;
}

std::vector<ConfigPair> self_pairs_from_manifest(const fs::path& manifest, int max_pairs) {
    Manifest m = Manifest::load(manifest);
    std::set<std::tuple<double, double, int, int>> seen;
    std::vector<ConfigPair> pairs;
    for (const auto& e : m.entries) {
        auto key = std::make_tuple(e.theta.theta_df, e.theta.theta_rho, e.theta.theta_0,
                                   e.theta.theta_1);
        if (seen.insert(key).second) {
            ConfigPair p;
            p.truth = e.theta;
            p.predicted = e.theta;
            pairs.push_back(p);
            if (static_cast<int>(pairs.size()) >= max_pairs) break;
        }
    }
    if (pairs.empty()) throw InvalidParams("manifest has no entries");
    return pairs;
}

int cmd_metrics(const CommonOpts& o, const std::string& manifest, const std::string& pairs_file,
                int max_pairs, int samples) {
    KeyValueConfig kv = resolve_config(o);
    GrowthConfig growth = growth_from_config(kv);
    write_snapshot(kv, o.out);

    std::vector<ConfigPair> pairs;
    if (!pairs_file.empty())
        pairs = pairs_from_file(pairs_file);
    else if (!manifest.empty())
        pairs = self_pairs_from_manifest(manifest, max_pairs);
    else
        throw InvalidParams("metrics needs --manifest or --pairs-file");

    RandomStream rng = RandomStream(kv.get_u64("seed", 1)).child(5);
    ComparisonReport report = compare_descriptor_distributions(pairs, samples, growth, rng,
                                                               kv.get_int("jobs", 0));
    write_comparison_report(report, o.out);
    for (int d = 0; d < 3; ++d)
        std::cout << kComparisonDescriptors[d] << ": mae_of_means "
                  << format_double(report.mae_of_means[d]) << ", r2 "
                  << format_double(report.r2_of_means[d]) << "\n";
    return kExitOk;
}

// --- baseline ---------------------------------------------------------------

int cmd_baseline(const CommonOpts& o, const std::string& manifest, int grid) {
    KeyValueConfig kv = resolve_config(o);
    GrowthConfig growth = growth_from_config(kv);
    write_snapshot(kv, o.out);

    Manifest m = Manifest::load(manifest);
    auto train = baseline_samples_from_manifest(m, "train");
    auto eval = baseline_samples_from_manifest(m, "eval");
    if (train.empty() || eval.empty())
        throw InvalidParams("manifest needs both train and eval entries");

    const double area0 = mean_projected_area(growth.radius);
    const double area1 = area0; // same radius law for both materials
    ThresholdCalibration cal = calibrate_thresholds(train, grid, area0, area1);
    const double eval_mae = baseline_mae(eval, cal.t_bg, cal.t_mat, area0, area1);

    std::ofstream out(fs::path(o.out) / "baseline.csv", std::ios::binary);
    out << "t_bg,t_mat,grid_resolution,train_mae,eval_mae,literature_reference_mae\n";
    out << format_double(cal.t_bg) << "," << format_double(cal.t_mat) << ","
        << cal.grid_resolution << "," << format_double(cal.train_mae) << ","
        << format_double(eval_mae) << ",0.078\n";
    std::cout << "thresholds: t_bg " << format_double(cal.t_bg) << ", t_mat "
              << format_double(cal.t_mat) << "\n"
              << "train MAE " << format_double(cal.train_mae) << ", eval MAE "
              << format_double(eval_mae) << " (literature reference: 0.078)\n";
    return kExitOk;
}

// --- plotdata ---------------------------------------------------------------

int cmd_plotdata(const CommonOpts& o, const std::string& manifest, int bins) {
    KeyValueConfig kv = resolve_config(o);
    write_snapshot(kv, o.out);
    Manifest m = Manifest::load(manifest);
    if (m.entries.empty()) throw InvalidParams("manifest has no entries");

    struct Field {
        const char* name;
        std::function<std::optional<double>(const ManifestEntry&)> get;
    };
    const std::vector<Field> fields = {
        {"fractal_dim",
         [](const ManifestEntry& e) -> std::optional<double> {
             if (std::isnan(e.descriptors.fractal_dim)) return std::nullopt;
             return e.descriptors.fractal_dim;
         }},
        {"mixing_ratio",
         [](const ManifestEntry& e) -> std::optional<double> { return e.descriptors.mixing_ratio; }},
        {"avg_cluster_size_label0",
         [](const ManifestEntry& e) { return e.descriptors.avg_cluster_size_label0; }},
        {"avg_cluster_size_label1",
         [](const ManifestEntry& e) { return e.descriptors.avg_cluster_size_label1; }},
        {"z_hetero",
         [](const ManifestEntry& e) -> std::optional<double> { return e.descriptors.z_hetero; }},
        {"z_total",
         [](const ManifestEntry& e) -> std::optional<double> { return e.descriptors.z_total; }},
    };

    for (const auto& f : fields) {
        std::map<std::tuple<double, double, int, int>, std::vector<double>> groups;
        for (const auto& e : m.entries) {
            auto v = f.get(e);
            if (v) groups[{e.theta.theta_df, e.theta.theta_rho, e.theta.theta_0,
                           e.theta.theta_1}].push_back(*v);
        }
        std::ofstream out(fs::path(o.out) / ("density_" + std::string(f.name) + ".csv"),
                          std::ios::binary);
        out << "theta_df,theta_rho,theta_0,theta_1,bin_lo,bin_hi,count\n";
        for (const auto& [key, vals] : groups) {
            double lo = *std::min_element(vals.begin(), vals.end());
            double hi = *std::max_element(vals.begin(), vals.end());
            if (!(hi > lo)) hi = lo + 1.0;
            std::vector<int> counts(static_cast<size_t>(bins), 0);
            for (double v : vals) {
                int b = static_cast<int>((v - lo) / (hi - lo) * bins);
                ++counts[static_cast<size_t>(std::clamp(b, 0, bins - 1))];
            }
            const double w = (hi - lo) / bins;
            for (int b = 0; b < bins; ++b)
                out << format_double(std::get<0>(key)) << "," << format_double(std::get<1>(key))
                    << "," << std::get<2>(key) << "," << std::get<3>(key) << ","
                    << format_double(lo + b * w) << "," << format_double(lo + (b + 1) * w)
                    << "," << counts[static_cast<size_t>(b)] << "\n";
        }
    }
    std::cout << "density CSVs written to " << o.out << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractal hetero-aggregate simulator and synthetic STEM dataset factory"};
    app.require_subcommand(1);

    CommonOpts gen_o, ren_o, ds_o, met_o, base_o, plot_o;
    std::string theta_str = "2.0,0.5,3,3";
    long long count = 1;
    auto* gen = app.add_subcommand("generate", "sample aggregates and write geometry files");
    add_common(gen, gen_o);
    gen->add_option("--theta", theta_str, "df,rho,c0,c1");
    gen->add_option("--count", count, "number of aggregates");

    std::string render_in, render_lut;
    bool render_raw = false;
    auto* ren = app.add_subcommand("render", "render geometry files to STEM-like images");
    add_common(ren, ren_o);
    ren->add_option("--in", render_in, "geometry file or directory")->required();
    ren->add_option("--lut", render_lut, "intensity LUT file (default: built-in model)");
    ren->add_flag("--raw", render_raw, "also dump raw float32 images");

    std::string ds_lut;
    double ds_fraction = 0.0;
    auto* ds = app.add_subcommand("dataset", "run a parameter sweep into a labeled dataset");
    add_common(ds, ds_o);
    ds->add_option("--lut", ds_lut, "intensity LUT file");
    ds->add_option("--fraction", ds_fraction, "train fraction (default 0.6)");

    std::string met_manifest, met_pairs_file;
    int met_pairs = 50, met_samples = 200;
    auto* met = app.add_subcommand("metrics", "descriptor distribution comparison harness");
    add_common(met, met_o);
    met->add_option("--manifest", met_manifest, "dataset manifest (self-comparison pairs)");
    met->add_option("--pairs-file", met_pairs_file, "CSV of df,rho,c0,c1,df',rho',c0',c1'");
    met->add_option("--pairs", met_pairs, "max configurations from the manifest");
    met->add_option("--samples", met_samples, "aggregates per configuration and side");

    std::string base_manifest;
    int base_grid = 16;
    auto* base = app.add_subcommand("baseline", "calibrate the threshold mixing-ratio estimator");
    add_common(base, base_o);
    base->add_option("--manifest", base_manifest, "dataset manifest")->required();
    base->add_option("--grid", base_grid, "threshold grid resolution");

    std::string plot_manifest;
    int plot_bins = 20;
    auto* plot = app.add_subcommand("plotdata", "emit descriptor histogram CSVs");
    add_common(plot, plot_o);
    plot->add_option("--manifest", plot_manifest, "dataset manifest")->required();
    plot->add_option("--bins", plot_bins, "histogram bins");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_o, theta_str, count);
        if (ren->parsed()) return cmd_render(ren_o, render_in, render_lut, render_raw);
        if (ds->parsed()) return cmd_dataset(ds_o, ds_lut, ds_fraction);
        if (met->parsed())
            return cmd_metrics(met_o, met_manifest, met_pairs_file, met_pairs, met_samples);
        if (base->parsed()) return cmd_baseline(base_o, base_manifest, base_grid);
        if (plot->parsed()) return cmd_plotdata(plot_o, plot_manifest, plot_bins);
    } catch (const InvalidParams& e) {
        print_error("InvalidParams", e.what());
        return kExitConfig;
    } catch (const ParseError& e) {
        print_error("ParseError", e.what());
        return kExitConfig;
    } catch (const SplitInfeasible& e) {
        print_error("SplitInfeasible", e.what());
        return kExitConfig;
    } catch (const GenerationFailed& e) {
        print_error("GenerationFailed", e.what());
        return kExitGeneration;
    } catch (const FieldOfViewOverflow& e) {
        print_error("FieldOfViewOverflow", e.what());
        return kExitGeneration;
    } catch (const IoError& e) {
        print_error("IoError", e.what());
        return kExitIo;
    } catch (const Error& e) {
        print_error("Error", e.what());
        return kExitGeneration;
    }
    return kExitOk;
}
