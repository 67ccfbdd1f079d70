#include "aggstem/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "aggstem/errors.hpp"
#include "aggstem/geometry_io.hpp"
#include "aggstem/image_io.hpp"
#include "aggstem/parallel.hpp"
#include "aggstem/render.hpp"

namespace aggstem {

namespace {

// Substream namespaces under the master seed.
constexpr std::uint64_t kNsStructure = 1;
constexpr std::uint64_t kNsEntry = 2;

using ConfigKey = std::tuple<double, double, int, int>;
ConfigKey key_of(const ModelParams& t) {
    return {t.theta_df, t.theta_rho, t.theta_0, t.theta_1};
}

template <typename T>
void shuffle_in_place(std::vector<T>& v, RandomStream& rng) {
    for (size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.uniform_int(static_cast<std::uint64_t>(i))]);
}

std::string id_name(long long id) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%06lld", id);
    return buf;
}

} // namespace

void SweepSpec::validate() const {
    if (df_values.empty() || rho_values.empty() || c0_values.empty() || c1_values.empty())
        throw InvalidParams("sweep: all parameter ranges must be nonempty");
    if (aggregates_per_triple < 1 || df_choices_per_triple < 1)
        throw InvalidParams("sweep: counts must be >= 1");
    if (df_choices_per_triple > static_cast<int>(df_values.size()))
        throw InvalidParams("sweep: df_choices_per_triple exceeds df_values");
    if (aggregates_per_triple % df_choices_per_triple != 0)
        throw InvalidParams("sweep: aggregates_per_triple must be divisible by df_choices_per_triple");
}

long long SweepSpec::total_entries() const {
    return static_cast<long long>(rho_values.size()) * c0_values.size() * c1_values.size() *
           aggregates_per_triple;
}

SweepSpec sweep_from_config(const KeyValueConfig& kv) {
    SweepSpec s;
    s.df_values = kv.get_double_list("sweep.df_values", s.df_values);
    s.rho_values = kv.get_double_list("sweep.rho_values", s.rho_values);
    s.c0_values = kv.get_int_list("sweep.c0_values", s.c0_values);
    s.c1_values = kv.get_int_list("sweep.c1_values", s.c1_values);
    s.aggregates_per_triple = kv.get_int("sweep.aggregates_per_triple", s.aggregates_per_triple);
    s.df_choices_per_triple = kv.get_int("sweep.df_choices_per_triple", s.df_choices_per_triple);
    return s;
}

void sweep_to_config(const SweepSpec& s, KeyValueConfig& kv) {
    auto join_d = [](const std::vector<double>& v) {
        std::string out;
        for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
        return out;
    };
    auto join_i = [](const std::vector<int>& v) {
        std::string out;
        for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
        return out;
    };
    kv.set("sweep.df_values", join_d(s.df_values));
    kv.set("sweep.rho_values", join_d(s.rho_values));
    kv.set("sweep.c0_values", join_i(s.c0_values));
    kv.set("sweep.c1_values", join_i(s.c1_values));
    kv.set("sweep.aggregates_per_triple", std::to_string(s.aggregates_per_triple));
    kv.set("sweep.df_choices_per_triple", std::to_string(s.df_choices_per_triple));
}

// --- manifest CSV -----------------------------------------------------------

std::string manifest_csv_header() {
    return "id,theta_df,theta_rho,theta_0,theta_1,seed,n_particles,geometry_path,"
           "image_path,split,fractal_dim,mixing_ratio,avg_cluster_size_label0,"
           "avg_cluster_size_label1,z_hetero,z_total,cluster_sizes_label0,"
           "cluster_sizes_label1";
}

namespace {

std::string hist_field(const std::vector<int>& h) {
    std::string s;
    for (size_t i = 0; i < h.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(h[i]);
    }
    return s;
}

std::vector<int> parse_hist(const std::string& s) {
    std::vector<int> h;
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ';'))
        if (!item.empty()) h.push_back(std::stoi(item));
    return h;
}

std::string entry_csv_row(const ManifestEntry& e) {
    const DescriptorReport& d = e.descriptors;
    std::string row = std::to_string(e.id) + "," + format_double(e.theta.theta_df) + "," +
                      format_double(e.theta.theta_rho) + "," + std::to_string(e.theta.theta_0) +
                      "," + std::to_string(e.theta.theta_1) + "," + std::to_string(e.seed) + "," +
                      std::to_string(d.n_particles) + "," + e.geometry_path + "," +
                      e.image_path + "," + e.split + ",";
    row += std::isnan(d.fractal_dim) ? "" : format_double(d.fractal_dim);
    row += "," + format_double(d.mixing_ratio) + ",";
    row += d.avg_cluster_size_label0 ? format_double(*d.avg_cluster_size_label0) : "";
    row += ",";
    row += d.avg_cluster_size_label1 ? format_double(*d.avg_cluster_size_label1) : "";
    row += "," + format_double(d.z_hetero) + "," + format_double(d.z_total) + ",";
    row += hist_field(d.cluster_size_histogram[0]) + "," + hist_field(d.cluster_size_histogram[1]);
    return row;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

void Manifest::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write manifest: " + file.string());
    out << manifest_csv_header() << "\n";
    for (const auto& e : entries) out << entry_csv_row(e) << "\n";
    if (!out) throw IoError("manifest write failed: " + file.string());
}

Manifest Manifest::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open manifest: " + file.string());
    Manifest m;
    m.root = file.parent_path();
    std::string line;
    if (!std::getline(in, line) || line != manifest_csv_header())
        throw ParseError("unexpected manifest header in " + file.string());
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 18)
            throw ParseError("manifest line " + std::to_string(lineno) + ": expected 18 fields");
        ManifestEntry e;
        e.id = std::stoll(f[0]);
        e.theta.theta_df = std::stod(f[1]);
        e.theta.theta_rho = std::stod(f[2]);
        e.theta.theta_0 = std::stoi(f[3]);
        e.theta.theta_1 = std::stoi(f[4]);
        e.seed = std::stoull(f[5]);
        e.descriptors.n_particles = std::stoi(f[6]);
        e.geometry_path = f[7];
        e.image_path = f[8];
        e.split = f[9];
        e.descriptors.fractal_dim =
            f[10].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[10]);
        e.descriptors.mixing_ratio = std::stod(f[11]);
        if (!f[12].empty()) e.descriptors.avg_cluster_size_label0 = std::stod(f[12]);
        if (!f[13].empty()) e.descriptors.avg_cluster_size_label1 = std::stod(f[13]);
        e.descriptors.z_hetero = std::stod(f[14]);
        e.descriptors.z_total = std::stod(f[15]);
        e.descriptors.cluster_size_histogram[0] = parse_hist(f[16]);
        e.descriptors.cluster_size_histogram[1] = parse_hist(f[17]);
        m.entries.push_back(std::move(e));
    }
    return m;
}

// --- sweep ------------------------------------------------------------------

std::vector<SweepPlanItem> plan_sweep(const SweepSpec& spec, std::uint64_t master_seed) {
    spec.validate();
    RandomStream structure = RandomStream(master_seed).child(kNsStructure);
    std::vector<SweepPlanItem> plan;
    plan.reserve(static_cast<size_t>(spec.total_entries()));

    long long triple_idx = 0;
    const int per_df = spec.aggregates_per_triple / spec.df_choices_per_triple;
    for (double rho : spec.rho_values)
        for (int c0 : spec.c0_values)
            for (int c1 : spec.c1_values) {
                RandomStream ts = structure.child(static_cast<std::uint64_t>(triple_idx));
                // Partial Fisher-Yates draw of df values, without replacement.
                std::vector<int> idx(spec.df_values.size());
                std::iota(idx.begin(), idx.end(), 0);
                for (int k = 0; k < spec.df_choices_per_triple; ++k) {
                    size_t j = k + ts.uniform_int(idx.size() - k);
                    std::swap(idx[k], idx[j]);
                }
                for (int j = 0; j < spec.aggregates_per_triple; ++j) {
                    SweepPlanItem item;
                    item.id = triple_idx * spec.aggregates_per_triple + j;
                    item.theta.theta_df = spec.df_values[idx[j / per_df]];
                    item.theta.theta_rho = rho;
                    item.theta.theta_0 = c0;
                    item.theta.theta_1 = c1;
                    plan.push_back(item);
                }
                ++triple_idx;
            }
    return plan;
}

namespace {

nlohmann::json descriptors_to_json(const DescriptorReport& d) {
    nlohmann::json j;
    j["n_particles"] = d.n_particles;
    if (std::isnan(d.fractal_dim))
        j["fractal_dim"] = nullptr;
    else
        j["fractal_dim"] = d.fractal_dim;
    j["mixing_ratio"] = d.mixing_ratio;
    j["avg_cluster_size_label0"] =
        d.avg_cluster_size_label0 ? nlohmann::json(*d.avg_cluster_size_label0) : nlohmann::json();
    j["avg_cluster_size_label1"] =
        d.avg_cluster_size_label1 ? nlohmann::json(*d.avg_cluster_size_label1) : nlohmann::json();
    j["z_hetero"] = d.z_hetero;
    j["z_total"] = d.z_total;
    j["cluster_sizes_label0"] = d.cluster_size_histogram[0];
    j["cluster_sizes_label1"] = d.cluster_size_histogram[1];
    return j;
}

DescriptorReport descriptors_from_json(const nlohmann::json& j) {
    DescriptorReport d;
    d.n_particles = j.at("n_particles").get<int>();
    d.fractal_dim = j.at("fractal_dim").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                  : j.at("fractal_dim").get<double>();
    d.mixing_ratio = j.at("mixing_ratio").get<double>();
    if (!j.at("avg_cluster_size_label0").is_null())
        d.avg_cluster_size_label0 = j.at("avg_cluster_size_label0").get<double>();
    if (!j.at("avg_cluster_size_label1").is_null())
        d.avg_cluster_size_label1 = j.at("avg_cluster_size_label1").get<double>();
    d.z_hetero = j.at("z_hetero").get<double>();
    d.z_total = j.at("z_total").get<double>();
    d.cluster_size_histogram[0] = j.at("cluster_sizes_label0").get<std::vector<int>>();
    d.cluster_size_histogram[1] = j.at("cluster_sizes_label1").get<std::vector<int>>();
    return d;
}

void save_entry_meta(const ManifestEntry& e, double pixel_size, double v_max,
                     const std::string& config_hash, const std::filesystem::path& file) {
    nlohmann::json j;
    j["id"] = e.id;
    j["seed"] = e.seed;
    j["theta"] = {{"df", e.theta.theta_df},
                  {"rho", e.theta.theta_rho},
                  {"c0", e.theta.theta_0},
                  {"c1", e.theta.theta_1}};
    j["geometry_path"] = e.geometry_path;
    j["image_path"] = e.image_path;
    j["pixel_size"] = pixel_size;
    j["v_max"] = v_max;
    j["config_hash"] = config_hash;
    j["descriptors"] = descriptors_to_json(e.descriptors);
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());
    out << j.dump(2) << "\n";
}

bool load_entry_meta(const std::filesystem::path& file, const std::filesystem::path& root,
                     ManifestEntry& e) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return false;
    nlohmann::json j;
    try {
        in >> j;
        e.id = j.at("id").get<long long>();
        e.seed = j.at("seed").get<std::uint64_t>();
        e.theta.theta_df = j["theta"].at("df").get<double>();
        e.theta.theta_rho = j["theta"].at("rho").get<double>();
        e.theta.theta_0 = j["theta"].at("c0").get<int>();
        e.theta.theta_1 = j["theta"].at("c1").get<int>();
        e.geometry_path = j.at("geometry_path").get<std::string>();
        e.image_path = j.at("image_path").get<std::string>();
        e.descriptors = descriptors_from_json(j.at("descriptors"));
    } catch (const nlohmann::json::exception&) {
        return false;
    }
    return std::filesystem::exists(root / e.geometry_path) &&
           std::filesystem::exists(root / e.image_path);
}

} // namespace

Manifest run_sweep(const SweepSpec& spec, const GrowthConfig& growth,
                   const RenderConfig& render_cfg, const IntensityModel& model,
                   std::uint64_t master_seed, const std::filesystem::path& out_dir, int jobs) {
    const auto plan = plan_sweep(spec, master_seed);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "geometry");
    fs::create_directories(out_dir / "images");
    fs::create_directories(out_dir / "meta");

    KeyValueConfig snapshot;
    growth_to_config(growth, snapshot);
    render_to_config(render_cfg, snapshot);
    sweep_to_config(spec, snapshot);
    snapshot.set("seed", std::to_string(master_seed));
    const std::string config_hash = hex16(fnv1a64(snapshot.canonical_text()));

    const RandomStream entry_ns = RandomStream(master_seed).child(kNsEntry);

    std::vector<ManifestEntry> results(plan.size());
    std::vector<char> ok(plan.size(), 0);
    std::vector<std::string> failures(plan.size());

    parallel_for(static_cast<long long>(plan.size()), jobs, [&](long long i) {
        const auto& item = plan[static_cast<size_t>(i)];
        const fs::path meta_file = out_dir / "meta" / (id_name(item.id) + ".json");

        ManifestEntry e;
        if (load_entry_meta(meta_file, out_dir, e)) { // resume: already done
            results[static_cast<size_t>(i)] = std::move(e);
            ok[static_cast<size_t>(i)] = 1;
            return;
        }

        RandomStream entry_stream = entry_ns.child(static_cast<std::uint64_t>(item.id));
        RandomStream gen_rng = entry_stream.child(0);
        RandomStream render_rng = entry_stream.child(1);
        try {
            Aggregate agg = build_hetero_aggregate(item.theta, growth, gen_rng);
            ImageGrid img = render(agg, render_cfg, model, render_rng, 1);

            const std::string geo_text = format_geometry(agg);
            const std::string geo_name =
                id_name(item.id) + "-" + hex16(fnv1a64(geo_text)) + ".txt";
            double v_max = 0.0;
            const std::string pgm = pgm16_bytes(img, v_max);
            const std::string img_name = id_name(item.id) + "-" + hex16(fnv1a64(pgm)) + ".pgm";

            e.id = item.id;
            e.theta = item.theta;
            e.seed = gen_rng.seed();
            e.geometry_path = "geometry/" + geo_name;
            e.image_path = "images/" + img_name;
            e.descriptors = descriptor_report(agg, growth.k_f);

            {
                std::ofstream g(out_dir / e.geometry_path, std::ios::binary);
                g << geo_text;
                if (!g) throw IoError("write failed: " + geo_name);
                std::ofstream p(out_dir / e.image_path, std::ios::binary);
                p.write(pgm.data(), static_cast<std::streamsize>(pgm.size()));
                if (!p) throw IoError("write failed: " + img_name);
            }
            save_entry_meta(e, render_cfg.pixel_size, v_max, config_hash, meta_file);
            results[static_cast<size_t>(i)] = std::move(e);
            ok[static_cast<size_t>(i)] = 1;
        } catch (const Error& err) {
            failures[static_cast<size_t>(i)] = err.what();
        }
    });

    Manifest m;
    m.root = out_dir;
    bool any_failure = false;
    for (size_t i = 0; i < plan.size(); ++i) {
        if (ok[i])
            m.entries.push_back(std::move(results[i]));
        else
            any_failure = true;
    }
    std::sort(m.entries.begin(), m.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });

    if (any_failure) {
        std::ofstream log(out_dir / "failures.log", std::ios::binary);
        for (size_t i = 0; i < plan.size(); ++i)
            if (!ok[i]) log << plan[i].id << " " << failures[i] << "\n";
    }
    return m;
}

// --- split ------------------------------------------------------------------

Manifest split_train_eval(const Manifest& m, double fraction, RandomStream& rng) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw InvalidParams("split fraction must lie in (0,1)");

    std::map<ConfigKey, std::vector<size_t>> groups;
    for (size_t i = 0; i < m.entries.size(); ++i)
        groups[key_of(m.entries[i].theta)].push_back(i);

    Manifest out;
    out.root = m.root;
    out.min_per_config = m.min_per_config;
    std::vector<ManifestEntry> entries;

    long long config_index = 0;
    for (auto& [key, idx] : groups) {
        const int n = static_cast<int>(idx.size());
        const int n_train = static_cast<int>(std::llround(fraction * n));
        const int n_eval = n - n_train;
        if (n_train < m.min_per_config || n_eval < m.min_per_config) {
            if (n < 2 * m.min_per_config) {
                std::clog << "split: dropping configuration with " << n
                          << " entries (cannot give both splits " << m.min_per_config
                          << ")\n";
                ++config_index;
                continue;
            }
            throw SplitInfeasible("fraction " + std::to_string(fraction) + " leaves a split of a " +
                                  std::to_string(n) + "-entry configuration below " +
                                  std::to_string(m.min_per_config));
        }
        RandomStream cs = rng.child(static_cast<std::uint64_t>(config_index));
        std::vector<size_t> order = idx;
        shuffle_in_place(order, cs);
        for (int k = 0; k < n; ++k) {
            ManifestEntry e = m.entries[order[k]];
            e.split = k < n_train ? "train" : "eval";
            entries.push_back(std::move(e));
        }
        ++config_index;
    }
    std::sort(entries.begin(), entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });
    out.entries = std::move(entries);
    return out;
}

// --- image preprocessing ----------------------------------------------------

ImageGrid preprocess(const ImageGrid& img, int levels) {
    if (levels < 2) throw InvalidParams("preprocess needs >= 2 levels");
    auto [lo, hi] = image_min_max(img);
    ImageGrid out = img;
    if (!(hi > lo)) {
        std::clog << "preprocess: constant image, returning zeros\n";
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return out;
    }
    const double range = hi - lo;
    const double steps = levels - 1;
    for (double& v : out.values) {
        double u = (v - lo) / range; // [0, 1]
        double q = std::nearbyint(u * steps) / steps;
        v = q - 0.5;
    }
    return out;
}

ImageGrid invert_nonbackground(const ImageGrid& img, double t) {
    if (!(t > 0.0)) throw InvalidParams("inversion threshold must be > 0");
    ImageGrid out = img;
    for (double& v : out.values)
        if (v >= t) v = 1.0 / v; // zeros and sub-threshold values pass through
    return out;
}

// --- augmentation -----------------------------------------------------------

AugmentParams sample_augment(RandomStream& rng, int max_shift_px) {
    AugmentParams p;
    p.angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    p.mirror = rng.bernoulli(0.5);
    p.shift_x = static_cast<int>(rng.uniform_int(2 * max_shift_px + 1)) - max_shift_px;
    p.shift_y = static_cast<int>(rng.uniform_int(2 * max_shift_px + 1)) - max_shift_px;
    return p;
}

namespace {

double sample_background0(const ImageGrid& img, double sx, double sy) {
    // Snap near-integer coordinates so right-angle rotations stay exact.
    double rx = std::nearbyint(sx), ry = std::nearbyint(sy);
    if (std::fabs(sx - rx) < 1e-9) sx = rx;
    if (std::fabs(sy - ry) < 1e-9) sy = ry;

    const int x0 = static_cast<int>(std::floor(sx));
    const int y0 = static_cast<int>(std::floor(sy));
    const double fx = sx - x0, fy = sy - y0;
    auto tap = [&](int x, int y) -> double {
        if (x < 0 || x >= img.width || y < 0 || y >= img.height) return 0.0;
        return img.at(x, y);
    };
    double a = tap(x0, y0) + fx * (tap(x0 + 1, y0) - tap(x0, y0));
    double b = tap(x0, y0 + 1) + fx * (tap(x0 + 1, y0 + 1) - tap(x0, y0 + 1));
    return a + fy * (b - a);
}

} // namespace

ImageGrid apply_augment(const ImageGrid& img, const AugmentParams& p) {
    ImageGrid out = img;
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    const double ca = std::cos(-p.angle);
    const double sa = std::sin(-p.angle);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            // invert translation, then mirror, then rotation
            double px = x - p.shift_x;
            double py = y - p.shift_y;
            if (p.mirror) px = 2.0 * cx - px;
            double dx = px - cx, dy = py - cy;
            double sx = cx + ca * dx - sa * dy;
            double sy = cy + sa * dx + ca * dy;
            out.at(x, y) = sample_background0(img, sx, sy);
        }
    return out;
}

ImageGrid augment(const ImageGrid& img, RandomStream& rng, int max_shift_px) {
    return apply_augment(img, sample_augment(rng, max_shift_px));
}

// --- batches ----------------------------------------------------------------

std::vector<Batch> assemble_batches(const Manifest& m, const std::string& split, int nu,
                                    RandomStream& rng) {
    if (nu < 1) throw InvalidParams("batch size nu must be >= 1");
    std::map<ConfigKey, std::vector<long long>> groups;
    std::map<ConfigKey, ModelParams> thetas;
    for (const auto& e : m.entries)
        if (e.split == split) {
            groups[key_of(e.theta)].push_back(e.id);
            thetas[key_of(e.theta)] = e.theta;
        }
    if (groups.empty()) throw InsufficientEntries("no entries with split `" + split + "`");

    std::vector<Batch> batches;
    long long config_index = 0;
    for (auto& [key, ids] : groups) {
        if (static_cast<int>(ids.size()) < nu)
            throw InsufficientEntries("configuration has " + std::to_string(ids.size()) +
                                      " `" + split + "` entries, need >= " + std::to_string(nu));
        RandomStream cs = rng.child(static_cast<std::uint64_t>(config_index++));
        shuffle_in_place(ids, cs);
        const size_t full = ids.size() / static_cast<size_t>(nu);
        for (size_t b = 0; b < full; ++b) {
            Batch batch;
            batch.theta = thetas[key];
            batch.member_ids.assign(ids.begin() + static_cast<long>(b) * nu,
                                    ids.begin() + static_cast<long>(b + 1) * nu);
            batches.push_back(std::move(batch));
        }
    }
    return batches;
}

} // namespace aggstem
