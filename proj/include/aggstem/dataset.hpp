#ifndef AGGSTEM_DATASET_HPP
#define AGGSTEM_DATASET_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "aggstem/config.hpp"
#include "aggstem/descriptors.hpp"
#include "aggstem/image.hpp"

namespace aggstem {

// Parameter sweep definition. For every (rho, c0, c1) triple,
// `df_choices_per_triple` fractal dimensions are drawn without
// replacement from df_values and the triple's aggregate budget is split
// evenly between them.
struct SweepSpec {
    std::vector<double> df_values = {1.5, 1.6, 1.7, 1.8, 1.9, 2.0, 2.1, 2.2, 2.3, 2.4, 2.5};
    std::vector<double> rho_values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<int> c0_values = {1, 2, 3, 4, 5, 6};
    std::vector<int> c1_values = {1, 2, 3, 4, 5, 6};
    int aggregates_per_triple = 100;
    int df_choices_per_triple = 2;

    void validate() const;
    long long total_entries() const;
};

SweepSpec sweep_from_config(const KeyValueConfig& kv);
void sweep_to_config(const SweepSpec& s, KeyValueConfig& kv);

struct ManifestEntry {
    long long id = 0;
    ModelParams theta;
    std::uint64_t seed = 0;
    std::string geometry_path; // relative to the manifest root
    std::string image_path;
    std::string split = "none"; // none | train | eval
    DescriptorReport descriptors;
};

struct Manifest {
    std::filesystem::path root; // directory holding manifest.csv; not serialized
    std::vector<ManifestEntry> entries;
    int min_per_config = 20;

    void save(const std::filesystem::path& file) const;
    static Manifest load(const std::filesystem::path& file);
};

std::string manifest_csv_header();

// Deterministic (id, theta) enumeration of a sweep; exposes the dataset
// structure without generating anything.
struct SweepPlanItem {
    long long id = 0;
    ModelParams theta;
};
std::vector<SweepPlanItem> plan_sweep(const SweepSpec& spec, std::uint64_t master_seed);

// Generates, renders and describes every planned entry. Per-entry seeds
// derive from (master_seed, id), so results are independent of worker
// count and of which entries already exist on disk (completed entries are
// detected via their meta/<id>.json record and skipped). Entries whose
// generation fails are recorded in failures.log and left out.
Manifest run_sweep(const SweepSpec& spec, const GrowthConfig& growth,
                   const RenderConfig& render_cfg, const IntensityModel& model,
                   std::uint64_t master_seed, const std::filesystem::path& out_dir,
                   int jobs = 0);

// Stratified per-configuration split. Configurations too small to give
// both sides min_per_config entries are dropped with a warning; a
// fraction that starves one side of an otherwise large enough
// configuration throws SplitInfeasible.
Manifest split_train_eval(const Manifest& m, double fraction, RandomStream& rng);

// Linear rescale of [min, max] to [-0.5, 0.5] followed by rounding to
// `levels` equidistant values spanning [-0.5, 0.5]. Constant images come
// back all zero with a warning.
ImageGrid preprocess(const ImageGrid& img, int levels = 256);

// Reciprocal transform of non-background intensities: p -> 1/p for
// p >= t; values below the threshold and exact zeros pass through.
ImageGrid invert_nonbackground(const ImageGrid& img, double t = 0.001);

struct AugmentParams {
    double angle = 0.0; // rad, counterclockwise about the image center
    bool mirror = false;
    int shift_x = 0; // px
    int shift_y = 0;
};
AugmentParams sample_augment(RandomStream& rng, int max_shift_px);
ImageGrid apply_augment(const ImageGrid& img, const AugmentParams& p);
ImageGrid augment(const ImageGrid& img, RandomStream& rng, int max_shift_px = 25);

struct Batch {
    ModelParams theta;
    std::vector<long long> member_ids;
};

// Same-theta batches of size nu sampled without replacement within each
// configuration of the requested split.
std::vector<Batch> assemble_batches(const Manifest& m, const std::string& split, int nu,
                                    RandomStream& rng);

} // namespace aggstem

#endif
