#ifndef AGGSTEM_AGGREGATION_HPP
#define AGGSTEM_AGGREGATION_HPP

#include "aggstem/geometry.hpp"
#include "aggstem/rng.hpp"

namespace aggstem {

// Log-normal particle radius law, parameterized by the mean and standard
// deviation of the radius itself (nm). The underlying normal parameters
// are obtained by moment matching.
struct RadiusDistribution {
    double mean = 12.0; // nm
    double std = 3.0;   // nm

    double mu_ln() const;
    double sigma_ln() const;
};

double sample_radius(const RadiusDistribution& dist, RandomStream& rng);

// Homogeneous connected cluster used as the building block of the
// two-stage aggregation.
struct PrimaryCluster {
    Aggregate particles;
    int label = 0;
};

struct GrowthConfig {
    double k_f = kDefaultFractalPrefactor;
    double contact_slack = kContactSlack;
    int max_position_attempts = 1000;
    int max_restarts = 100;
    int target_size_min = 20;
    int target_size_max = 80;
    RadiusDistribution radius;
};

// Distance from the aggregate center of mass at which the center of mass
// of an added cluster must sit so that the merged equal-mass system hits
// the scaling law N/k_f = (R_g/a)^D_f. n_A/n_C are the particle counts,
// R_A/R_C the equal-mass radii of gyration, a the mean radius of the
// merged set. Throws InfeasiblePlacement when the radicand is negative.
double placement_radius(int n_A, int n_C, double R_A, double R_C, double a, double D_f,
                        double k_f);

// Uniform point on the sphere of radius d about center.
Vec3 sample_on_sphere(const Vec3& center, double d, RandomStream& rng);

// P(label = 1) = (1-theta_rho) theta_0 / ((1-theta_rho) theta_0 + theta_rho theta_1).
double label1_probability(const ModelParams& theta);
int sample_label(const ModelParams& theta, RandomStream& rng);

// Sequential growth of a homogeneous cluster of exactly `size` particles
// with target fractal dimension theta_df. Restarts from scratch when a
// particle cannot be placed; throws GenerationFailed when the restart
// budget runs out.
PrimaryCluster grow_primary_cluster(int size, double theta_df, int label,
                                    const RadiusDistribution& dist, const GrowthConfig& cfg,
                                    RandomStream& rng);

// Rigidly translates `cluster` so that its center of mass lands on the
// placement sphere of `agg`, requiring at least one inter-set contact and
// no overlap. Throws PlacementExhausted / InfeasiblePlacement; the caller
// decides the restart policy.
Aggregate attach_cluster(const Aggregate& agg, const PrimaryCluster& cluster,
                         double theta_df, const GrowthConfig& cfg, RandomStream& rng);

// Full two-stage hetero-aggregation: draws a target size uniformly from
// cfg.target_size_{min,max}, then attaches Bernoulli-labeled primary
// clusters of size theta_0/theta_1 until the count reaches the target.
Aggregate build_hetero_aggregate(const ModelParams& theta, const GrowthConfig& cfg,
                                 RandomStream& rng);

} // namespace aggstem

#endif
