#include "aggstem/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aggstem/errors.hpp"

namespace aggstem {

double RadiusDistribution::sigma_ln() const {
    if (std <= 0.0) return 0.0;
    double cv = std / mean;
    return std::sqrt(std::log1p(cv * cv));
}

double RadiusDistribution::mu_ln() const {
    double s2 = sigma_ln();
    return std::log(mean) - 0.5 * s2 * s2;
}

double sample_radius(const RadiusDistribution& dist, RandomStream& rng) {
    if (dist.mean <= 0.0) throw InvalidParams("radius distribution mean must be > 0");
    if (dist.std <= 0.0) return dist.mean; // degenerate limit
    return rng.lognormal(dist.mu_ln(), dist.sigma_ln());
}

double placement_radius(int n_A, int n_C, double R_A, double R_C, double a, double D_f,
                        double k_f) {
    if (n_A < 1 || n_C < 1) throw InvalidParams("placement_radius requires n_A, n_C >= 1");
    const double n = static_cast<double>(n_A) + static_cast<double>(n_C);
    const double radicand = a * a * n * n / (static_cast<double>(n_A) * n_C) *
                                std::pow(n / k_f, 2.0 / D_f) -
                            n / n_C * R_A * R_A - n / n_A * R_C * R_C;
    if (radicand < 0.0)
        throw InfeasiblePlacement("target fractal dimension unreachable (radicand " +
                                  std::to_string(radicand) + ")");
    return std::sqrt(radicand);
}

Vec3 sample_on_sphere(const Vec3& center, double d, RandomStream& rng) {
    if (d < 0.0) throw InvalidParams("sphere radius must be >= 0");
    return center + rng.unit_vector() * d;
}

double label1_probability(const ModelParams& theta) {
    const double den =
        (1.0 - theta.theta_rho) * theta.theta_0 + theta.theta_rho * theta.theta_1;
    if (!(den > 0.0)) throw InvalidParams("label probability denominator is zero");
    return (1.0 - theta.theta_rho) * theta.theta_0 / den;
}

int sample_label(const ModelParams& theta, RandomStream& rng) {
    return rng.bernoulli(label1_probability(theta)) ? 1 : 0;
}

namespace {

bool contacts_any(const std::vector<Particle>& set, const Particle& p, double slack) {
    for (const auto& q : set)
        if (distance(p.position, q.position) <= slack * (p.radius + q.radius)) return true;
    return false;
}

bool overlaps_any(const std::vector<Particle>& set, const Particle& p) {
    for (const auto& q : set)
        if (overlaps(p, q)) return true;
    return false;
}

// Relative geometry of one (aggregate particle, cluster particle) pair:
// when the cluster's center of mass sits at point p (relative to the
// aggregate's center of mass), the pair's center distance is |p - v|.
struct PairGeom {
    Vec3 v;
    double s; // radius sum
};

std::vector<PairGeom> pair_geoms(const std::vector<Particle>& agg, const Vec3& c_agg,
                                 const std::vector<Particle>& cluster, const Vec3& c_cluster) {
    std::vector<PairGeom> out;
    out.reserve(agg.size() * cluster.size());
    for (const auto& pi : agg) {
        Vec3 ai = pi.position - c_agg;
        for (const auto& pj : cluster)
            out.push_back({ai - (pj.position - c_cluster), pi.radius + pj.radius});
    }
    return out;
}

// Farthest center-of-mass distance at which an inter-set contact is still
// possible. Mid-band factor keeps the contact region at positive measure.
double contact_reach(const std::vector<PairGeom>& pairs) {
    const double band = (1.0 + kContactSlack) / 2.0;
    double reach = 0.0;
    for (const auto& pg : pairs) reach = std::max(reach, pg.v.norm() + band * pg.s);
    return reach;
}

// Proposal on the intersection circle of the placement sphere |p| = d and
// a contact shell |p - v| = s_c of a random reachable pair. Used when
// plain rejection on the sphere keeps missing: near the fractal-dimension
// limit the sphere only grazes the outermost contact shells and the
// acceptance cap becomes vanishingly small. The sampled position still
// lies exactly on the placement sphere and in contact; only the proposal
// measure differs from uniform.
bool propose_on_contact_circle(const std::vector<PairGeom>& pairs, double d, double slack,
                               RandomStream& rng, Vec3& out) {
    std::vector<size_t> candidates;
    for (size_t k = 0; k < pairs.size(); ++k) {
        const double ell = pairs[k].v.norm();
        const double lo = std::max(pairs[k].s, std::fabs(d - ell));
        const double hi = std::min(slack * pairs[k].s, d + ell);
        if (ell > 0.0 && lo < hi) candidates.push_back(k);
    }
    if (candidates.empty()) return false;
    const PairGeom& pg = pairs[candidates[rng.uniform_int(candidates.size())]];
    const double ell = pg.v.norm();
    const double lo = std::max(pg.s, std::fabs(d - ell));
    const double hi = std::min(slack * pg.s, d + ell);
    const double s_c = rng.uniform(lo, hi);

    // circle center along v at distance t from the origin, radius r_c
    const double t = (d * d + ell * ell - s_c * s_c) / (2.0 * ell);
    const double rc2 = d * d - t * t;
    const double r_c = rc2 > 0.0 ? std::sqrt(rc2) : 0.0;

    const Vec3 vn = pg.v / ell;
    Vec3 ref = std::fabs(vn.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    Vec3 e1{vn.y * ref.z - vn.z * ref.y, vn.z * ref.x - vn.x * ref.z,
            vn.x * ref.y - vn.y * ref.x};
    e1 = e1 / e1.norm();
    Vec3 e2{vn.y * e1.z - vn.z * e1.y, vn.z * e1.x - vn.x * e1.z, vn.x * e1.y - vn.y * e1.x};

    const double phi = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    out = vn * t + (e1 * std::cos(phi) + e2 * std::sin(phi)) * r_c;
    return true;
}

} // namespace

namespace {

// One placement round: try uniform rejection on the sphere for the first
// quarter of the budget, then targeted proposals on sphere/contact-shell
// intersection circles. Returns the accepted cluster shift.
bool place_on_sphere(const std::vector<Particle>& agg, const Vec3& c_agg,
                     const std::vector<Particle>& cluster, const Vec3& c_cl, double d,
                     const GrowthConfig& cfg, RandomStream& rng, Vec3& shift_out) {
    const auto pairs = pair_geoms(agg, c_agg, cluster, c_cl);
    auto valid = [&](const Vec3& shift) {
        bool contact = false;
        for (const auto& pj : cluster) {
            Particle moved{pj.position + shift, pj.radius, pj.label};
            if (overlaps_any(agg, moved)) return false;
            if (!contact && contacts_any(agg, moved, cfg.contact_slack)) contact = true;
        }
        return contact;
    };

    const int uniform_budget = std::max(1, cfg.max_position_attempts / 4);
    for (int att = 0; att < cfg.max_position_attempts; ++att) {
        Vec3 pos;
        if (att < uniform_budget) {
            pos = sample_on_sphere(Vec3{0, 0, 0}, d, rng);
        } else if (!propose_on_contact_circle(pairs, d, cfg.contact_slack, rng, pos)) {
            return false; // no reachable pair at this distance
        }
        Vec3 shift = c_agg + pos - c_cl;
        if (valid(shift)) {
            shift_out = shift;
            return true;
        }
    }
    return false;
}

} // namespace

PrimaryCluster grow_primary_cluster(int size, double theta_df, int label,
                                    const RadiusDistribution& dist, const GrowthConfig& cfg,
                                    RandomStream& rng) {
    if (size < 1) throw InvalidParams("cluster size must be >= 1");

    for (int restart = 0; restart <= cfg.max_restarts; ++restart) {
        Aggregate a;
        a.particles.push_back({Vec3{0, 0, 0}, sample_radius(dist, rng), label});
        double radius_sum = a.particles[0].radius;
        bool dead_end = false;

        while (a.size() < size && !dead_end) {
            const double r_new = sample_radius(dist, rng);
            const double a_bar = (radius_sum + r_new) / (a.size() + 1);
            const Vec3 com = center_of_mass(a);
            const double r_gyr = radius_of_gyration(a);

            double d;
            try {
                d = placement_radius(a.size(), 1, r_gyr, 0.0, a_bar, theta_df, cfg.k_f);
            } catch (const InfeasiblePlacement&) {
                // a fresh set of radii usually restores feasibility
                dead_end = true;
                break;
            }
            // The scaling law can demand a distance no contact allows
            // (always the case for the first pair); cap at the farthest
            // contact-compatible distance.
            const std::vector<Particle> pending{{Vec3{0, 0, 0}, r_new, label}};
            d = std::min(d, contact_reach(pair_geoms(a.particles, com, pending, Vec3{0, 0, 0})));

            Vec3 shift;
            if (place_on_sphere(a.particles, com, pending, Vec3{0, 0, 0}, d, cfg, rng, shift)) {
                a.particles.push_back({shift, r_new, label});
                radius_sum += r_new;
            } else {
                dead_end = true;
            }
        }
        if (!dead_end) return PrimaryCluster{std::move(a), label};
    }
    throw GenerationFailed("primary cluster growth exhausted " +
                           std::to_string(cfg.max_restarts) + " restarts");
}

Aggregate attach_cluster(const Aggregate& agg, const PrimaryCluster& cluster,
                         double theta_df, const GrowthConfig& cfg, RandomStream& rng) {
    if (agg.particles.empty() || cluster.particles.particles.empty())
        throw InvalidParams("attach_cluster requires non-empty inputs");

    const auto& cl = cluster.particles.particles;
    const Vec3 c_agg = center_of_mass(agg);
    const Vec3 c_cl = center_of_mass(cluster.particles);

    double radius_sum = 0.0;
    for (const auto& p : agg.particles) radius_sum += p.radius;
    for (const auto& p : cl) radius_sum += p.radius;
    const double a_bar = radius_sum / (agg.size() + cluster.particles.size());

    double d = placement_radius(agg.size(), cluster.particles.size(),
                                radius_of_gyration(agg), radius_of_gyration(cluster.particles),
                                a_bar, theta_df, cfg.k_f);
    d = std::min(d, contact_reach(pair_geoms(agg.particles, c_agg, cl, c_cl)));

    Vec3 shift;
    if (!place_on_sphere(agg.particles, c_agg, cl, c_cl, d, cfg, rng, shift))
        throw PlacementExhausted("no valid cluster position in " +
                                 std::to_string(cfg.max_position_attempts) + " attempts");

    Aggregate merged = agg;
    merged.particles.reserve(agg.particles.size() + cl.size());
    for (const auto& pj : cl)
        merged.particles.push_back({pj.position + shift, pj.radius, pj.label});
    return merged;
}

Aggregate build_hetero_aggregate(const ModelParams& theta, const GrowthConfig& cfg,
                                 RandomStream& rng) {
    theta.validate();
    if (cfg.target_size_min < 1 || cfg.target_size_max < cfg.target_size_min)
        throw InvalidParams("invalid target size range");

    const int target = cfg.target_size_min +
                       static_cast<int>(rng.uniform_int(
                           static_cast<std::uint64_t>(cfg.target_size_max - cfg.target_size_min + 1)));

    Provenance pv;
    pv.seed = rng.seed();
    pv.theta = theta;
    pv.target_size = target;

    // Pending-cluster resampling: a failed placement discards only the
    // cluster, and the failure budget resets after every success.
    int failures = 0;
    Aggregate agg;
    int cluster_index = 0;
    while (agg.size() < target) {
        const int label = sample_label(theta, rng);
        const int n_k = theta.theta_0 + label * (theta.theta_1 - theta.theta_0);
        try {
            PrimaryCluster cl = grow_primary_cluster(n_k, theta.theta_df, label, cfg.radius, cfg, rng);
            if (agg.particles.empty()) {
                agg = std::move(cl.particles);
            } else {
                agg = attach_cluster(agg, cl, theta.theta_df, cfg, rng);
            }
            pv.primary_cluster.insert(pv.primary_cluster.end(), static_cast<size_t>(n_k),
                                      cluster_index);
            ++cluster_index;
            failures = 0;
        } catch (const InfeasiblePlacement&) {
            if (++failures > cfg.max_restarts)
                throw GenerationFailed("aggregate assembly exhausted restart budget");
        } catch (const PlacementExhausted&) {
            if (++failures > cfg.max_restarts)
                throw GenerationFailed("aggregate assembly exhausted restart budget");
        }
    }
    agg.provenance = std::move(pv);
    return agg;
}

} // namespace aggstem
