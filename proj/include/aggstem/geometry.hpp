#ifndef AGGSTEM_GEOMETRY_HPP
#define AGGSTEM_GEOMETRY_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "aggstem/vec3.hpp"

namespace aggstem {

// Absolute slack (nm) on the overlap predicate so tangent configurations
// produced by placement arithmetic are accepted.
inline constexpr double kGeomEps = 1e-9;

// Two particle centers count as "in contact" up to this multiple of the
// radius sum.
inline constexpr double kContactSlack = 1.01;

inline constexpr double kDefaultFractalPrefactor = 1.3;

// Spherical particle: position and radius in nm, material label 0 or 1.
// Label 0 renders bright (WO3), label 1 dark (TiO2); the material names
// are display metadata only.
struct Particle {
    Vec3 position;
    double radius = 1.0;
    int label = 0;
};

inline const char* material_name(int label) { return label == 0 ? "WO3" : "TiO2"; }

// Generator configuration: target fractal dimension, intended mixing
// ratio, and the primary cluster sizes of the two materials.
struct ModelParams {
    double theta_df = 2.0;   // in (1, 3)
    double theta_rho = 0.5;  // in [0, 1]
    int theta_0 = 1;         // label-0 cluster size, >= 1
    int theta_1 = 1;         // label-1 cluster size, >= 1

    bool valid() const {
        return theta_df > 1.0 && theta_df < 3.0 && theta_rho >= 0.0 &&
               theta_rho <= 1.0 && theta_0 >= 1 && theta_1 >= 1;
    }
    // Throws InvalidParams when out of range.
    void validate() const;

    bool operator==(const ModelParams&) const = default;
};

struct Provenance {
    std::uint64_t seed = 0;
    ModelParams theta;
    int target_size = 0;
    // Index of the primary cluster each particle came from, in insertion
    // order; same length as the particle list.
    std::vector<int> primary_cluster;
};

struct Aggregate {
    std::vector<Particle> particles;
    std::optional<Provenance> provenance;

    int size() const { return static_cast<int>(particles.size()); }
};

struct ContactGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges; // i < j, no self loops
};

enum class Weighting { EqualMass, VolumeMass };

// --- predicates -----------------------------------------------------------

bool in_contact(const Particle& p, const Particle& q);
bool overlaps(const Particle& p, const Particle& q);

// --- structure ------------------------------------------------------------

ContactGraph contact_graph(const Aggregate& a);
bool is_connected(const ContactGraph& g);

// Fraction of particles with label 0.
double mixing_ratio(const Aggregate& a);

double mean_radius(const Aggregate& a);
Vec3 center_of_mass(const Aggregate& a, Weighting w = Weighting::EqualMass);
double radius_of_gyration(const Aggregate& a, Weighting w = Weighting::EqualMass);

// log(N/k_f) / log(R_g/a) with a the mean particle radius. Throws
// DegenerateGeometry when R_g/a is within 1e-12 of 1.
double fractal_dimension(const Aggregate& a, double k_f = kDefaultFractalPrefactor,
                         Weighting w = Weighting::EqualMass);

// Validators used by the generator and the test oracles.
bool all_pairs_non_overlapping(const Aggregate& a);
bool aggregate_connected(const Aggregate& a);

} // namespace aggstem

#endif
