#include "aggstem/geometry.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "aggstem/errors.hpp"

namespace aggstem {

void ModelParams::validate() const {
    if (!(theta_df > 1.0 && theta_df < 3.0))
        throw InvalidParams("theta_df must lie in (1,3), got " + std::to_string(theta_df));
    if (!(theta_rho >= 0.0 && theta_rho <= 1.0))
        throw InvalidParams("theta_rho must lie in [0,1], got " + std::to_string(theta_rho));
    if (theta_0 < 1 || theta_1 < 1)
        throw InvalidParams("theta_0 and theta_1 must be positive integers");
}

bool in_contact(const Particle& p, const Particle& q) {
    return distance(p.position, q.position) <= kContactSlack * (p.radius + q.radius);
}

bool overlaps(const Particle& p, const Particle& q) {
    return distance(p.position, q.position) < p.radius + q.radius - kGeomEps;
}

ContactGraph contact_graph(const Aggregate& a) {
    ContactGraph g;
    g.n = a.size();
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (in_contact(a.particles[i], a.particles[j])) g.edges.emplace_back(i, j);
    return g;
}

bool is_connected(const ContactGraph& g) {
    if (g.n <= 1) return g.n == 1;
    std::vector<int> parent(g.n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    int components = g.n;
    for (auto [i, j] : g.edges) {
        int ri = find(i), rj = find(j);
        if (ri != rj) {
            parent[ri] = rj;
            --components;
        }
    }
    return components == 1;
}

double mixing_ratio(const Aggregate& a) {
    if (a.particles.empty()) throw InvalidParams("mixing_ratio of empty aggregate");
    int n0 = 0;
    for (const auto& p : a.particles)
        if (p.label == 0) ++n0;
    return static_cast<double>(n0) / static_cast<double>(a.size());
}

double mean_radius(const Aggregate& a) {
    if (a.particles.empty()) throw InvalidParams("mean_radius of empty aggregate");
    double s = 0.0;
    for (const auto& p : a.particles) s += p.radius;
    return s / static_cast<double>(a.size());
}

static double mass_of(const Particle& p, Weighting w) {
    return w == Weighting::EqualMass ? 1.0 : p.radius * p.radius * p.radius;
}

Vec3 center_of_mass(const Aggregate& a, Weighting w) {
    if (a.particles.empty()) throw InvalidParams("center_of_mass of empty aggregate");
    Vec3 c;
    double m_total = 0.0;
    for (const auto& p : a.particles) {
        double m = mass_of(p, w);
        c += p.position * m;
        m_total += m;
    }
    return c / m_total;
}

double radius_of_gyration(const Aggregate& a, Weighting w) {
    Vec3 c = center_of_mass(a, w);
    double num = 0.0, den = 0.0;
    for (const auto& p : a.particles) {
        double m = mass_of(p, w);
        num += m * (p.position - c).norm2();
        den += m;
    }
    return std::sqrt(num / den);
}

double fractal_dimension(const Aggregate& a, double k_f, Weighting w) {
    if (a.size() < 2) throw InvalidParams("fractal_dimension requires N >= 2");
    double rg = radius_of_gyration(a, w);
    double ratio = rg / mean_radius(a);
    if (std::fabs(ratio - 1.0) < 1e-12)
        throw DegenerateGeometry("R_g equals mean radius; fractal dimension undefined");
    return std::log(static_cast<double>(a.size()) / k_f) / std::log(ratio);
}

bool all_pairs_non_overlapping(const Aggregate& a) {
    int n = a.size();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (overlaps(a.particles[i], a.particles[j])) return false;
    return true;
}

bool aggregate_connected(const Aggregate& a) { return is_connected(contact_graph(a)); }

} // namespace aggstem
