// Independent reference implementations used only to check the library:
// plain BFS connectivity, pairwise contact scans, and small statistics
// helpers. These must never call the code paths they verify.
#ifndef AGGSTEM_TESTS_ORACLES_HPP
#define AGGSTEM_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "aggstem/aggregation.hpp"
#include "aggstem/geometry.hpp"
#include "aggstem/rng.hpp"

namespace oracle {

inline bool contact_rule(const aggstem::Particle& p, const aggstem::Particle& q) {
    double dx = p.position.x - q.position.x;
    double dy = p.position.y - q.position.y;
    double dz = p.position.z - q.position.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz) <= 1.01 * (p.radius + q.radius);
}

inline std::vector<std::pair<int, int>> pairwise_edges(const aggstem::Aggregate& a) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < a.size(); ++i)
        for (int j = i + 1; j < a.size(); ++j)
            if (contact_rule(a.particles[i], a.particles[j])) edges.emplace_back(i, j);
    return edges;
}

// BFS components over an explicit adjacency list; indices are positions
// into `nodes`.
inline std::vector<std::vector<int>> bfs_components(int n,
                                                    const std::vector<std::vector<int>>& adj) {
    std::vector<std::vector<int>> comps;
    std::vector<char> seen(n, 0);
    for (int s = 0; s < n; ++s) {
        if (seen[s]) continue;
        std::vector<int> comp;
        std::queue<int> q;
        q.push(s);
        seen[s] = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            comp.push_back(u);
            for (int v : adj[u])
                if (!seen[v]) {
                    seen[v] = 1;
                    q.push(v);
                }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    std::sort(comps.begin(), comps.end());
    return comps;
}

inline bool bfs_connected(const aggstem::ContactGraph& g) {
    if (g.n == 0) return false;
    std::vector<std::vector<int>> adj(g.n);
    for (auto [i, j] : g.edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    return static_cast<int>(bfs_components(g.n, adj).size()) == 1;
}

// Observable clusters of one label via BFS over the label-filtered
// pairwise contact relation; canonical order (sorted members, sorted by
// first member).
inline std::vector<std::vector<int>> bfs_observable_clusters(const aggstem::Aggregate& a,
                                                             int label) {
    std::vector<int> idx;
    for (int i = 0; i < a.size(); ++i)
        if (a.particles[i].label == label) idx.push_back(i);
    std::vector<std::vector<int>> adj(idx.size());
    for (size_t u = 0; u < idx.size(); ++u)
        for (size_t v = u + 1; v < idx.size(); ++v)
            if (contact_rule(a.particles[idx[u]], a.particles[idx[v]])) {
                adj[u].push_back(static_cast<int>(v));
                adj[v].push_back(static_cast<int>(u));
            }
    auto local = bfs_components(static_cast<int>(idx.size()), adj);
    std::vector<std::vector<int>> comps;
    for (auto& c : local) {
        std::vector<int> mapped;
        for (int u : c) mapped.push_back(idx[u]);
        std::sort(mapped.begin(), mapped.end());
        comps.push_back(std::move(mapped));
    }
    std::sort(comps.begin(), comps.end(),
              [](const auto& x, const auto& y) { return x.front() < y.front(); });
    return comps;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double stddev(const std::vector<double>& v) { return std::sqrt(variance(v)); }

// Two-sided Kolmogorov-Smirnov statistic against a cdf.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        d = std::max(d, std::fabs((i + 1) / n - f));
        d = std::max(d, std::fabs(f - i / n));
    }
    return d;
}

// Random theta from the sweep grid; mirrors the published parameter
// ranges.
inline aggstem::ModelParams random_theta(aggstem::RandomStream& rng) {
    aggstem::ModelParams t;
    t.theta_df = 1.5 + 0.1 * static_cast<double>(rng.uniform_int(11));
    t.theta_rho = 0.1 * static_cast<double>(1 + rng.uniform_int(9));
    t.theta_0 = 1 + static_cast<int>(rng.uniform_int(6));
    t.theta_1 = 1 + static_cast<int>(rng.uniform_int(6));
    return t;
}

// Generator-made aggregate for oracle tests.
inline aggstem::Aggregate random_aggregate(aggstem::RandomStream& rng,
                                           int size_min = 20, int size_max = 40) {
    aggstem::GrowthConfig cfg;
    cfg.target_size_min = size_min;
    cfg.target_size_max = size_max;
    aggstem::ModelParams theta = random_theta(rng);
    return aggstem::build_hetero_aggregate(theta, cfg, rng);
}

} // namespace oracle

#endif
