#include "aggstem/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "aggstem/errors.hpp"
#include "aggstem/geometry_io.hpp"

namespace aggstem {

namespace {

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void merge(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
    }

private:
    std::vector<int> parent_;
    std::vector<int> size_;
};

} // namespace

std::vector<std::vector<int>> observable_clusters(const Aggregate& a, int label) {
    std::vector<int> idx;
    for (int i = 0; i < a.size(); ++i)
        if (a.particles[i].label == label) idx.push_back(i);
    if (idx.empty()) return {};

    UnionFind uf(static_cast<int>(idx.size()));
    for (size_t u = 0; u < idx.size(); ++u)
        for (size_t v = u + 1; v < idx.size(); ++v)
            if (in_contact(a.particles[idx[u]], a.particles[idx[v]]))
                uf.merge(static_cast<int>(u), static_cast<int>(v));

    std::map<int, std::vector<int>> by_root;
    for (size_t u = 0; u < idx.size(); ++u) by_root[uf.find(static_cast<int>(u))].push_back(idx[u]);

    std::vector<std::vector<int>> components;
    components.reserve(by_root.size());
    for (auto& [root, members] : by_root) components.push_back(std::move(members));
    std::sort(components.begin(), components.end(),
              [](const auto& x, const auto& y) { return x.front() < y.front(); });
    return components;
}

double average_cluster_size(const Aggregate& a, int label) {
    auto comps = observable_clusters(a, label);
    if (comps.empty()) throw LabelAbsent("no particle with label " + std::to_string(label));
    size_t total = 0;
    for (const auto& c : comps) total += c.size();
    return static_cast<double>(total) / static_cast<double>(comps.size());
}

double hetero_coordination(const Aggregate& a) {
    if (a.particles.empty()) throw InvalidParams("hetero_coordination of empty aggregate");
    long long hetero = 0;
    for (int i = 0; i < a.size(); ++i)
        for (int j = i + 1; j < a.size(); ++j)
            if (a.particles[i].label != a.particles[j].label &&
                in_contact(a.particles[i], a.particles[j]))
                ++hetero;
    return 2.0 * static_cast<double>(hetero) / static_cast<double>(a.size());
}

double total_coordination(const Aggregate& a) {
    if (a.particles.empty()) throw InvalidParams("total_coordination of empty aggregate");
    const auto g = contact_graph(a);
    return 2.0 * static_cast<double>(g.edges.size()) / static_cast<double>(a.size());
}

DescriptorReport descriptor_report(const Aggregate& a, double k_f) {
    DescriptorReport r;
    r.n_particles = a.size();
    r.mixing_ratio = mixing_ratio(a);
    try {
        r.fractal_dim = fractal_dimension(a, k_f);
    } catch (const Error&) {
        r.fractal_dim = std::numeric_limits<double>::quiet_NaN();
    }
    for (int label = 0; label < 2; ++label) {
        auto comps = observable_clusters(a, label);
        if (comps.empty()) continue;
        size_t total = 0, max_size = 0;
        for (const auto& c : comps) {
            total += c.size();
            max_size = std::max(max_size, c.size());
        }
        auto& hist = r.cluster_size_histogram[label];
        hist.assign(max_size, 0);
        for (const auto& c : comps) ++hist[c.size() - 1];
        double avg = static_cast<double>(total) / static_cast<double>(comps.size());
        (label == 0 ? r.avg_cluster_size_label0 : r.avg_cluster_size_label1) = avg;
    }
    r.z_hetero = hetero_coordination(a);
    r.z_total = total_coordination(a);
    return r;
}

std::string descriptor_csv_header() {
    return "n_particles,fractal_dim,mixing_ratio,avg_cluster_size_label0,"
           "avg_cluster_size_label1,z_hetero,z_total,cluster_sizes_label0,"
           "cluster_sizes_label1";
}

static std::string hist_field(const std::vector<int>& h) {
    std::string s;
    for (size_t i = 0; i < h.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(h[i]);
    }
    return s;
}

std::string descriptor_csv_row(const DescriptorReport& r) {
    std::string row = std::to_string(r.n_particles) + ",";
    row += std::isnan(r.fractal_dim) ? "" : format_double(r.fractal_dim);
    row += "," + format_double(r.mixing_ratio) + ",";
    row += r.avg_cluster_size_label0 ? format_double(*r.avg_cluster_size_label0) : "";
    row += ",";
    row += r.avg_cluster_size_label1 ? format_double(*r.avg_cluster_size_label1) : "";
    row += "," + format_double(r.z_hetero) + "," + format_double(r.z_total) + ",";
    row += hist_field(r.cluster_size_histogram[0]) + "," + hist_field(r.cluster_size_histogram[1]);
    return row;
}

} // namespace aggstem
