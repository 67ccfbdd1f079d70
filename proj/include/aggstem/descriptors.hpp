#ifndef AGGSTEM_DESCRIPTORS_HPP
#define AGGSTEM_DESCRIPTORS_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "aggstem/geometry.hpp"

namespace aggstem {

// Structural summary of one aggregate; one CSV row in datasets.
struct DescriptorReport {
    int n_particles = 0;
    double fractal_dim = 0.0; // NaN when undefined (N < 2 or degenerate)
    double mixing_ratio = 0.0;
    std::optional<double> avg_cluster_size_label0;
    std::optional<double> avg_cluster_size_label1;
    double z_hetero = 0.0;
    double z_total = 0.0;
    // counts[s-1] = number of observable clusters of size s, per label
    std::array<std::vector<int>, 2> cluster_size_histogram;
};

// Inclusion-maximal connected same-label particle subsets. Each component
// is a sorted list of particle indices; components are ordered by their
// smallest index.
std::vector<std::vector<int>> observable_clusters(const Aggregate& a, int label);

// Mean component size over observable_clusters(a, label); throws
// LabelAbsent when no particle carries the label.
double average_cluster_size(const Aggregate& a, int label);

// 2 * (number of contacts between unlike labels) / N.
double hetero_coordination(const Aggregate& a);

// 2 * (number of contacts) / N.
double total_coordination(const Aggregate& a);

DescriptorReport descriptor_report(const Aggregate& a,
                                   double k_f = kDefaultFractalPrefactor);

// CSV serialization (fixed column order, see csv_header()).
std::string descriptor_csv_header();
std::string descriptor_csv_row(const DescriptorReport& r);

} // namespace aggstem

#endif
