#ifndef AGGSTEM_CONFIG_HPP
#define AGGSTEM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aggstem/aggregation.hpp"
#include "aggstem/render.hpp"

namespace aggstem {

// Plain `key value` text configuration (one pair per line, '#' comments).
// Keys are dotted, e.g. `render.dose 149`. Unknown keys are preserved so
// a saved snapshot reproduces the resolved run exactly.
struct KeyValueConfig {
    std::map<std::string, std::string> values;

    static KeyValueConfig load(const std::filesystem::path& file);
    static KeyValueConfig parse(const std::string& text);
    void save(const std::filesystem::path& file) const;
    std::string canonical_text() const;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { values[key] = value; }

    std::string get_str(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key, double def) const;
    int get_int(const std::string& key, int def) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
    bool get_bool(const std::string& key, bool def) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& def) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& def) const;
};

GrowthConfig growth_from_config(const KeyValueConfig& kv);
RenderConfig render_from_config(const KeyValueConfig& kv);
void growth_to_config(const GrowthConfig& g, KeyValueConfig& kv);
void render_to_config(const RenderConfig& r, KeyValueConfig& kv);

} // namespace aggstem

#endif
