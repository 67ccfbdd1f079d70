#include "aggstem/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "aggstem/errors.hpp"
#include "aggstem/geometry_io.hpp"

namespace aggstem {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& s) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InvalidParams("config key `" + key + "`: cannot parse number from \"" + s + "\"");
    }
}

} // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
    KeyValueConfig kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t sp = t.find_first_of(" \t");
        if (sp == std::string::npos)
            throw ParseError("config line " + std::to_string(lineno) +
                             ": expected `key value`, got \"" + t + "\"");
        kv.values[t.substr(0, sp)] = trim(t.substr(sp + 1));
    }
    return kv;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open config: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void KeyValueConfig::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write config: " + file.string());
    out << canonical_text();
}

std::string KeyValueConfig::canonical_text() const {
    std::string s;
    for (const auto& [k, v] : values) s += k + " " + v + "\n";
    return s;
}

std::string KeyValueConfig::get_str(const std::string& key, const std::string& def) const {
    auto it = values.find(key);
    return it == values.end() ? def : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double def) const {
    auto it = values.find(key);
    return it == values.end() ? def : parse_double(key, it->second);
}

int KeyValueConfig::get_int(const std::string& key, int def) const {
    auto it = values.find(key);
    if (it == values.end()) return def;
    double v = parse_double(key, it->second);
    return static_cast<int>(v);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t def) const {
    auto it = values.find(key);
    if (it == values.end()) return def;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw InvalidParams("config key `" + key + "`: cannot parse integer");
    }
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) const {
    auto it = values.find(key);
    if (it == values.end()) return def;
    const std::string& s = it->second;
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw InvalidParams("config key `" + key + "`: cannot parse boolean from \"" + s + "\"");
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key,
                                                    const std::vector<double>& def) const {
    auto it = values.find(key);
    if (it == values.end()) return def;
    std::vector<double> out;
    std::string item;
    std::istringstream ss(it->second);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw InvalidParams("config key `" + key + "`: empty list");
    return out;
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key,
                                              const std::vector<int>& def) const {
    auto d = get_double_list(key, std::vector<double>(def.begin(), def.end()));
    return std::vector<int>(d.begin(), d.end());
}

GrowthConfig growth_from_config(const KeyValueConfig& kv) {
    GrowthConfig g;
    g.k_f = kv.get_double("growth.kf", g.k_f);
    g.contact_slack = kv.get_double("growth.contact_slack", g.contact_slack);
    g.max_position_attempts = kv.get_int("growth.max_position_attempts", g.max_position_attempts);
    g.max_restarts = kv.get_int("growth.max_restarts", g.max_restarts);
    g.target_size_min = kv.get_int("growth.size_min", g.target_size_min);
    g.target_size_max = kv.get_int("growth.size_max", g.target_size_max);
    g.radius.mean = kv.get_double("growth.radius_mean", g.radius.mean);
    g.radius.std = kv.get_double("growth.radius_std", g.radius.std);
    return g;
}

RenderConfig render_from_config(const KeyValueConfig& kv) {
    RenderConfig r;
    r.beta = kv.get_double("render.beta", r.beta);
    std::string dose = kv.get_str("render.dose", "");
    if (dose == "inf" || dose == "none")
        r.dose = std::numeric_limits<double>::infinity();
    else
        r.dose = kv.get_double("render.dose", r.dose);
    r.scan_sigma = kv.get_double("render.scan_sigma", r.scan_sigma);
    r.width = kv.get_int("render.width", r.width);
    r.height = kv.get_int("render.height", r.height);
    r.pixel_size = kv.get_double("render.pixel_size", r.pixel_size);
    r.quantize_levels = kv.get_int("render.quantize_levels", r.quantize_levels);
    r.scan_per_row = kv.get_bool("render.scan_per_row", r.scan_per_row);
    return r;
}

void growth_to_config(const GrowthConfig& g, KeyValueConfig& kv) {
    kv.set("growth.kf", format_double(g.k_f));
    kv.set("growth.contact_slack", format_double(g.contact_slack));
    kv.set("growth.max_position_attempts", std::to_string(g.max_position_attempts));
    kv.set("growth.max_restarts", std::to_string(g.max_restarts));
    kv.set("growth.size_min", std::to_string(g.target_size_min));
    kv.set("growth.size_max", std::to_string(g.target_size_max));
    kv.set("growth.radius_mean", format_double(g.radius.mean));
    kv.set("growth.radius_std", format_double(g.radius.std));
}

void render_to_config(const RenderConfig& r, KeyValueConfig& kv) {
    kv.set("render.beta", format_double(r.beta));
    kv.set("render.dose", std::isinf(r.dose) ? "inf" : format_double(r.dose));
    kv.set("render.scan_sigma", format_double(r.scan_sigma));
    kv.set("render.width", std::to_string(r.width));
    kv.set("render.height", std::to_string(r.height));
    kv.set("render.pixel_size", format_double(r.pixel_size));
    kv.set("render.quantize_levels", std::to_string(r.quantize_levels));
    kv.set("render.scan_per_row", r.scan_per_row ? "1" : "0");
}

} // namespace aggstem
