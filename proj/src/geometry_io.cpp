#include "aggstem/geometry_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "aggstem/errors.hpp"

namespace aggstem {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_geometry(const Aggregate& a) {
    std::string out;
    if (a.provenance) {
        const auto& pv = *a.provenance;
        out += "# seed " + std::to_string(pv.seed) + "\n";
        out += "# theta " + format_double(pv.theta.theta_df) + " " +
               format_double(pv.theta.theta_rho) + " " + std::to_string(pv.theta.theta_0) +
               " " + std::to_string(pv.theta.theta_1) + "\n";
    }
    for (const auto& p : a.particles) {
        out += format_double(p.position.x) + " " + format_double(p.position.y) + " " +
               format_double(p.position.z) + " " + format_double(p.radius) + " " +
               std::to_string(p.label) + "\n";
    }
    return out;
}

Aggregate parse_geometry(const std::string& text) {
    Aggregate a;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_meta = false;
    Provenance pv;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "seed") {
                hs >> pv.seed;
                have_meta = true;
            } else if (key == "theta") {
                hs >> pv.theta.theta_df >> pv.theta.theta_rho >> pv.theta.theta_0 >>
                    pv.theta.theta_1;
                have_meta = true;
            }
            continue;
        }
        std::istringstream ps(line);
        Particle p;
        if (!(ps >> p.position.x >> p.position.y >> p.position.z >> p.radius >> p.label))
            throw ParseError("geometry line " + std::to_string(lineno) +
                             ": expected `x y z r label`, got \"" + line + "\"");
        if (!(p.radius > 0.0) || !p.position.finite() || (p.label != 0 && p.label != 1))
            throw ParseError("geometry line " + std::to_string(lineno) +
                             ": invalid particle values");
        a.particles.push_back(p);
    }
    if (have_meta) a.provenance = pv;
    return a;
}

void save_geometry(const Aggregate& a, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    out << format_geometry(a);
    if (!out) throw IoError("write failed: " + file.string());
}

Aggregate load_geometry(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_geometry(ss.str());
}

} // namespace aggstem
