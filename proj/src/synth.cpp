#include "firecast/synth.hpp"

#include <cmath>

namespace firecast {

namespace {

constexpr double kTwoPi = 6.283185307179586;

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double clip01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

LandMask two_continent_mask(GridSpec spec, std::vector<int>& continent_out) {
    std::vector<std::uint8_t> land(static_cast<std::size_t>(spec.cell_count()), 0);
    const double lat = spec.lat_count;
    const double lon = spec.lon_count;
    struct Ellipse {
        double cr, cc, ar, ac;
    };
    const Ellipse north{0.27 * lat, 0.32 * lon, 0.21 * lat, 0.26 * lon};
    const Ellipse south{0.73 * lat, 0.68 * lon, 0.19 * lat, 0.24 * lon};
    auto inside = [](const Ellipse& e, int r, int c) {
        const double dr = (r - e.cr) / e.ar;
        const double dc = (c - e.cc) / e.ac;
        return dr * dr + dc * dc <= 1.0;
    };
    std::vector<int> continent;
    for (int r = 0; r < spec.lat_count; ++r) {
        for (int c = 0; c < spec.lon_count; ++c) {
            if (inside(north, r, c)) {
                land[static_cast<std::size_t>(r * spec.lon_count + c)] = 1;
                continent.push_back(0);
            } else if (inside(south, r, c)) {
                land[static_cast<std::size_t>(r * spec.lon_count + c)] = 1;
                continent.push_back(1);
            }
        }
    }
    continent_out = std::move(continent);  // row-major order matches node order
    return LandMask(spec, std::move(land));
}

}  // namespace

void SynthConfig::validate() const {
    if (grid.lat_count < 4 || grid.lon_count < 4) {
        throw ConfigError("synth: grid must be at least 4x4");
    }
    if (months < 12 || months % 12 != 0) {
        throw ConfigError("synth: months must be a positive multiple of 12");
    }
    if (ensemble_count < 2) throw ConfigError("synth: need at least 2 ensemble members");
    if (phase_offset < 0 || phase_offset >= 12) {
        throw ConfigError("synth: phase_offset must be in [0, 12)");
    }
    if (noise < 0.0) throw ConfigError("synth: noise must be >= 0");
}

MemberRole synth_member_role(int index, int ensemble_count) {
    if (index == ensemble_count - 1) return MemberRole::Validation;
    if (index == ensemble_count - 2) return MemberRole::Test;
    return MemberRole::Train;
}

SynthData generate(const SynthConfig& config) {
    config.validate();
    SynthData out;
    out.mask = two_continent_mask(config.grid, out.continent);
    const int n = out.mask.node_count();
    const int months = config.months;
    const int years = months / 12;
    Rng rng(config.seed);

    // Per-node mixing coefficients and month jitter, drawn in node order.
    // Static spreads are kept small: the predictable structure is mostly
    // shared within a continent, observations differ through noise.
    std::vector<double> semi_amp(static_cast<std::size_t>(n));
    std::vector<double> annual_amp(static_cast<std::size_t>(n));
    std::vector<double> jitter(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        semi_amp[static_cast<std::size_t>(i)] = rng.uniform(0.85, 1.0);
        annual_amp[static_cast<std::size_t>(i)] = rng.uniform(0.6, 0.75);
        jitter[static_cast<std::size_t>(i)] = rng.uniform(-0.25, 0.25);
    }

    // Persistent year-to-year strength of each continent's fire season.
    // Scale is tied to the noise knob so a noise-free world is exactly
    // periodic.
    const double mod_amp = 2.0 * config.noise;
    Mat modulation(2, years);
    for (int cont = 0; cont < 2; ++cont) {
        double level = 0.0;
        for (int y = 0; y < years; ++y) {
            level = 0.7 * level + rng.uniform(-1.0, 1.0);
            modulation(cont, y) = 1.0 + mod_amp * level;
        }
    }

    // Clean per-node signal: shared semiannual cycle plus hemisphere-phased
    // annual cycle, both peaking in the local summer month.
    auto clean_signal = [&](int node, int t) {
        const int cont = out.continent[static_cast<std::size_t>(node)];
        const double phase = cont == 0 ? 0.0 : static_cast<double>(config.phase_offset);
        const double m = static_cast<double>(t % 12);
        const double semi = std::cos(kTwoPi * (m - 6.0) / 6.0);
        const double annual =
            std::cos(kTwoPi * (m - 6.0 - phase - jitter[static_cast<std::size_t>(node)]) / 12.0);
        const int year = t / 12;
        return semi_amp[static_cast<std::size_t>(node)] * semi +
               annual_amp[static_cast<std::size_t>(node)] * modulation(cont, year) * annual;
    };

    // Observed climate: clean signal (sign flipped for humidity and rain)
    // plus observation noise, kept in [0, 1]. Draw order is variable, node,
    // month.
    for (auto& c : out.climate) c = Mat(n, months);
    for (int f = 0; f < kClimateFeatureCount; ++f) {
        const double sign = (f == kHumidity || f == kRainfall) ? -1.0 : 1.0;
        Mat& series = out.climate[static_cast<std::size_t>(f)];
        for (int i = 0; i < n; ++i) {
            for (int t = 0; t < months; ++t) {
                const double obs_noise = config.noise > 0.0 ? config.noise * rng.normal() : 0.0;
                series(i, t) = clip01(0.5 + 0.2 * sign * clean_signal(i, t) + obs_noise);
            }
        }
    }

    // Fire responds to the noise-free climate combination T + L - Hum - R
    // (up to the 0.2 channel scaling), squashed into (0, 1). Each monthly
    // observation carries its own noise, so a node's neighbours hold
    // independent looks at the same underlying state.
    out.members.reserve(static_cast<std::size_t>(config.ensemble_count));
    const double fire_noise = 2.5 * config.noise;
    for (int z = 0; z < config.ensemble_count; ++z) {
        EnsembleMember member;
        member.id = z + 1;
        member.role = synth_member_role(z, config.ensemble_count);
        member.fire = Mat(n, months);
        for (int i = 0; i < n; ++i) {
            const double offset = rng.uniform(-0.1, 0.1);  // member initial-state analogue
            for (int t = 0; t < months; ++t) {
                const double obs = fire_noise > 0.0 ? fire_noise * rng.normal() : 0.0;
                member.fire(i, t) = logistic(1.6 * clean_signal(i, t) + offset + obs);
            }
        }
        out.members.push_back(std::move(member));
    }
    return out;
}

}  // namespace firecast
