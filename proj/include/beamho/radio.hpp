#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "beamho/geometry.hpp"
#include "beamho/rng.hpp"

namespace beamho {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class BeamKind { Access, Link };

struct Beam {
    double azimuth_deg = 0.0;    // boresight direction, absolute, [0, 360)
    double beamwidth_deg = 65.0; // full 3 dB beamwidth
    double max_gain_dbi = 8.0;
    BeamKind kind = BeamKind::Access;
};

struct BaseStation {
    int id = 0;
    Vec2 position;
    double boresight_deg = 0.0; // sector orientation, informational
    std::vector<Beam> access_beams;
    std::vector<Beam> link_beams;
    double tx_power_dbm = 30.0;
};

enum class PropagationVariant { LogDistance, UrbanMacro };

struct PropagationModel {
    PropagationVariant variant = PropagationVariant::LogDistance;
    double exponent = 3.1;
    double ref_loss_db = 40.0;       // loss at the 1 m reference distance
    double shadowing_sigma_db = 0.0; // 0 disables shadowing
    double freq_ghz = 3.5;           // urban-macro variant only
    double shadow_grid_m = 5.0;      // shadowing decorrelation cell size
    std::uint64_t shadow_seed = 0;   // derived from the scenario master seed
};

struct Deployment {
    std::vector<BaseStation> stations;
    PropagationModel propagation;
    Rect bounds;
    double noise_floor_dbm = -140.0;
};

// Per-step UE observation: serving BS plus best access-beam RSRP of every
// BS in fixed id order. This is the CMAB context vector.
struct MeasurementReport {
    int serving_bs = 0;
    std::vector<double> access_rsrp;
};

// Parabolic-in-dB sectored antenna pattern with a 30 dB front-to-back limit.
// At half the 3 dB beamwidth the attenuation is exactly 3 dB.
inline double beam_gain(const Beam& beam, double angle_off_boresight_deg) {
    double ratio = angle_off_boresight_deg / beam.beamwidth_deg;
    double atten = std::min(12.0 * ratio * ratio, 30.0);
    return beam.max_gain_dbi - atten;
}

// Spatially-consistent lognormal shadowing: a pure function of
// (seed, bs id, quantized position). No state is stored.
inline double shadowing_db(const PropagationModel& model, int bs_id, Vec2 pos) {
    if (model.shadowing_sigma_db <= 0.0) return 0.0;
    auto ix = static_cast<std::int64_t>(std::floor(pos.x / model.shadow_grid_m));
    auto iy = static_cast<std::int64_t>(std::floor(pos.y / model.shadow_grid_m));
    std::uint64_t h = model.shadow_seed;
    h = hash_combine(h, static_cast<std::uint64_t>(bs_id));
    h = hash_combine(h, static_cast<std::uint64_t>(ix));
    h = hash_combine(h, static_cast<std::uint64_t>(iy));
    // map to (0, 1) strictly, then through the inverse normal CDF
    double u = (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
    return model.shadowing_sigma_db * inverse_normal_cdf(u);
}

inline double path_loss(const PropagationModel& model, const BaseStation& bs, Vec2 pos) {
    double d = std::max(distance(bs.position, pos), 1.0);
    double loss;
    switch (model.variant) {
        case PropagationVariant::LogDistance:
            loss = model.ref_loss_db + 10.0 * model.exponent * std::log10(d);
            break;
        case PropagationVariant::UrbanMacro:
            loss = 13.54 + 39.08 * std::log10(d) + 20.0 * std::log10(model.freq_ghz);
            break;
        default:
            loss = 0.0;
            break;
    }
    return loss + shadowing_db(model, bs.id, pos);
}

inline double rsrp(const Deployment& dep, int bs_id, int beam_index, BeamKind kind,
                   Vec2 pos) {
    const auto& bs = dep.stations.at(static_cast<std::size_t>(bs_id));
    const auto& beams = (kind == BeamKind::Access) ? bs.access_beams : bs.link_beams;
    const auto& beam = beams.at(static_cast<std::size_t>(beam_index));
    double off = wrap_angle_deg(azimuth_deg(bs.position, pos) - beam.azimuth_deg);
    double p = bs.tx_power_dbm + beam_gain(beam, off) - path_loss(dep.propagation, bs, pos);
    return std::max(p, dep.noise_floor_dbm);
}

// Reward signal: best link-beam RSRP of a BS at a position.
inline double best_link_rsrp(const Deployment& dep, int bs_id, Vec2 pos) {
    const auto& bs = dep.stations.at(static_cast<std::size_t>(bs_id));
    double best = dep.noise_floor_dbm;
    for (std::size_t j = 0; j < bs.link_beams.size(); ++j)
        best = std::max(best, rsrp(dep, bs_id, static_cast<int>(j), BeamKind::Link, pos));
    return best;
}

inline double best_access_rsrp(const Deployment& dep, int bs_id, Vec2 pos) {
    const auto& bs = dep.stations.at(static_cast<std::size_t>(bs_id));
    double best = dep.noise_floor_dbm;
    for (std::size_t j = 0; j < bs.access_beams.size(); ++j)
        best = std::max(best, rsrp(dep, bs_id, static_cast<int>(j), BeamKind::Access, pos));
    return best;
}

inline MeasurementReport measure(const Deployment& dep, Vec2 pos, int serving) {
    if (serving < 0 || serving >= static_cast<int>(dep.stations.size()))
        throw std::out_of_range("measure: serving BS id " + std::to_string(serving));
    MeasurementReport report;
    report.serving_bs = serving;
    report.access_rsrp.reserve(dep.stations.size());
    for (std::size_t i = 0; i < dep.stations.size(); ++i)
        report.access_rsrp.push_back(best_access_rsrp(dep, static_cast<int>(i), pos));
    return report;
}

inline int argmax_access_bs(const Deployment& dep, Vec2 pos) {
    int best = 0;
    double best_p = best_access_rsrp(dep, 0, pos);
    for (std::size_t i = 1; i < dep.stations.size(); ++i) {
        double p = best_access_rsrp(dep, static_cast<int>(i), pos);
        if (p > best_p) {
            best_p = p;
            best = static_cast<int>(i);
        }
    }
    return best;
}

// Structural checks plus coverage sampling. Throws ValidationError on the
// first violation found.
inline void validate_deployment(const Deployment& dep, int coverage_samples_per_axis = 20) {
    if (dep.stations.size() < 2)
        throw ValidationError("deployment needs at least 2 stations");
    if (dep.bounds.width() <= 0.0 || dep.bounds.height() <= 0.0)
        throw ValidationError("bounds must have strictly positive area");
    std::vector<char> seen;
    for (const auto& bs : dep.stations) {
        if (bs.id < 0 || bs.id >= static_cast<int>(dep.stations.size()))
            throw ValidationError("station id out of range: " + std::to_string(bs.id));
        if (seen.size() <= static_cast<std::size_t>(bs.id)) seen.resize(dep.stations.size(), 0);
        if (seen[static_cast<std::size_t>(bs.id)]++)
            throw ValidationError("duplicate station id: " + std::to_string(bs.id));
        if (bs.access_beams.empty() || bs.link_beams.empty())
            throw ValidationError("station " + std::to_string(bs.id) + " needs access and link beams");
        double min_access_bw = 1e300, max_link_bw = 0.0;
        for (const auto& b : bs.access_beams) min_access_bw = std::min(min_access_bw, b.beamwidth_deg);
        for (const auto& b : bs.link_beams) max_link_bw = std::max(max_link_bw, b.beamwidth_deg);
        if (min_access_bw < max_link_bw)
            throw ValidationError("station " + std::to_string(bs.id) +
                                  ": access beams must be at least as wide as link beams");
        auto check_beam = [&](const Beam& b) {
            if (b.beamwidth_deg <= 0.0) throw ValidationError("beamwidth must be > 0");
            if (!std::isfinite(b.max_gain_dbi)) throw ValidationError("max_gain_dbi must be finite");
            if (b.azimuth_deg < 0.0 || b.azimuth_deg >= 360.0)
                throw ValidationError("beam azimuth must lie in [0, 360)");
        };
        for (const auto& b : bs.access_beams) check_beam(b);
        for (const auto& b : bs.link_beams) check_beam(b);
    }
    if (dep.propagation.exponent <= 0.0)
        throw ValidationError("path-loss exponent must be > 0");
    if (dep.propagation.shadowing_sigma_db < 0.0)
        throw ValidationError("shadowing sigma must be >= 0");
    // coverage: every sampled position must hear at least one access beam
    int n = coverage_samples_per_axis;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Vec2 p{dep.bounds.xmin + dep.bounds.width() * (i + 0.5) / n,
                   dep.bounds.ymin + dep.bounds.height() * (j + 0.5) / n};
            bool covered = false;
            for (std::size_t b = 0; b < dep.stations.size() && !covered; ++b)
                covered = best_access_rsrp(dep, static_cast<int>(b), p) > dep.noise_floor_dbm;
            if (!covered)
                throw ValidationError("coverage hole at sampled position (" +
                                      std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
        }
    }
}

}  // namespace beamho
