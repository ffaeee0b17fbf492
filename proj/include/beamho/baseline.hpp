#pragma once

#include <cstddef>
#include <stdexcept>

#include "beamho/radio.hpp"

namespace beamho {

struct BaselineConfig {
    double hysteresis_db = 0.0; // the A3 margin a neighbor must clear
    int ttt_steps = 0;          // time-to-trigger in measurement periods
};

struct TttState {
    bool running = false;
    int elapsed_steps = 0;
    int candidate = -1; // neighbor being timed

    void reset() {
        running = false;
        elapsed_steps = 0;
        candidate = -1;
    }
};

// Access-beam handover: hand over to the strongest neighbor once it has
// exceeded serving + hysteresis for ttt_steps consecutive reports.
// The timer restarts when the strongest neighbor changes identity.
inline int baseline_decide(const BaselineConfig& cfg, const MeasurementReport& report,
                           TttState& ttt) {
    std::size_t n = report.access_rsrp.size();
    if (n < 2) throw ValidationError("baseline_decide: report needs >= 2 stations");
    if (report.serving_bs < 0 || static_cast<std::size_t>(report.serving_bs) >= n)
        throw ValidationError("baseline_decide: serving id out of range");

    double serving_rsrp = report.access_rsrp[static_cast<std::size_t>(report.serving_bs)];
    int best_nbr = -1;
    double best_nbr_rsrp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<int>(i) == report.serving_bs) continue;
        if (best_nbr < 0 || report.access_rsrp[i] > best_nbr_rsrp) {
            best_nbr = static_cast<int>(i);
            best_nbr_rsrp = report.access_rsrp[i];
        }
    }

    if (best_nbr_rsrp < serving_rsrp + cfg.hysteresis_db) {
        ttt.reset();
        return report.serving_bs;
    }
    if (!ttt.running || ttt.candidate != best_nbr) {
        ttt.running = true;
        ttt.candidate = best_nbr;
        ttt.elapsed_steps = 0;
    }
    if (ttt.elapsed_steps < cfg.ttt_steps) {
        ++ttt.elapsed_steps;
        return report.serving_bs;
    }
    ttt.reset();
    return best_nbr;
}

}  // namespace beamho
