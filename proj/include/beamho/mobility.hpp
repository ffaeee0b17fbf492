#pragma once

#include <cmath>

#include "beamho/geometry.hpp"
#include "beamho/rng.hpp"

namespace beamho {

enum class MobilityVariant {
    RandomWalk,        // training: uniform random direction, reflecting walls
    SemiDeterministic, // evaluation: constant +y steps, x redrawn at the top edge
    Lattice            // axis-aligned walk on a step_m grid (test worlds)
};

struct MobilityModel {
    MobilityVariant variant = MobilityVariant::RandomWalk;
    double step_m = 1.0;
};

inline Vec2 mobility_step(const MobilityModel& model, Vec2 pos, const Rect& bounds,
                          Rng& rng) {
    switch (model.variant) {
        case MobilityVariant::RandomWalk: {
            double angle = rng.next_double() * 2.0 * M_PI;
            Vec2 next{pos.x + model.step_m * std::cos(angle),
                      pos.y + model.step_m * std::sin(angle)};
            next.x = reflect_into(next.x, bounds.xmin, bounds.xmax);
            next.y = reflect_into(next.y, bounds.ymin, bounds.ymax);
            return next;
        }
        case MobilityVariant::SemiDeterministic: {
            Vec2 next{pos.x, pos.y + model.step_m};
            if (next.y > bounds.ymax) {
                next.y = bounds.ymin;
                next.x = rng.uniform(bounds.xmin, bounds.xmax);
            }
            return next;
        }
        case MobilityVariant::Lattice: {
            static constexpr double dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
            const double* d = dirs[rng.next_below(4)];
            Vec2 next{pos.x + d[0] * model.step_m, pos.y + d[1] * model.step_m};
            if (!bounds.contains(next)) {
                next = {pos.x - d[0] * model.step_m, pos.y - d[1] * model.step_m};
                if (!bounds.contains(next)) next = pos;
            }
            return next;
        }
    }
    return pos;
}

}  // namespace beamho
