#pragma once

#include <algorithm>
#include <utility>

#include "hosim/core.hpp"
#include "hosim/rng.hpp"

namespace hosim {

// Random-direction mobility: constant speed, heading redrawn uniformly
// every redraw epoch, specular reflection at the area boundary.
struct MobilityState {
    double heading_rad = 0.0;          // in [0, 2*pi)
    double speed_mps = 0.0;
    int redraw_countdown_steps = 0;    // steps until the next heading redraw
};

inline double wrap_heading(double h) {
    h = std::fmod(h, 2.0 * kPi);
    if (h < 0.0) h += 2.0 * kPi;
    return h;
}

inline std::pair<Vec2, MobilityState> step_position(const Vec2& position,
                                                    const MobilityState& state,
                                                    double dt, const Rect& area,
                                                    Rng& rng,
                                                    int redraw_epoch_steps = 20) {
    MobilityState st = state;
    if (st.redraw_countdown_steps <= 0) {
        st.heading_rad = rng.uniform(0.0, 2.0 * kPi);
        st.redraw_countdown_steps = redraw_epoch_steps;
    }

    Vec2 p{position.x + std::cos(st.heading_rad) * st.speed_mps * dt,
           position.y + std::sin(st.heading_rad) * st.speed_mps * dt};

    // Specular reflection; a step may bounce more than once in a corner.
    for (int guard = 0; guard < 64 && !area.contains(p); ++guard) {
        if (p.x < 0.0) {
            p.x = -p.x;
            st.heading_rad = kPi - st.heading_rad;
        } else if (p.x > area.width) {
            p.x = 2.0 * area.width - p.x;
            st.heading_rad = kPi - st.heading_rad;
        }
        if (p.y < 0.0) {
            p.y = -p.y;
            st.heading_rad = -st.heading_rad;
        } else if (p.y > area.height) {
            p.y = 2.0 * area.height - p.y;
            st.heading_rad = -st.heading_rad;
        }
    }
    if (!area.contains(p)) {  // degenerate area smaller than one step
        p.x = std::clamp(p.x, 0.0, area.width);
        p.y = std::clamp(p.y, 0.0, area.height);
    }
    st.heading_rad = wrap_heading(st.heading_rad);
    st.redraw_countdown_steps -= 1;
    return {p, st};
}

}  // namespace hosim
