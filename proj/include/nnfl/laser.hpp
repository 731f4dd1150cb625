#pragma once

// Laser shot geometry: spot X position selects the faulted bit of the word
// being read; Y has no effect.

#include "nnfl/memory.hpp"

#include <cstdint>
#include <vector>

namespace nnfl {

struct Spot {
    double x_um = 0.0;
    double y_um = 0.0;
};

struct LaserShot {
    std::vector<Spot> spots; // one or two
    double pulse_power_mw = 200.0;
    double pulse_width_ns = 200.0; // metadata only
    double delay_ns = 1700.0;      // metadata only

    void validate() const;
};

struct SpotBitMapping {
    double x_extent_um = 1400.0;
    double y_extent_um = 550.0;
    double power_threshold_mw = 200.0;
    double pitch_um = 1400.0 / 32.0;
    double x_offset_um = 0.0;
    // The bench only produced bit-sets; BitReset is available for what-if studies.
    FaultKind kind = FaultKind::BitSet;

    /// clamp(floor((x - x_offset) / pitch), 0, 31)
    unsigned bit_for_x(double x_um) const;
    void validate() const;
};

/// One transient fault per distinct bit hit, none below the power threshold.
std::vector<FaultSpec> shot_to_faults(const LaserShot &shot, const SpotBitMapping &mapping,
                                      std::uint32_t target_word);

} // namespace nnfl
