#include "nnfl/laser.hpp"

#include "nnfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace nnfl {

void LaserShot::validate() const {
    require(!spots.empty() && spots.size() <= 2, "a laser shot has one or two spots");
    for (const auto &s : spots)
        require(s.x_um >= 0.0 && s.y_um >= 0.0, "spot coordinates must be non-negative");
    require(pulse_power_mw >= 0.0 && pulse_width_ns >= 0.0 && delay_ns >= 0.0,
            "pulse parameters must be non-negative");
}

void SpotBitMapping::validate() const {
    require(pitch_um > 0.0, "bit pitch must be positive");
    require(x_extent_um > 0.0 && y_extent_um > 0.0, "scan extents must be positive");
    require(power_threshold_mw >= 0.0, "power threshold must be non-negative");
}

unsigned SpotBitMapping::bit_for_x(double x_um) const {
    const double cell = std::floor((x_um - x_offset_um) / pitch_um);
    return static_cast<unsigned>(std::clamp(cell, 0.0, 31.0));
}

std::vector<FaultSpec> shot_to_faults(const LaserShot &shot, const SpotBitMapping &mapping,
                                      std::uint32_t target_word) {
    shot.validate();
    mapping.validate();
    std::vector<FaultSpec> out;
    if (shot.pulse_power_mw < mapping.power_threshold_mw)
        return out;
    std::set<unsigned> bits;
    for (const auto &s : shot.spots)
        bits.insert(mapping.bit_for_x(s.x_um));
    for (unsigned b : bits)
        out.push_back(FaultSpec{mapping.kind, target_word, b, Persistence::TransientOnRead, Trigger::always()});
    return out;
}

} // namespace nnfl
