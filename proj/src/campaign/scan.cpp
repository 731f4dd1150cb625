#include "nnfl/scan.hpp"

#include "nnfl/errors.hpp"

#include <cmath>

namespace nnfl {

namespace {

ScanRecord shoot(const FlashImage &flash, std::uint32_t address, const SpotBitMapping &mapping, LaserShot shot) {
    const std::uint32_t stored = flash.stored(address);
    ReadCounters counters;
    const auto faults = shot_to_faults(shot, mapping, address);
    ScanRecord r;
    r.x_um = shot.spots.back().x_um;
    r.y_um = shot.spots.back().y_um;
    r.power_mw = shot.pulse_power_mw;
    r.read = read_word(flash, address, faults, counters);
    const std::uint32_t diff = r.read ^ stored;
    for (unsigned b = 0; b < 32; ++b)
        if (diff >> b & 1u)
            r.faulted_bits.push_back(b);
    return r;
}

void check_plan(const ScanPlan &plan) {
    require(plan.x.step > 0.0 && plan.y.step > 0.0, "scan steps must be positive");
    require(plan.x.max >= plan.x.min && plan.y.max >= plan.y.min, "scan ranges must not be empty");
    require(plan.power_mw >= 0.0, "pulse power must be non-negative");
}

} // namespace

std::size_t ScanRange::count() const {
    require(step > 0.0 && max >= min, "invalid scan range");
    return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

std::vector<ScanRecord> map_scan(const FlashImage &flash, std::uint32_t word_address, const SpotBitMapping &mapping,
                                 const ScanPlan &plan) {
    check_plan(plan);
    mapping.validate();
    std::vector<ScanRecord> out;
    const std::size_t nx = plan.x.count();
    const std::size_t ny = plan.y.count();
    out.reserve(nx * ny);
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            LaserShot shot;
            shot.spots = {{plan.x.at(i), plan.y.at(j)}};
            shot.pulse_power_mw = plan.power_mw;
            out.push_back(shoot(flash, word_address, mapping, shot));
        }
    return out;
}

std::vector<ScanRecord> double_spot_scan(const FlashImage &flash, std::uint32_t word_address,
                                         const SpotBitMapping &mapping, double spot1_x_um, const ScanPlan &plan) {
    check_plan(plan);
    mapping.validate();
    std::vector<ScanRecord> out;
    for (std::size_t j = 0; j < plan.y.count(); ++j)
        for (std::size_t i = 0; i < plan.x.count(); ++i) {
            LaserShot shot;
            shot.spots = {{spot1_x_um, plan.y.at(j)}, {plan.x.at(i), plan.y.at(j)}};
            shot.pulse_power_mw = plan.power_mw;
            out.push_back(shoot(flash, word_address, mapping, shot));
        }
    return out;
}

} // namespace nnfl
