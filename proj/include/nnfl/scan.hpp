#pragma once

// Simulated laser mapping scans over one flash word.

#include "nnfl/laser.hpp"

#include <cstdint>
#include <vector>

namespace nnfl {

/// Inclusive range sampled at min + i * step.
struct ScanRange {
    double min = 0.0;
    double max = 0.0;
    double step = 1.0;

    std::size_t count() const;
    double at(std::size_t i) const { return min + static_cast<double>(i) * step; }
};

struct ScanRecord {
    double x_um = 0.0;
    double y_um = 0.0;
    double power_mw = 0.0;
    std::uint32_t read = 0;
    std::vector<unsigned> faulted_bits; // bits of read ^ stored, ascending
};

struct ScanPlan {
    ScanRange x{0.0, 1400.0, 5.0};
    ScanRange y{0.0, 550.0, 100.0};
    double power_mw = 200.0;
};

/// Single spot at every (x, y), y outer and x inner.
std::vector<ScanRecord> map_scan(const FlashImage &flash, std::uint32_t word_address, const SpotBitMapping &mapping,
                                 const ScanPlan &plan);

/// Spot 1 fixed at (spot1_x, y), spot 2 swept over plan.x at every y.
std::vector<ScanRecord> double_spot_scan(const FlashImage &flash, std::uint32_t word_address,
                                         const SpotBitMapping &mapping, double spot1_x_um, const ScanPlan &plan);

} // namespace nnfl
