#pragma once

// CSV and JSON renderings of scan records, attack results and campaign reports.

#include "nnfl/attacks/bfa.hpp"
#include "nnfl/attacks/common.hpp"
#include "nnfl/attacks/gda.hpp"
#include "nnfl/attacks/input_attack.hpp"
#include "nnfl/attacks/sba.hpp"
#include "nnfl/campaign.hpp"
#include "nnfl/scan.hpp"

#include <json.hpp>

#include <span>
#include <string>

namespace nnfl::io {

using Json = nlohmann::ordered_json;

/// Shortest text that round-trips, as printed in CSV cells.
std::string format_real(double v);
/// "0x" followed by 8 uppercase hex digits.
std::string format_hex32(std::uint32_t v);

/// Header x_um,y_um,power_mw,read_hex,faulted_bits; bits ';'-separated, empty when none.
std::string scan_csv(std::span<const ScanRecord> records);
Json scan_json(std::span<const ScanRecord> records);

std::string memory_map_csv(const MemoryMap &map);
Json memory_map_json(const MemoryMap &map);

Json to_json(const BitFault &f);
Json to_json(const AttackResult &r);

/// One onebit-attack row per image.
struct OneBitImageRecord {
    std::size_t image = 0; // index in the test split
    std::vector<std::size_t> pixels;
    bool selection_complete = true;
    std::size_t de_queries = 0;
    OneBitOutcome attack;
    std::optional<std::size_t> oracle_successes; // exhaustive count when computed
};

Json onebit_json(std::span<const OneBitImageRecord> records, const ExistenceMetric *existence);
/// One row per successful fault: image,pixel,bit,kind,label_before,label_after,prob_before,prob_after,verified.
std::string onebit_csv(std::span<const OneBitImageRecord> records);

Json bfa_json(const BFAResult &r);
std::string bfa_csv(const BFAResult &r);
Json sba_json(const SBAResult &r, std::size_t target);
std::string sba_csv(const SBAResult &r, std::size_t target);
Json gda_json(const GDAResult &r, std::size_t image, std::size_t target, bool verified);
std::string gda_csv(const GDAResult &r);

Json campaign_json(const CampaignReport &r);
/// One row per trial: trial,seed,correct,accuracy,faults (layer:element:bit joined by ';').
std::string campaign_csv(const CampaignReport &r);
/// bit,faults,mean_drop
std::string campaign_bits_csv(const CampaignReport &r);

Json disable_json(const DisableCurve &c);
/// fraction,disabled,mean_misclassification,ci_low,ci_high
std::string disable_csv(const DisableCurve &c);

} // namespace nnfl::io
