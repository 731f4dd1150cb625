#pragma once

// Simulated Flash memory and the read path through which faults act.
//
// Addresses are byte addresses of 32-bit aligned words. Bit 0 is the LSB.
// Within a word, int8 lane n occupies bits [8n, 8n+7] (little-endian).

#include "nnfl/fault_kind.hpp"
#include "nnfl/model.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace nnfl {

inline constexpr std::uint32_t kFlashBase = 0x08000000u;
// Input buffer lives in SRAM unless packed into flash.
inline constexpr std::uint32_t kSramBase = 0x20000000u;

class FlashImage {
  public:
    FlashImage() = default;
    FlashImage(std::uint32_t base_address, std::vector<std::uint32_t> words);

    std::uint32_t base_address() const noexcept { return base_; }
    std::size_t word_count() const noexcept { return words_.size(); }
    std::span<const std::uint32_t> words() const noexcept { return words_; }
    std::uint32_t address_of(std::size_t index) const { return base_ + static_cast<std::uint32_t>(4 * index); }

    bool contains(std::uint32_t address) const noexcept;
    /// Stored value; throws MappingError for unmapped or unaligned addresses.
    std::uint32_t stored(std::uint32_t address) const;
    /// CRC32 of the little-endian byte content.
    std::uint32_t content_hash() const;

    /// Overwrites a stored word. Only permanent faults and packing go through here.
    void store(std::uint32_t address, std::uint32_t value);

    bool operator==(const FlashImage &) const = default;

  private:
    std::size_t index_of(std::uint32_t address) const;

    std::uint32_t base_ = kFlashBase;
    std::vector<std::uint32_t> words_;
};

enum class Region : std::uint8_t { Weights, Biases, Input };

struct ElementKey {
    Region region = Region::Weights;
    std::size_t layer = 0; // ignored for Input
    std::size_t element = 0;

    auto operator<=>(const ElementKey &) const = default;
};

struct ElementLocation {
    std::uint32_t word_address = 0;
    unsigned bit_offset = 0; // LSB of the element inside the word
    unsigned width = 8;      // 8 or 32

    bool operator==(const ElementLocation &) const = default;
};

/// (region, layer, element) -> (word, bit offset, width).
class MemoryMap {
  public:
    MemoryMap() = default;
    MemoryMap(std::vector<std::vector<ElementLocation>> weights, std::vector<std::vector<ElementLocation>> biases,
              std::vector<ElementLocation> input, bool inputs_in_flash);

    const ElementLocation &locate(const ElementKey &key) const;
    const std::vector<ElementLocation> &weights(std::size_t layer) const;
    const std::vector<ElementLocation> &biases(std::size_t layer) const;
    const std::vector<ElementLocation> &input() const noexcept { return input_; }
    std::size_t layer_count() const noexcept { return weights_.size(); }
    bool inputs_in_flash() const noexcept { return inputs_in_flash_; }

    /// All entries in region/layer/element order.
    std::vector<std::pair<ElementKey, ElementLocation>> entries() const;
    std::size_t size() const;

    /// Throws ContractViolation if two elements share a (word, bit).
    void check_injective() const;
    /// Throws ContractViolation unless every parameter and pixel of `model` has an entry.
    void check_covers(const Model &model) const;

    bool operator==(const MemoryMap &) const = default;

  private:
    std::vector<std::vector<ElementLocation>> weights_;
    std::vector<std::vector<ElementLocation>> biases_;
    std::vector<ElementLocation> input_;
    bool inputs_in_flash_ = false;
};

enum class Persistence : std::uint8_t { TransientOnRead, Permanent };

/// Always when nth_read == 0, otherwise only on the n-th read of the word.
struct Trigger {
    std::uint32_t nth_read = 0;

    static constexpr Trigger always() { return {}; }
    static constexpr Trigger nth(std::uint32_t n) { return {n}; }
    bool fires_on(std::uint64_t read_index) const { return nth_read == 0 || read_index == nth_read; }

    bool operator==(const Trigger &) const = default;
};

struct FaultSpec {
    FaultKind kind = FaultKind::BitSet;
    std::uint32_t word_address = 0;
    unsigned bit = 0; // 0..31
    Persistence persistence = Persistence::TransientOnRead;
    Trigger trigger = Trigger::always();

    void validate() const;
    bool operator==(const FaultSpec &) const = default;
};

/// Per-word read occurrence counters.
class ReadCounters {
  public:
    /// Records a read and returns its 1-based occurrence index.
    std::uint64_t record(std::uint32_t address) { return ++counts_[address]; }
    std::uint64_t count(std::uint32_t address) const;
    void reset() { counts_.clear(); }

  private:
    std::unordered_map<std::uint32_t, std::uint64_t> counts_;
};

/// Value returned by reading `address` with the active transient faults.
/// Storage is never modified. Permanent faults in the list are rejected.
std::uint32_t read_word(const FlashImage &image, std::uint32_t address, std::span<const FaultSpec> active_faults,
                        ReadCounters &counters);

/// Mutates stored content by the fault mask.
void apply_permanent_fault(FlashImage &image, std::uint32_t address, unsigned bit, FaultKind kind);
void apply_permanent_fault(FlashImage &image, const FaultSpec &fault);

struct PackedModel {
    FlashImage flash;
    MemoryMap map;
};

/// Weights four per word (layer by layer, row-major), then one int32 bias per
/// word, then the input pixels when `inputs_in_flash`. Otherwise the input map
/// points into the SRAM buffer at kSramBase.
PackedModel pack_model(const Model &model, bool inputs_in_flash, const InputImage *input = nullptr);

/// Quantized parameters read back from storage, using `layout` for shapes and scales.
Model unpack_model(const FlashImage &flash, const MemoryMap &map, const Model &layout);
/// Pixels stored in flash; requires map.inputs_in_flash().
std::vector<std::uint8_t> unpack_input(const FlashImage &flash, const MemoryMap &map);

/// Packs input pixels into words at kSramBase.
FlashImage make_input_buffer(std::span<const std::uint8_t> pixels);

/// Fault on bit `element_bit` of one mapped element.
FaultSpec fault_for_element(const MemoryMap &map, const ElementKey &key, unsigned element_bit, FaultKind kind,
                            Persistence persistence = Persistence::TransientOnRead,
                            Trigger trigger = Trigger::always());

/// Reader that fetches each mapped word once per inference through read_word.
class FaultedReader final : public MemoryReader {
  public:
    FaultedReader(const FlashImage &flash, const MemoryMap &map, std::vector<FaultSpec> faults = {});

    FetchedParams fetch(const Model &model, const InputImage &input) override;

    const ReadCounters &counters() const noexcept { return counters_; }
    std::span<const FaultSpec> faults() const noexcept { return faults_; }

  private:
    const FlashImage *flash_;
    const MemoryMap *map_;
    std::vector<FaultSpec> faults_;
    ReadCounters counters_;
};

FaultedReader faulted_reader(const FlashImage &flash, const MemoryMap &map, std::vector<FaultSpec> faults);

std::string_view to_string(Region region);
Region parse_region(std::string_view text);
std::string_view to_string(Persistence p);
Persistence parse_persistence(std::string_view text);

} // namespace nnfl
