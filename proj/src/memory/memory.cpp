#include "nnfl/memory.hpp"

#include "nnfl/errors.hpp"

#include <zlib.h>

#include <algorithm>
#include <set>
#include <sstream>

namespace nnfl {

namespace {

std::string hex32(std::uint32_t v) {
    std::ostringstream os;
    os << "0x" << std::hex << std::uppercase;
    os.width(8);
    os.fill('0');
    os << v;
    return os.str();
}

std::uint32_t extract(std::uint32_t word, const ElementLocation &loc) {
    if (loc.width == 32)
        return word;
    return (word >> loc.bit_offset) & ((1u << loc.width) - 1u);
}

} // namespace

// FlashImage

FlashImage::FlashImage(std::uint32_t base_address, std::vector<std::uint32_t> words)
    : base_(base_address), words_(std::move(words)) {
    require(base_ % 4 == 0, "flash base address must be word aligned");
}

bool FlashImage::contains(std::uint32_t address) const noexcept {
    return address >= base_ && address % 4 == 0 && (address - base_) / 4 < words_.size();
}

std::size_t FlashImage::index_of(std::uint32_t address) const {
    if (!contains(address))
        throw MappingError("unmapped flash address " + hex32(address));
    return (address - base_) / 4;
}

std::uint32_t FlashImage::stored(std::uint32_t address) const { return words_[index_of(address)]; }

void FlashImage::store(std::uint32_t address, std::uint32_t value) { words_[index_of(address)] = value; }

std::uint32_t FlashImage::content_hash() const {
    uLong crc = crc32(0L, Z_NULL, 0);
    for (std::uint32_t w : words_) {
        const unsigned char bytes[4] = {static_cast<unsigned char>(w), static_cast<unsigned char>(w >> 8),
                                        static_cast<unsigned char>(w >> 16), static_cast<unsigned char>(w >> 24)};
        crc = crc32(crc, bytes, 4);
    }
    return static_cast<std::uint32_t>(crc);
}

// MemoryMap

MemoryMap::MemoryMap(std::vector<std::vector<ElementLocation>> weights,
                     std::vector<std::vector<ElementLocation>> biases, std::vector<ElementLocation> input,
                     bool inputs_in_flash)
    : weights_(std::move(weights)), biases_(std::move(biases)), input_(std::move(input)),
      inputs_in_flash_(inputs_in_flash) {
    require(weights_.size() == biases_.size(), "memory map layer count mismatch");
}

const std::vector<ElementLocation> &MemoryMap::weights(std::size_t layer) const {
    if (layer >= weights_.size())
        throw MappingError("no weight entries for layer " + std::to_string(layer));
    return weights_[layer];
}

const std::vector<ElementLocation> &MemoryMap::biases(std::size_t layer) const {
    if (layer >= biases_.size())
        throw MappingError("no bias entries for layer " + std::to_string(layer));
    return biases_[layer];
}

const ElementLocation &MemoryMap::locate(const ElementKey &key) const {
    const std::vector<ElementLocation> *v = nullptr;
    switch (key.region) {
    case Region::Weights:
        v = &weights(key.layer);
        break;
    case Region::Biases:
        v = &biases(key.layer);
        break;
    case Region::Input:
        v = &input_;
        break;
    }
    if (key.element >= v->size())
        throw MappingError("element " + std::to_string(key.element) + " of " + std::string(to_string(key.region)) +
                           " layer " + std::to_string(key.layer) + " is not mapped");
    return (*v)[key.element];
}

std::vector<std::pair<ElementKey, ElementLocation>> MemoryMap::entries() const {
    std::vector<std::pair<ElementKey, ElementLocation>> out;
    out.reserve(size());
    for (std::size_t l = 0; l < weights_.size(); ++l)
        for (std::size_t e = 0; e < weights_[l].size(); ++e)
            out.push_back({{Region::Weights, l, e}, weights_[l][e]});
    for (std::size_t l = 0; l < biases_.size(); ++l)
        for (std::size_t e = 0; e < biases_[l].size(); ++e)
            out.push_back({{Region::Biases, l, e}, biases_[l][e]});
    for (std::size_t e = 0; e < input_.size(); ++e)
        out.push_back({{Region::Input, 0, e}, input_[e]});
    return out;
}

std::size_t MemoryMap::size() const {
    std::size_t n = input_.size();
    for (std::size_t l = 0; l < weights_.size(); ++l)
        n += weights_[l].size() + biases_[l].size();
    return n;
}

void MemoryMap::check_injective() const {
    std::set<std::pair<std::uint32_t, unsigned>> used;
    for (const auto &[key, loc] : entries()) {
        require(loc.width == 8 || loc.width == 32, "element width must be 8 or 32");
        require(loc.bit_offset + loc.width <= 32, "element spans past its word");
        for (unsigned b = 0; b < loc.width; ++b)
            require(used.insert({loc.word_address, loc.bit_offset + b}).second,
                    "memory map entries overlap at " + hex32(loc.word_address));
    }
}

void MemoryMap::check_covers(const Model &model) const {
    require(weights_.size() == model.layers.size(), "memory map layer count does not match model");
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        require(weights_[l].size() == model.layers[l].weights_q.size(), "memory map misses weights");
        require(biases_[l].size() == model.layers[l].bias_q.size(), "memory map misses biases");
    }
    require(input_.size() == model.input_dim, "memory map misses input pixels");
}

// Faults

void FaultSpec::validate() const {
    require(bit <= 31, "fault bit index must be in [0,31]");
}

std::uint64_t ReadCounters::count(std::uint32_t address) const {
    const auto it = counts_.find(address);
    return it == counts_.end() ? 0 : it->second;
}

std::uint32_t read_word(const FlashImage &image, std::uint32_t address, std::span<const FaultSpec> active_faults,
                        ReadCounters &counters) {
    std::uint32_t value = image.stored(address);
    const std::uint64_t occurrence = counters.record(address);
    for (const auto &f : active_faults) {
        if (f.word_address != address)
            continue;
        f.validate();
        require(f.persistence == Persistence::TransientOnRead,
                "permanent faults must be applied to the image, not passed to reads");
        if (f.trigger.fires_on(occurrence))
            value = apply_fault<std::uint32_t>(value, f.kind, f.bit);
    }
    return value;
}

void apply_permanent_fault(FlashImage &image, std::uint32_t address, unsigned bit, FaultKind kind) {
    require(bit <= 31, "fault bit index must be in [0,31]");
    image.store(address, apply_fault<std::uint32_t>(image.stored(address), kind, bit));
}

void apply_permanent_fault(FlashImage &image, const FaultSpec &fault) {
    apply_permanent_fault(image, fault.word_address, fault.bit, fault.kind);
}

// Packing

namespace {

void put_byte(std::vector<std::uint32_t> &words, std::size_t byte_index, std::uint8_t value) {
    const std::size_t w = byte_index / 4;
    if (w >= words.size())
        words.resize(w + 1, 0);
    words[w] |= static_cast<std::uint32_t>(value) << (8 * (byte_index % 4));
}

} // namespace

FlashImage make_input_buffer(std::span<const std::uint8_t> pixels) {
    std::vector<std::uint32_t> words((pixels.size() + 3) / 4, 0);
    for (std::size_t i = 0; i < pixels.size(); ++i)
        put_byte(words, i, pixels[i]);
    return FlashImage(kSramBase, std::move(words));
}

PackedModel pack_model(const Model &model, bool inputs_in_flash, const InputImage *input) {
    model.validate();
    if (input != nullptr)
        require(input->pixels.size() == model.input_dim, "input dimension does not match model");

    std::vector<std::uint32_t> words;
    std::vector<std::vector<ElementLocation>> wmap(model.layers.size()), bmap(model.layers.size());
    std::vector<ElementLocation> imap;

    std::size_t byte = 0;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        for (std::int8_t q : model.layers[l].weights_q) {
            put_byte(words, byte, static_cast<std::uint8_t>(q));
            wmap[l].push_back({kFlashBase + static_cast<std::uint32_t>(4 * (byte / 4)),
                               static_cast<unsigned>(8 * (byte % 4)), 8});
            ++byte;
        }
    }
    words.resize((byte + 3) / 4, 0);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        for (std::int32_t b : model.layers[l].bias_q) {
            bmap[l].push_back({kFlashBase + static_cast<std::uint32_t>(4 * words.size()), 0, 32});
            words.push_back(static_cast<std::uint32_t>(b));
        }
    }
    if (inputs_in_flash) {
        const std::size_t start = words.size();
        words.resize(start + (model.input_dim + 3) / 4, 0);
        for (std::size_t i = 0; i < model.input_dim; ++i) {
            const std::size_t b = 4 * start + i;
            if (input != nullptr)
                put_byte(words, b, input->pixels[i]);
            imap.push_back({kFlashBase + static_cast<std::uint32_t>(4 * (b / 4)), static_cast<unsigned>(8 * (b % 4)),
                            8});
        }
    } else {
        for (std::size_t i = 0; i < model.input_dim; ++i)
            imap.push_back({kSramBase + static_cast<std::uint32_t>(4 * (i / 4)), static_cast<unsigned>(8 * (i % 4)), 8});
    }

    PackedModel out{FlashImage(kFlashBase, std::move(words)),
                    MemoryMap(std::move(wmap), std::move(bmap), std::move(imap), inputs_in_flash)};
    return out;
}

Model unpack_model(const FlashImage &flash, const MemoryMap &map, const Model &layout) {
    map.check_covers(layout);
    Model m = layout;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        auto &layer = m.layers[l];
        const auto &wl = map.weights(l);
        for (std::size_t e = 0; e < wl.size(); ++e)
            layer.weights_q[e] = static_cast<std::int8_t>(static_cast<std::uint8_t>(extract(flash.stored(wl[e].word_address), wl[e])));
        const auto &bl = map.biases(l);
        for (std::size_t e = 0; e < bl.size(); ++e)
            layer.bias_q[e] = static_cast<std::int32_t>(extract(flash.stored(bl[e].word_address), bl[e]));
    }
    return m;
}

std::vector<std::uint8_t> unpack_input(const FlashImage &flash, const MemoryMap &map) {
    require(map.inputs_in_flash(), "inputs are not stored in flash");
    std::vector<std::uint8_t> px;
    px.reserve(map.input().size());
    for (const auto &loc : map.input())
        px.push_back(static_cast<std::uint8_t>(extract(flash.stored(loc.word_address), loc)));
    return px;
}

FaultSpec fault_for_element(const MemoryMap &map, const ElementKey &key, unsigned element_bit, FaultKind kind,
                            Persistence persistence, Trigger trigger) {
    const auto &loc = map.locate(key);
    require(element_bit < loc.width, "bit index exceeds element width");
    return FaultSpec{kind, loc.word_address, loc.bit_offset + element_bit, persistence, trigger};
}

// Reader

FaultedReader::FaultedReader(const FlashImage &flash, const MemoryMap &map, std::vector<FaultSpec> faults)
    : flash_(&flash), map_(&map), faults_(std::move(faults)) {
    for (const auto &f : faults_) {
        f.validate();
        require(f.persistence == Persistence::TransientOnRead,
                "permanent faults must be applied to the flash image before reading");
    }
}

FetchedParams FaultedReader::fetch(const Model &model, const InputImage &input) {
    map_->check_covers(model);
    require(input.pixels.size() == model.input_dim, "input dimension does not match model");

    // Every flash word is fetched exactly once per inference.
    std::vector<std::uint32_t> flash_values(flash_->word_count());
    for (std::size_t i = 0; i < flash_values.size(); ++i)
        flash_values[i] = read_word(*flash_, flash_->address_of(i), faults_, counters_);
    const auto from_flash = [&](const ElementLocation &loc) {
        if (!flash_->contains(loc.word_address))
            throw MappingError("memory map points outside the flash image");
        return extract(flash_values[(loc.word_address - flash_->base_address()) / 4], loc);
    };

    FetchedParams p;
    p.weights.resize(model.layers.size());
    p.biases.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto &wl = map_->weights(l);
        p.weights[l].resize(wl.size());
        for (std::size_t e = 0; e < wl.size(); ++e)
            p.weights[l][e] = static_cast<std::int8_t>(static_cast<std::uint8_t>(from_flash(wl[e])));
        const auto &bl = map_->biases(l);
        p.biases[l].resize(bl.size());
        for (std::size_t e = 0; e < bl.size(); ++e)
            p.biases[l][e] = static_cast<std::int32_t>(from_flash(bl[e]));
    }

    p.pixels.resize(model.input_dim);
    if (map_->inputs_in_flash()) {
        for (std::size_t i = 0; i < model.input_dim; ++i)
            p.pixels[i] = static_cast<std::uint8_t>(from_flash(map_->input()[i]));
    } else {
        const FlashImage sram = make_input_buffer(input.pixels);
        std::vector<std::uint32_t> sram_values(sram.word_count());
        for (std::size_t i = 0; i < sram_values.size(); ++i)
            sram_values[i] = read_word(sram, sram.address_of(i), faults_, counters_);
        for (std::size_t i = 0; i < model.input_dim; ++i) {
            const auto &loc = map_->input()[i];
            if (!sram.contains(loc.word_address))
                throw MappingError("input map points outside the input buffer");
            p.pixels[i] = static_cast<std::uint8_t>(extract(sram_values[(loc.word_address - kSramBase) / 4], loc));
        }
    }
    return p;
}

FaultedReader faulted_reader(const FlashImage &flash, const MemoryMap &map, std::vector<FaultSpec> faults) {
    return FaultedReader(flash, map, std::move(faults));
}

// Names

std::string_view to_string(Region region) {
    switch (region) {
    case Region::Weights:
        return "weights";
    case Region::Biases:
        return "biases";
    case Region::Input:
        return "input";
    }
    return "?";
}

Region parse_region(std::string_view text) {
    if (text == "weights")
        return Region::Weights;
    if (text == "biases")
        return Region::Biases;
    if (text == "input" || text == "inputs")
        return Region::Input;
    throw ContractViolation("unknown region '" + std::string(text) + "'");
}

std::string_view to_string(Persistence p) {
    return p == Persistence::Permanent ? "permanent" : "transient";
}

Persistence parse_persistence(std::string_view text) {
    if (text == "transient" || text == "TransientOnRead")
        return Persistence::TransientOnRead;
    if (text == "permanent" || text == "Permanent")
        return Persistence::Permanent;
    throw ContractViolation("unknown persistence '" + std::string(text) + "'");
}

} // namespace nnfl
