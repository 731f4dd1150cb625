#include "nnfl/io/reports.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace nnfl::io {

std::string format_real(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string format_hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08X", v);
    return buf;
}

std::string scan_csv(std::span<const ScanRecord> records) {
    std::ostringstream out;
    out << "x_um,y_um,power_mw,read_hex,faulted_bits\n";
    for (const auto &r : records) {
        out << format_real(r.x_um) << ',' << format_real(r.y_um) << ',' << format_real(r.power_mw) << ','
            << format_hex32(r.read) << ',';
        for (std::size_t i = 0; i < r.faulted_bits.size(); ++i)
            out << (i ? ";" : "") << r.faulted_bits[i];
        out << '\n';
    }
    return out.str();
}

Json scan_json(std::span<const ScanRecord> records) {
    Json arr = Json::array();
    for (const auto &r : records)
        arr.push_back({{"x_um", r.x_um},
                       {"y_um", r.y_um},
                       {"power_mw", r.power_mw},
                       {"read_hex", format_hex32(r.read)},
                       {"faulted_bits", r.faulted_bits}});
    return arr;
}

std::string memory_map_csv(const MemoryMap &map) {
    std::ostringstream out;
    out << "region,layer,element,word_address,bit_offset,width\n";
    for (const auto &[k, loc] : map.entries())
        out << to_string(k.region) << ',' << k.layer << ',' << k.element << ',' << format_hex32(loc.word_address)
            << ',' << loc.bit_offset << ',' << loc.width << '\n';
    return out.str();
}

Json memory_map_json(const MemoryMap &map) {
    Json arr = Json::array();
    for (const auto &[k, loc] : map.entries())
        arr.push_back({{"region", to_string(k.region)},
                       {"layer", k.layer},
                       {"element", k.element},
                       {"word_address", format_hex32(loc.word_address)},
                       {"bit_offset", loc.bit_offset},
                       {"width", loc.width}});
    return {{"inputs_in_flash", map.inputs_in_flash()}, {"entries", arr}};
}

Json to_json(const BitFault &f) {
    return {{"region", to_string(f.region)},
            {"layer", f.layer},
            {"element", f.element},
            {"bit", f.bit},
            {"kind", to_string(f.kind)}};
}

Json to_json(const AttackResult &r) {
    Json faults = Json::array();
    for (const auto &f : r.faults)
        faults.push_back(to_json(f));
    Json j{{"success", r.success},
           {"faults", faults},
           {"label_before", r.label_before},
           {"label_after", r.label_after},
           {"prob_before", r.prob_before},
           {"prob_after", r.prob_after},
           {"queries", r.queries},
           {"verified", r.verified}};
    j["target"] = r.target ? Json(*r.target) : Json(nullptr);
    return j;
}

Json onebit_json(std::span<const OneBitImageRecord> records, const ExistenceMetric *existence) {
    Json imgs = Json::array();
    for (const auto &rec : records) {
        Json succ = Json::array();
        for (const auto &s : rec.attack.successes)
            succ.push_back(to_json(s));
        Json j{{"image", rec.image},
               {"pixels", rec.pixels},
               {"selection_complete", rec.selection_complete},
               {"de_queries", rec.de_queries},
               {"attack_queries", rec.attack.queries},
               {"successes", succ}};
        j["oracle_successes"] = rec.oracle_successes ? Json(*rec.oracle_successes) : Json(nullptr);
        imgs.push_back(std::move(j));
    }
    Json out{{"images", imgs}};
    if (existence)
        out["existence"] = {{"images", existence->images},
                            {"eligible", existence->eligible},
                            {"vulnerable", existence->vulnerable},
                            {"total_faults", existence->total_faults},
                            {"fraction", existence->fraction()}};
    return out;
}

std::string onebit_csv(std::span<const OneBitImageRecord> records) {
    std::ostringstream out;
    out << "image,pixel,bit,kind,label_before,label_after,prob_before,prob_after,verified\n";
    for (const auto &rec : records)
        for (const auto &s : rec.attack.successes)
            for (const auto &f : s.faults)
                out << rec.image << ',' << f.element << ',' << f.bit << ',' << to_string(f.kind) << ','
                    << s.label_before << ',' << s.label_after << ',' << format_real(s.prob_before) << ','
                    << format_real(s.prob_after) << ',' << (s.verified ? "true" : "false") << '\n';
    return out.str();
}

Json bfa_json(const BFAResult &r) {
    Json flips = Json::array();
    for (const auto &f : r.flips)
        flips.push_back({{"fault", to_json(f.fault)},
                         {"old_q", f.old_q},
                         {"new_q", f.new_q},
                         {"loss_before", f.loss_before},
                         {"loss_after", f.loss_after},
                         {"accuracy_after", f.accuracy_after}});
    return {{"status", r.status},
            {"accuracy_before", r.accuracy_before},
            {"accuracy_after", r.accuracy_after},
            {"flips", flips}};
}

std::string bfa_csv(const BFAResult &r) {
    std::ostringstream out;
    out << "step,layer,element,bit,old_q,new_q,loss_before,loss_after,accuracy_after\n";
    for (std::size_t i = 0; i < r.flips.size(); ++i) {
        const auto &f = r.flips[i];
        out << i + 1 << ',' << f.fault.layer << ',' << f.fault.element << ',' << f.fault.bit << ',' << f.old_q << ','
            << f.new_q << ',' << format_real(f.loss_before) << ',' << format_real(f.loss_after) << ','
            << format_real(f.accuracy_after) << '\n';
    }
    return out.str();
}

namespace {

Json change_json(const ParameterChange &c) {
    return {{"region", to_string(c.region)},
            {"layer", c.layer},
            {"element", c.element},
            {"old_value", c.old_value},
            {"new_value", c.new_value}};
}

Json faults_json(const std::vector<BitFault> &faults) {
    Json arr = Json::array();
    for (const auto &f : faults)
        arr.push_back(to_json(f));
    return arr;
}

} // namespace

Json sba_json(const SBAResult &r, std::size_t target) {
    return {{"target", target},
            {"success", r.success},
            {"status", r.status},
            {"change", change_json(r.change)},
            {"success_rate", r.success_rate},
            {"evaluations", r.evaluations},
            {"faults", faults_json(r.faults())}};
}

std::string sba_csv(const SBAResult &r, std::size_t target) {
    std::ostringstream out;
    out << "target,success,status,layer,element,old_value,new_value,success_rate,evaluations\n";
    out << target << ',' << (r.success ? "true" : "false") << ',' << r.status << ',' << r.change.layer << ','
        << r.change.element << ',' << r.change.old_value << ',' << r.change.new_value << ','
        << format_real(r.success_rate) << ',' << r.evaluations << '\n';
    return out.str();
}

Json gda_json(const GDAResult &r, std::size_t image, std::size_t target, bool verified) {
    Json changes = Json::array();
    for (const auto &c : r.changes)
        changes.push_back(change_json(c));
    return {{"image", image},
            {"target", target},
            {"success", r.success},
            {"status", r.status},
            {"verified", verified},
            {"keep_k", r.keep_k},
            {"label_before", r.label_before},
            {"label_after", r.label_after},
            {"target_probability", r.target_probability},
            {"changes", changes},
            {"faults", faults_json(r.faults())}};
}

std::string gda_csv(const GDAResult &r) {
    std::ostringstream out;
    out << "region,layer,element,old_value,new_value\n";
    for (const auto &c : r.changes)
        out << to_string(c.region) << ',' << c.layer << ',' << c.element << ',' << c.old_value << ',' << c.new_value
            << '\n';
    return out.str();
}

Json campaign_json(const CampaignReport &r) {
    Json bits = Json::array();
    for (const auto &b : r.aggregates.bit_histogram)
        bits.push_back({{"bit", b.bit}, {"faults", b.faults}, {"mean_drop", b.mean_drop}});
    Json recs = Json::array();
    for (const auto &t : r.records) {
        Json faults = Json::array();
        for (const auto &f : t.faults)
            faults.push_back({{"layer", f.layer}, {"element", f.element}, {"bit", f.bit}});
        recs.push_back(
            {{"trial", t.trial}, {"seed", t.seed}, {"correct", t.correct}, {"accuracy", t.accuracy}, {"faults", faults}});
    }
    Json spec{{"surface", to_string(r.spec.surface)},
              {"kind", to_string(r.spec.kind)},
              {"persistence", to_string(r.spec.persistence)},
              {"faults_per_trial", r.spec.faults_per_trial},
              {"trials", r.spec.trials},
              {"seed", r.spec.seed}};
    spec["bit"] = r.spec.bit ? Json(*r.spec.bit) : Json(nullptr);
    return {{"spec", spec},
            {"samples", r.samples},
            {"baseline_accuracy", r.baseline_accuracy},
            {"aggregates",
             {{"mean_accuracy", r.aggregates.mean_accuracy},
              {"min_accuracy", r.aggregates.min_accuracy},
              {"degradation", r.aggregates.degradation},
              {"bit_histogram", bits}}},
            {"records", recs}};
}

std::string campaign_csv(const CampaignReport &r) {
    std::ostringstream out;
    out << "trial,seed,correct,accuracy,faults\n";
    for (const auto &t : r.records) {
        out << t.trial << ',' << t.seed << ',' << t.correct << ',' << format_real(t.accuracy) << ',';
        for (std::size_t i = 0; i < t.faults.size(); ++i)
            out << (i ? ";" : "") << t.faults[i].layer << ':' << t.faults[i].element << ':' << t.faults[i].bit;
        out << '\n';
    }
    return out.str();
}

std::string campaign_bits_csv(const CampaignReport &r) {
    std::ostringstream out;
    out << "bit,faults,mean_drop\n";
    for (const auto &b : r.aggregates.bit_histogram)
        out << b.bit << ',' << b.faults << ',' << format_real(b.mean_drop) << '\n';
    return out.str();
}

Json disable_json(const DisableCurve &c) {
    Json pts = Json::array();
    for (const auto &p : c.points)
        pts.push_back({{"fraction", p.fraction},
                       {"disabled", p.disabled},
                       {"mean_misclassification", p.mean_misclassification},
                       {"ci_low", p.ci_low},
                       {"ci_high", p.ci_high}});
    Json recs = Json::array();
    for (const auto &t : c.records)
        recs.push_back({{"fraction", t.fraction},
                        {"trial", t.trial},
                        {"neurons", t.neurons},
                        {"misclassification", t.misclassification}});
    Json j{{"layer", c.layer}, {"neurons", c.neurons}, {"samples", c.samples}, {"baseline_error", c.baseline_error}};
    j["threshold_fraction"] = c.threshold_fraction ? Json(*c.threshold_fraction) : Json(nullptr);
    j["points"] = pts;
    j["records"] = recs;
    return j;
}

std::string disable_csv(const DisableCurve &c) {
    std::ostringstream out;
    out << "fraction,disabled,mean_misclassification,ci_low,ci_high\n";
    for (const auto &p : c.points)
        out << format_real(p.fraction) << ',' << p.disabled << ',' << format_real(p.mean_misclassification) << ','
            << format_real(p.ci_low) << ',' << format_real(p.ci_high) << '\n';
    return out.str();
}

} // namespace nnfl::io
