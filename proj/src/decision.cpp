#include "telsim/decision.hpp"

#include "telsim/errors.hpp"
#include "telsim/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace telsim {

void ComplianceRule::validate() const {
    if (!(std::isfinite(threshold_us) && threshold_us > 0.0)) throw DomainError("threshold must be > 0");
    if (!(required_fraction > 0.0 && required_fraction < 1.0)) {
        throw DomainError("required fraction must lie in (0,1)");
    }
}

ComplianceVerdict classify(const SampleSet& samples, const ComplianceRule& rule) {
    const double fraction = empirical_fraction_below(samples, rule.threshold_us);
    return {samples.path_id, fraction, fraction >= rule.required_fraction};
}

bool ground_truth(const PathDelayModel& model, const ComplianceRule& rule) {
    return fraction_below(model, rule.threshold_us) >= rule.required_fraction;
}

std::string_view to_string(TieBreak tie) {
    switch (tie) {
    case TieBreak::Random:
        return "random";
    case TieBreak::LowestMean:
        return "lowest-mean";
    case TieBreak::LowestMax:
        return "lowest-max";
    case TieBreak::First:
        return "first";
    }
    return "random";
}

std::optional<TieBreak> parse_tie_break(std::string_view text) {
    for (auto tie : {TieBreak::Random, TieBreak::LowestMean, TieBreak::LowestMax, TieBreak::First}) {
        if (text == to_string(tie)) return tie;
    }
    return std::nullopt;
}

std::size_t select_best_path(std::span<const SampleSet> sets, const ComplianceRule& rule, TieBreak tie) {
    if (sets.empty()) throw DomainError("no candidate paths");

    std::vector<double> fractions;
    fractions.reserve(sets.size());
    for (const auto& s : sets) fractions.push_back(empirical_fraction_below(s, rule.threshold_us));
    const double best = *std::max_element(fractions.begin(), fractions.end());

    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (fractions[i] == best) tied.push_back(i);
    }
    if (tied.size() == 1) return tied.front();

    auto argmin_by = [&](auto key) {
        std::size_t pick = tied.front();
        double lowest = key(sets[pick]);
        for (std::size_t i : tied) {
            const double v = key(sets[i]);
            if (v < lowest) {
                lowest = v;
                pick = i;
            }
        }
        return pick;
    };

    switch (tie) {
    case TieBreak::First:
        return tied.front();
    case TieBreak::LowestMean:
        return argmin_by([](const SampleSet& s) { return s.mean_us(); });
    case TieBreak::LowestMax:
        return argmin_by([](const SampleSet& s) { return s.max_us(); });
    case TieBreak::Random: {
        std::uint64_t h = fnv1a64("tie-break");
        for (std::size_t i : tied) h = mix_seed(h, {sets[i].seed, i});
        Engine coin(h);
        const auto slot = static_cast<std::size_t>(open_uniform(coin) * static_cast<double>(tied.size()));
        return tied[std::min(slot, tied.size() - 1)];
    }
    }
    return tied.front();
}

std::string_view to_string(ConfusionClass cls) {
    switch (cls) {
    case ConfusionClass::TruePositive:
        return "TP";
    case ConfusionClass::TrueNegative:
        return "TN";
    case ConfusionClass::FalsePositive:
        return "FP";
    case ConfusionClass::FalseNegative:
        return "FN";
    }
    return "TN";
}

ConfusionClass classify_outcome(bool truth, bool decision) {
    if (decision) return truth ? ConfusionClass::TruePositive : ConfusionClass::FalsePositive;
    return truth ? ConfusionClass::FalseNegative : ConfusionClass::TrueNegative;
}

void ConfusionReport::add(std::string pair_id, bool truth, bool decision) {
    const auto outcome = classify_outcome(truth, decision);
    switch (outcome) {
    case ConfusionClass::TruePositive:
        ++tp;
        break;
    case ConfusionClass::TrueNegative:
        ++tn;
        break;
    case ConfusionClass::FalsePositive:
        ++fp;
        break;
    case ConfusionClass::FalseNegative:
        ++fn;
        break;
    }
    records.push_back({std::move(pair_id), truth, decision, outcome});
}

std::string ConfusionReport::summary() const {
    return fmt::format("fp={},fn={},tp={},tn={}", fp, fn, tp, tn);
}

ConfusionReport confusion(std::span<const ComplianceVerdict> verdicts, std::span<const bool> truths) {
    if (verdicts.size() != truths.size()) {
        throw std::invalid_argument(
            fmt::format("{} verdicts but {} truth labels", verdicts.size(), truths.size()));
    }
    ConfusionReport report;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        report.add(verdicts[i].path_id, truths[i], verdicts[i].compliant);
    }
    return report;
}

void write_confusion_csv(std::ostream& out, const ConfusionReport& report) {
    out << "pair_id,truth,decision,class\n";
    for (const auto& r : report.records) {
        out << fmt::format("{},{},{},{}\n", r.pair_id, r.truth ? 1 : 0, r.decision ? 1 : 0, to_string(r.outcome));
    }
}

ConfusionReport read_confusion_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "pair_id,truth,decision,class") {
        throw ParseError("confusion CSV: missing header");
    }
    auto parse_bool = [](const std::string& field, std::size_t line_no) {
        if (field == "1") return true;
        if (field == "0") return false;
        throw ParseError(fmt::format("confusion CSV line {}: bad boolean '{}'", line_no, field));
    };

    ConfusionReport report;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 4) throw ParseError(fmt::format("confusion CSV line {}: expected 4 fields", line_no));
        const bool truth = parse_bool(fields[1], line_no);
        const bool decision = parse_bool(fields[2], line_no);
        report.add(fields[0], truth, decision);
        if (to_string(report.records.back().outcome) != fields[3]) {
            throw ParseError(fmt::format("confusion CSV line {}: class '{}' disagrees with labels", line_no, fields[3]));
        }
    }
    return report;
}

} // namespace telsim
