#pragma once

// Control-plane decisions taken from telemetry samples, and their scoring
// against the analytic delay distribution.

#include "telsim/delay_model.hpp"
#include "telsim/sampling.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace telsim {

/// A path complies when at least `required_fraction` of its delays are <= threshold.
struct ComplianceRule {
    double threshold_us = 82.0;
    double required_fraction = 0.99;

    /// Throws DomainError unless threshold > 0 and 0 < required_fraction < 1.
    void validate() const;
};

struct ComplianceVerdict {
    std::string path_id;
    double empirical_fraction = 0.0;
    bool compliant = false;
};

ComplianceVerdict classify(const SampleSet& samples, const ComplianceRule& rule);

/// fraction_below(model, threshold) >= required_fraction.
bool ground_truth(const PathDelayModel& model, const ComplianceRule& rule);

/// How select_best_path breaks ties between equal empirical fractions.
enum class TieBreak {
    Random,     ///< fair choice among the tied sets, seeded from their seeds
    LowestMean, ///< smaller empirical mean delay
    LowestMax,  ///< smaller worst observed delay
    First,      ///< lowest index
};

std::string_view to_string(TieBreak tie);
std::optional<TieBreak> parse_tie_break(std::string_view text);

/// Index of the set with the largest empirical fraction under the threshold.
/// Deterministic for fixed inputs. Throws DomainError on empty input.
std::size_t select_best_path(std::span<const SampleSet> sets, const ComplianceRule& rule,
                             TieBreak tie = TieBreak::Random);

enum class ConfusionClass { TruePositive, TrueNegative, FalsePositive, FalseNegative };

std::string_view to_string(ConfusionClass cls);
ConfusionClass classify_outcome(bool truth, bool decision);

struct ConfusionRecord {
    std::string pair_id;
    bool truth = false;
    bool decision = false;
    ConfusionClass outcome = ConfusionClass::TrueNegative;

    bool operator==(const ConfusionRecord&) const = default;
};

/// Positive class is "declared compliant".
struct ConfusionReport {
    std::vector<ConfusionRecord> records;
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    void add(std::string pair_id, bool truth, bool decision);
    std::size_t errors() const { return fp + fn; }
    std::string summary() const;

    bool operator==(const ConfusionReport&) const = default;
};

/// Throws std::invalid_argument when the lists differ in length.
ConfusionReport confusion(std::span<const ComplianceVerdict> verdicts, std::span<const bool> truths);

/// CSV columns: pair_id,truth,decision,class
void write_confusion_csv(std::ostream& out, const ConfusionReport& report);
ConfusionReport read_confusion_csv(std::istream& in);

} // namespace telsim
