#pragma once

// Seeded Monte Carlo experiments: path selection frequencies, compliance
// heatmaps over every ACO/MACO pair, and Cochran error tables.
//
// Every (experiment, sample size, path, trial) draws from its own stream,
// seeded by mix_seed(master, {tag, n0, path, trial}); results are assembled
// by index, so they are bit-identical for any worker count.

#include "telsim/decision.hpp"
#include "telsim/delay_model.hpp"
#include "telsim/topology.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace telsim {

struct ExperimentConfig {
    std::uint64_t master_seed = 1;
    std::size_t trials = 10000;
    std::vector<std::size_t> sample_sizes{5, 10, 50, 100, 400};
    ComplianceRule rule{};
    TieBreak tie_break = TieBreak::Random;
    std::size_t workers = 1;

    /// Throws DomainError: trials/workers >= 1, sizes nonempty, positive, strictly increasing.
    void validate() const;
};

/// Seed of the stream that serves one (experiment, n0, path, trial) cell.
std::uint64_t trial_seed(std::uint64_t master, std::string_view tag, std::size_t n0,
                         std::size_t path_index, std::size_t trial);

/// Runs body(i) for i in [0, count) on `workers` threads. Exceptions are rethrown.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body);

struct SelectionResult {
    std::vector<std::size_t> sample_sizes;
    std::vector<std::string> path_ids;
    std::size_t trials = 0;
    /// counts[size_index][path_index]
    std::vector<std::vector<std::size_t>> counts;

    double frequency(std::size_t size_index, std::size_t path_index) const;
    std::vector<double> frequencies(std::size_t size_index) const;

    bool operator==(const SelectionResult&) const = default;
};

/// Requires at least two models. `path_ids` defaults to "path1", "path2", ...
SelectionResult run_selection(std::span<const PathDelayModel> models, const ExperimentConfig& config,
                              std::vector<std::string> path_ids = {});

struct HeatmapCell {
    std::string aco;
    std::string maco;
    double true_fraction = 0.0;
    bool truth = false;
    double empirical_fraction = 0.0;
    bool decision = false;
    ConfusionClass outcome = ConfusionClass::TrueNegative;

    bool operator==(const HeatmapCell&) const = default;
};

struct HeatmapResult {
    std::size_t n0 = 0;
    std::vector<std::string> acos;
    std::vector<std::string> macos;
    /// Row-major: cells[aco_index * macos.size() + maco_index].
    std::vector<HeatmapCell> cells;
    ConfusionReport report;

    const HeatmapCell& at(std::size_t aco_index, std::size_t maco_index) const {
        return cells[aco_index * macos.size() + maco_index];
    }

    bool operator==(const HeatmapResult&) const = default;
};

/// One HeatmapResult per configured sample size (config.trials is unused).
std::vector<HeatmapResult> run_heatmap(const Topology& topology, const ExperimentConfig& config);

struct ErrorRow {
    std::uint64_t n0 = 0;
    double e = 0.0;
};

std::vector<ErrorRow> run_error_table(double z, double p_assumed, std::span<const std::uint64_t> sample_sizes);

// CSV schemas:
//   selection: n0,path_index,path_id,count,frequency
//   heatmap:   aco,maco,true_fraction,truth,empirical_fraction,decision,class
//   errors:    n0,e
void write_selection_csv(std::ostream& out, const SelectionResult& result);
SelectionResult read_selection_csv(std::istream& in);
void write_heatmap_csv(std::ostream& out, const HeatmapResult& result);
HeatmapResult read_heatmap_csv(std::istream& in, std::size_t n0);
void write_error_csv(std::ostream& out, std::span<const ErrorRow> rows);

} // namespace telsim
