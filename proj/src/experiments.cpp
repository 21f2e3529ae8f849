#include "telsim/experiments.hpp"

#include "telsim/errors.hpp"
#include "telsim/rng.hpp"
#include "telsim/sampling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace telsim {

void ExperimentConfig::validate() const {
    if (trials == 0) throw DomainError("trials must be >= 1");
    if (workers == 0) throw DomainError("workers must be >= 1");
    if (sample_sizes.empty()) throw DomainError("at least one sample size is required");
    for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
        if (sample_sizes[i] == 0) throw DomainError("sample sizes must be >= 1");
        if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1]) {
            throw DomainError("sample sizes must be strictly increasing");
        }
    }
    rule.validate();
}

std::uint64_t trial_seed(std::uint64_t master, std::string_view tag, std::size_t n0,
                         std::size_t path_index, std::size_t trial) {
    return mix_seed(master, {fnv1a64(tag), n0, path_index, trial});
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = count;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

double SelectionResult::frequency(std::size_t size_index, std::size_t path_index) const {
    return static_cast<double>(counts.at(size_index).at(path_index)) / static_cast<double>(trials);
}

std::vector<double> SelectionResult::frequencies(std::size_t size_index) const {
    std::vector<double> out;
    for (std::size_t j = 0; j < path_ids.size(); ++j) out.push_back(frequency(size_index, j));
    return out;
}

SelectionResult run_selection(std::span<const PathDelayModel> models, const ExperimentConfig& config,
                              std::vector<std::string> path_ids) {
    config.validate();
    if (models.size() < 2) throw DomainError("selection needs at least two candidate paths");
    for (const auto& m : models) check_model(m);
    if (path_ids.empty()) {
        for (std::size_t j = 0; j < models.size(); ++j) path_ids.push_back(fmt::format("path{}", j + 1));
    }
    if (path_ids.size() != models.size()) throw DomainError("one path id per model is required");

    SelectionResult result;
    result.sample_sizes = config.sample_sizes;
    result.path_ids = std::move(path_ids);
    result.trials = config.trials;

    for (std::size_t n0 : config.sample_sizes) {
        std::vector<std::size_t> winner(config.trials);
        parallel_for(config.trials, config.workers, [&](std::size_t trial) {
            std::vector<SampleSet> sets;
            sets.reserve(models.size());
            for (std::size_t j = 0; j < models.size(); ++j) {
                const auto seed = trial_seed(config.master_seed, "selection", n0, j, trial);
                sets.push_back(collect_samples(models[j], n0, seed, result.path_ids[j]));
            }
            winner[trial] = select_best_path(sets, config.rule, config.tie_break);
        });

        std::vector<std::size_t> counts(models.size(), 0);
        for (std::size_t w : winner) ++counts[w];
        result.counts.push_back(std::move(counts));
    }
    return result;
}

std::vector<HeatmapResult> run_heatmap(const Topology& topology, const ExperimentConfig& config) {
    config.validate();
    const auto acos = topology.nodes_with_role(NodeRole::Aco);
    const auto macos = topology.nodes_with_role(NodeRole::Maco);
    if (acos.empty() || macos.empty()) throw DomainError("heatmap needs at least one ACO and one MACO");

    const auto pairs = all_pairs(topology);
    const std::size_t sizes = config.sample_sizes.size();

    // cells[size][pair]
    std::vector<std::vector<HeatmapCell>> cells(sizes, std::vector<HeatmapCell>(pairs.size()));
    parallel_for(pairs.size(), config.workers, [&](std::size_t p) {
        const auto& [aco, maco] = pairs[p];
        const PathSpec path = route(topology, aco, maco);
        const PathDelayModel model = build_path_model(topology, path);
        const double true_fraction = fraction_below(model, config.rule.threshold_us);
        const bool truth = true_fraction >= config.rule.required_fraction;

        for (std::size_t s = 0; s < sizes; ++s) {
            const std::size_t n0 = config.sample_sizes[s];
            const auto seed = trial_seed(config.master_seed, "heatmap", n0, p, 0);
            const auto verdict = classify(collect_samples(model, n0, seed, path.id()), config.rule);
            cells[s][p] = {aco,   maco, true_fraction, truth, verdict.empirical_fraction, verdict.compliant,
                           classify_outcome(truth, verdict.compliant)};
        }
    });

    std::vector<HeatmapResult> results;
    for (std::size_t s = 0; s < sizes; ++s) {
        HeatmapResult r;
        r.n0 = config.sample_sizes[s];
        r.acos = acos;
        r.macos = macos;
        r.cells = std::move(cells[s]);
        for (const auto& c : r.cells) r.report.add(c.aco + "->" + c.maco, c.truth, c.decision);
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<ErrorRow> run_error_table(double z, double p_assumed, std::span<const std::uint64_t> sample_sizes) {
    std::vector<ErrorRow> rows;
    for (auto n0 : sample_sizes) rows.push_back({n0, cochran_error(z, p_assumed, n0)});
    return rows;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

template <typename T>
T parse_field(const std::string& text, std::size_t line_no) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError(fmt::format("CSV line {}: bad numeric field '{}'", line_no, text));
    }
    return value;
}

bool parse_flag(const std::string& text, std::size_t line_no) {
    if (text == "1") return true;
    if (text == "0") return false;
    throw ParseError(fmt::format("CSV line {}: bad boolean '{}'", line_no, text));
}

void expect_header(std::istream& in, std::string_view header) {
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw ParseError(fmt::format("CSV: expected header '{}'", header));
    }
}

} // namespace

void write_selection_csv(std::ostream& out, const SelectionResult& result) {
    out << "n0,path_index,path_id,count,frequency\n";
    for (std::size_t s = 0; s < result.sample_sizes.size(); ++s) {
        for (std::size_t j = 0; j < result.path_ids.size(); ++j) {
            out << fmt::format("{},{},{},{},{}\n", result.sample_sizes[s], j, result.path_ids[j],
                               result.counts[s][j], result.frequency(s, j));
        }
    }
}

SelectionResult read_selection_csv(std::istream& in) {
    expect_header(in, "n0,path_index,path_id,count,frequency");
    SelectionResult result;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 5) throw ParseError(fmt::format("CSV line {}: expected 5 fields", line_no));
        const auto n0 = parse_field<std::size_t>(f[0], line_no);
        const auto j = parse_field<std::size_t>(f[1], line_no);
        if (result.sample_sizes.empty() || result.sample_sizes.back() != n0) {
            result.sample_sizes.push_back(n0);
            result.counts.emplace_back();
        }
        if (result.sample_sizes.size() == 1) result.path_ids.push_back(f[2]);
        if (j != result.counts.back().size() || j >= result.path_ids.size() || result.path_ids[j] != f[2]) {
            throw ParseError(fmt::format("CSV line {}: path rows out of order", line_no));
        }
        result.counts.back().push_back(parse_field<std::size_t>(f[3], line_no));
    }
    if (!result.counts.empty()) {
        for (auto c : result.counts.front()) result.trials += c;
    }
    return result;
}

void write_heatmap_csv(std::ostream& out, const HeatmapResult& result) {
    out << "aco,maco,true_fraction,truth,empirical_fraction,decision,class\n";
    for (const auto& c : result.cells) {
        out << fmt::format("{},{},{},{},{},{},{}\n", c.aco, c.maco, c.true_fraction, c.truth ? 1 : 0,
                           c.empirical_fraction, c.decision ? 1 : 0, to_string(c.outcome));
    }
}

HeatmapResult read_heatmap_csv(std::istream& in, std::size_t n0) {
    expect_header(in, "aco,maco,true_fraction,truth,empirical_fraction,decision,class");
    HeatmapResult result;
    result.n0 = n0;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 7) throw ParseError(fmt::format("CSV line {}: expected 7 fields", line_no));
        HeatmapCell c{f[0],
                      f[1],
                      parse_field<double>(f[2], line_no),
                      parse_flag(f[3], line_no),
                      parse_field<double>(f[4], line_no),
                      parse_flag(f[5], line_no),
                      ConfusionClass::TrueNegative};
        c.outcome = classify_outcome(c.truth, c.decision);
        if (to_string(c.outcome) != f[6]) {
            throw ParseError(fmt::format("CSV line {}: class '{}' disagrees with labels", line_no, f[6]));
        }
        if (std::find(result.acos.begin(), result.acos.end(), c.aco) == result.acos.end()) result.acos.push_back(c.aco);
        if (std::find(result.macos.begin(), result.macos.end(), c.maco) == result.macos.end()) {
            result.macos.push_back(c.maco);
        }
        result.report.add(c.aco + "->" + c.maco, c.truth, c.decision);
        result.cells.push_back(std::move(c));
    }
    if (result.cells.size() != result.acos.size() * result.macos.size()) {
        throw ParseError("heatmap CSV: rows do not form a full ACO x MACO grid");
    }
    return result;
}

void write_error_csv(std::ostream& out, std::span<const ErrorRow> rows) {
    out << "n0,e\n";
    for (const auto& r : rows) out << fmt::format("{},{}\n", r.n0, r.e);
}

} // namespace telsim
