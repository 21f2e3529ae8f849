#include "telsim/sampling.hpp"

#include "telsim/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

namespace telsim {

namespace {

void check_z_p(double z, double p_assumed) {
    if (!(std::isfinite(z) && z > 0.0)) throw DomainError("z must be > 0");
    if (!(p_assumed > 0.0 && p_assumed < 1.0)) throw DomainError("assumed proportion must lie in (0,1)");
}

} // namespace

std::uint64_t cochran_n(double z, double p_assumed, double e) {
    check_z_p(z, p_assumed);
    if (!(e > 0.0 && e < 1.0)) throw DomainError("margin of error must lie in (0,1)");
    const double n = z * z * p_assumed * (1.0 - p_assumed) / (e * e);
    // Values like 400.00000000000006 come from rounding in z*z, not from the formula.
    const double nearest = std::round(n);
    if (std::abs(n - nearest) <= 1e-9 * nearest) return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(nearest));
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(n)));
}

double cochran_error(double z, double p_assumed, std::uint64_t n0) {
    check_z_p(z, p_assumed);
    if (n0 == 0) throw DomainError("sample count must be >= 1");
    return z * std::sqrt(p_assumed * (1.0 - p_assumed) / static_cast<double>(n0));
}

CochranPlan plan_for_error(double z, double p_assumed, double e) {
    return {z, p_assumed, e, cochran_n(z, p_assumed, e)};
}

CochranPlan plan_for_samples(double z, double p_assumed, std::uint64_t n0) {
    return {z, p_assumed, cochran_error(z, p_assumed, n0), n0};
}

double SampleSet::mean_us() const {
    if (delays_us.empty()) return 0.0;
    return std::accumulate(delays_us.begin(), delays_us.end(), 0.0) / static_cast<double>(delays_us.size());
}

double SampleSet::max_us() const {
    return delays_us.empty() ? 0.0 : *std::max_element(delays_us.begin(), delays_us.end());
}

SampleSet collect_samples(const PathDelayModel& model, std::size_t n0, Engine& rng,
                          std::uint64_t seed, std::string path_id) {
    if (n0 == 0) throw DomainError("sample count must be >= 1");
    SampleSet set{std::move(path_id), {}, seed};
    set.delays_us.reserve(n0);
    for (std::size_t i = 0; i < n0; ++i) set.delays_us.push_back(sample_delay(model, rng));
    return set;
}

SampleSet collect_samples(const PathDelayModel& model, std::size_t n0, std::uint64_t seed,
                          std::string path_id) {
    Engine rng(seed);
    return collect_samples(model, n0, rng, seed, std::move(path_id));
}

double empirical_fraction_below(const SampleSet& samples, double threshold_us) {
    if (samples.delays_us.empty()) throw DomainError("empty sample set");
    const auto hits = std::count_if(samples.delays_us.begin(), samples.delays_us.end(),
                                    [&](double d) { return d <= threshold_us; });
    return static_cast<double>(hits) / static_cast<double>(samples.delays_us.size());
}

void write_sample_csv(std::ostream& out, const SampleSet& samples) {
    out << "# path_id=" << samples.path_id << '\n';
    out << "# seed=" << samples.seed << '\n';
    out << "delay_us\n";
    for (double d : samples.delays_us) out << fmt::format("{}\n", d);
}

SampleSet read_sample_csv(std::istream& in) {
    SampleSet set;
    std::string line;
    bool header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("# path_id=", 0) == 0) {
            set.path_id = line.substr(10);
        } else if (line.rfind("# seed=", 0) == 0) {
            const auto text = line.substr(7);
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), set.seed);
            if (ec != std::errc{} || ptr != text.data() + text.size()) {
                throw ParseError(fmt::format("line {}: bad seed '{}'", line_no, text));
            }
        } else if (line == "delay_us") {
            header = true;
        } else {
            if (!header) throw ParseError(fmt::format("line {}: data before 'delay_us' header", line_no));
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
            if (ec != std::errc{} || ptr != line.data() + line.size()) {
                throw ParseError(fmt::format("line {}: bad delay '{}'", line_no, line));
            }
            if (!(value > 0.0)) throw ParseError(fmt::format("line {}: delay must be > 0", line_no));
            set.delays_us.push_back(value);
        }
    }
    if (!header) throw ParseError("missing 'delay_us' header");
    return set;
}

} // namespace telsim
