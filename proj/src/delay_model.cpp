#include "telsim/delay_model.hpp"

#include "telsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace telsim {

double PathDelayModel::mean_us() const {
    return propagation_us + std::accumulate(stage_means_us.begin(), stage_means_us.end(), 0.0);
}

void check_model(const PathDelayModel& model) {
    if (!(std::isfinite(model.propagation_us) && model.propagation_us >= 0.0)) {
        throw DomainError("propagation offset must be finite and >= 0");
    }
    if (model.stage_means_us.empty()) throw DomainError("delay model needs at least one stage");
    for (double m : model.stage_means_us) {
        if (!(std::isfinite(m) && m > 0.0)) throw DomainError("stage means must be finite and > 0");
    }
}

std::vector<ErlangBlock> erlang_blocks(const PathDelayModel& model) {
    std::vector<double> means = model.stage_means_us;
    std::sort(means.begin(), means.end());

    std::vector<ErlangBlock> blocks;
    std::size_t first = 0;
    for (std::size_t i = 1; i <= means.size(); ++i) {
        const bool closes = i == means.size() ||
                            (means[i] - means[i - 1]) > kRateMergeTolerance * means[i];
        if (!closes) continue;
        const std::size_t count = i - first;
        double mean = means[first];
        if (means[i - 1] != means[first]) {
            mean = std::accumulate(means.begin() + first, means.begin() + i, 0.0) / count;
        }
        blocks.push_back({mean, count});
        first = i;
    }
    return blocks;
}

double link_stage_mean_us(const LinkSpec& link) {
    return link.mean_service_time_us / (1.0 - link.load);
}

PathDelayModel build_path_model(const Topology& topology, const PathSpec& path, double us_per_km) {
    PathDelayModel model;
    double length_km = 0.0;
    for (const auto& id : path.link_ids) {
        const LinkSpec* link = topology.find_link(id);
        if (link == nullptr) throw RoutingError("unknown link '" + id + "'");
        length_km += link->length_km;
        model.stage_means_us.push_back(link_stage_mean_us(*link));
    }
    if (model.stage_means_us.empty()) throw RoutingError("path " + path.id() + " has no links");
    model.propagation_us = us_per_km * length_km;
    return model;
}

double sample_delay(const PathDelayModel& model, Engine& rng) {
    double total = model.propagation_us;
    for (double mean : model.stage_means_us) total += exponential(rng, mean);
    return total;
}

namespace {

double log_poisson(std::size_t n, double lambda) {
    const double dn = static_cast<double>(n);
    if (lambda == 0.0) return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return -lambda + dn * std::log(lambda) - std::lgamma(dn + 1.0);
}

std::size_t poisson_horizon(double lambda) {
    return static_cast<std::size_t>(std::ceil(lambda + 12.0 * std::sqrt(lambda) + 40.0));
}

// P(Erlang(k, rate) <= x) = P(Poisson(rate * x) >= k).
double erlang_cdf(std::size_t k, double mean, double x) {
    const double lambda = x / mean;
    if (lambda < static_cast<double>(k)) {
        // Upper Poisson tail summed directly; keeps relative accuracy for small x.
        double sum = 0.0;
        const std::size_t end = std::max(k, poisson_horizon(lambda));
        for (std::size_t n = k; n <= end; ++n) sum += std::exp(log_poisson(n, lambda));
        return std::min(sum, 1.0);
    }
    double head = 0.0;
    for (std::size_t n = 0; n < k; ++n) head += std::exp(log_poisson(n, lambda));
    return std::clamp(1.0 - head, 0.0, 1.0);
}

// Uniformisation of the series phase-type chain: with Lambda = max rate,
// F(x) = sum_n Poisson(n; Lambda x) * P(absorbed within n jumps of the
// embedded chain). All terms are nonnegative, so equal and near-equal rates
// need no special casing. The survival sum is accumulated alongside and used
// in the upper half, where 1 - F is the better-conditioned quantity.
double phase_type_cdf(const std::vector<double>& rates, double x) {
    const double top = *std::max_element(rates.begin(), rates.end());
    const double lambda = top * x;
    const std::size_t k = rates.size();

    std::vector<double> advance(k);
    for (std::size_t i = 0; i < k; ++i) advance[i] = rates[i] / top;

    std::vector<double> mass(k, 0.0);
    mass[0] = 1.0;
    double absorbed = 0.0;
    double below = 0.0;
    double above = 0.0;

    const std::size_t horizon = poisson_horizon(lambda);
    for (std::size_t n = 0; n <= horizon; ++n) {
        const double weight = std::exp(log_poisson(n, lambda));
        below += weight * absorbed;
        above += weight * std::accumulate(mass.begin(), mass.end(), 0.0);
        // One jump of the embedded chain, back to front so mass moves once.
        absorbed += mass[k - 1] * advance[k - 1];
        for (std::size_t i = k - 1; i > 0; --i) {
            mass[i] = mass[i] * (1.0 - advance[i]) + mass[i - 1] * advance[i - 1];
        }
        mass[0] *= (1.0 - advance[0]);
    }
    const double result = below < 0.5 ? below : 1.0 - above;
    return std::clamp(result, 0.0, 1.0);
}

} // namespace

double cdf(const PathDelayModel& model, double t_us) {
    const double x = t_us - model.propagation_us;
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;

    const auto blocks = erlang_blocks(model);
    if (blocks.size() == 1) return erlang_cdf(blocks.front().stages, blocks.front().mean_us, x);

    std::vector<double> rates;
    for (const auto& b : blocks) rates.insert(rates.end(), b.stages, 1.0 / b.mean_us);
    return phase_type_cdf(rates, x);
}

double quantile(const PathDelayModel& model, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile probability must lie in (0,1)");
    check_model(model);

    const double total_mean = model.mean_us() - model.propagation_us;
    double lo = model.propagation_us;
    double span = total_mean;
    while (cdf(model, model.propagation_us + span) < p) span *= 2.0;
    double hi = model.propagation_us + span;

    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (cdf(model, mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Calibration calibrate_path(double offset_us, double total_queue_mean_us, double threshold_us,
                           double target_fraction, std::size_t max_hops, double tolerance) {
    if (!(std::isfinite(offset_us) && offset_us >= 0.0)) throw DomainError("offset must be >= 0");
    if (!(std::isfinite(total_queue_mean_us) && total_queue_mean_us > 0.0)) {
        throw DomainError("total queueing mean must be > 0");
    }
    if (!(threshold_us > offset_us)) throw DomainError("threshold must exceed the offset");
    if (!(target_fraction > 0.0 && target_fraction < 1.0)) {
        throw DomainError("target fraction must lie in (0,1)");
    }
    if (max_hops == 0) throw DomainError("max_hops must be >= 1");

    Calibration best;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= max_hops; ++k) {
        PathDelayModel candidate{offset_us,
                                 std::vector<double>(k, total_queue_mean_us / static_cast<double>(k))};
        const double achieved = cdf(candidate, threshold_us);
        const double gap = std::abs(achieved - target_fraction);
        if (gap < best_gap) {
            best_gap = gap;
            best = {std::move(candidate), k, achieved};
        }
    }
    if (best_gap > tolerance) {
        throw InfeasibleError("no equal-stage model with <= " + std::to_string(max_hops) +
                              " hops reaches fraction " + std::to_string(target_fraction) +
                              " (closest " + std::to_string(best.achieved_fraction) + " with " +
                              std::to_string(best.hops) + " hops)");
    }
    return best;
}

} // namespace telsim
