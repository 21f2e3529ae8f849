#pragma once

// End-to-end delay of a path: a constant fibre propagation offset plus one
// independent exponential sojourn per traversed link (each link is an M/M/1
// queue whose total delay has mean E(X) / (1 - rho)).

#include "telsim/rng.hpp"
#include "telsim/topology.hpp"

#include <cstddef>
#include <vector>

namespace telsim {

/// Fibre propagation delay in silica.
inline constexpr double kPropagationUsPerKm = 5.0;

/// Stage means whose relative gap is below this are treated as one rate.
inline constexpr double kRateMergeTolerance = 1e-6;

struct PathDelayModel {
    double propagation_us = 0.0;
    std::vector<double> stage_means_us;

    bool operator==(const PathDelayModel&) const = default;

    double mean_us() const;
};

/// A run of identical exponential stages (an Erlang block).
struct ErlangBlock {
    double mean_us = 0.0;
    std::size_t stages = 0;
};

/// Throws DomainError unless the offset is finite and >= 0 and every stage
/// mean is finite and > 0 (and there is at least one stage).
void check_model(const PathDelayModel& model);

/// Stage means grouped into Erlang blocks, sorted by mean. Means within
/// kRateMergeTolerance (relative) of their neighbour are merged to the
/// group's average.
std::vector<ErlangBlock> erlang_blocks(const PathDelayModel& model);

/// Mean sojourn of an M/M/1 link: service_time / (1 - load).
double link_stage_mean_us(const LinkSpec& link);

PathDelayModel build_path_model(const Topology& topology, const PathSpec& path,
                                double us_per_km = kPropagationUsPerKm);

/// One end-to-end delay draw; always greater than the propagation offset.
double sample_delay(const PathDelayModel& model, Engine& rng);

/// P(delay <= t_us), exact hypoexponential CDF shifted by the offset.
double cdf(const PathDelayModel& model, double t_us);

/// Ground-truth fraction of packets at or under the threshold.
inline double fraction_below(const PathDelayModel& model, double threshold_us) {
    return cdf(model, threshold_us);
}

/// Inverse CDF by bisection; p must lie in (0,1).
double quantile(const PathDelayModel& model, double p);

struct Calibration {
    PathDelayModel model;
    std::size_t hops = 0;
    double achieved_fraction = 0.0;
};

/// Fits an equal-stage model with 1..max_hops stages that shares
/// `total_queue_mean_us` and whose cdf(threshold) is closest to the target.
/// Throws InfeasibleError if the best fit misses by more than `tolerance`.
Calibration calibrate_path(double offset_us, double total_queue_mean_us, double threshold_us,
                           double target_fraction, std::size_t max_hops, double tolerance = 0.01);

} // namespace telsim
