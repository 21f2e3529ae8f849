#pragma once

// Cochran sample-size planning and empirical estimation from a finite batch
// of telemetry delay samples.

#include "telsim/delay_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace telsim {

inline constexpr double kDefaultZ = 1.96;
inline constexpr double kDefaultAssumedProportion = 0.5;

struct CochranPlan {
    double z = kDefaultZ;
    double p_assumed = kDefaultAssumedProportion;
    double e = 0.0;
    std::uint64_t n0 = 0;
};

/// ceil(z^2 p (1-p) / e^2). Throws DomainError unless z > 0, p and e in (0,1).
std::uint64_t cochran_n(double z, double p_assumed, double e);

/// z * sqrt(p (1-p) / n0). Throws DomainError unless z > 0, p in (0,1), n0 >= 1.
double cochran_error(double z, double p_assumed, std::uint64_t n0);

CochranPlan plan_for_error(double z, double p_assumed, double e);
CochranPlan plan_for_samples(double z, double p_assumed, std::uint64_t n0);

struct SampleSet {
    std::string path_id;
    std::vector<double> delays_us;
    std::uint64_t seed = 0;

    bool operator==(const SampleSet&) const = default;

    double mean_us() const;
    double max_us() const;
};

/// Draws n0 delays from a stream seeded with `seed`. Throws DomainError if n0 == 0.
SampleSet collect_samples(const PathDelayModel& model, std::size_t n0, std::uint64_t seed,
                          std::string path_id = {});

/// Same, drawing from a caller-owned stream (the set records `seed` verbatim).
SampleSet collect_samples(const PathDelayModel& model, std::size_t n0, Engine& rng,
                          std::uint64_t seed, std::string path_id = {});

/// count(delay <= threshold) / n. Throws DomainError on an empty set.
double empirical_fraction_below(const SampleSet& samples, double threshold_us);

/// CSV: "# path_id=<id>", "# seed=<seed>", a "delay_us" header, one delay per row.
void write_sample_csv(std::ostream& out, const SampleSet& samples);
SampleSet read_sample_csv(std::istream& in);

} // namespace telsim
