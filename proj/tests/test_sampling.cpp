#include "telsim/errors.hpp"
#include "telsim/sampling.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace telsim;

namespace {
const PathDelayModel kBlue{44.0, std::vector<double>(3, 19.0 / 3.0)};
}

TEST_CASE("cochran_error reproduces the published margins") {
    CHECK(std::round(cochran_error(1.96, 0.5, 10) * 1e4) / 1e4 == 0.3099);
    CHECK(std::round(cochran_error(1.96, 0.5, 50) * 1e4) / 1e4 == 0.1386);
    CHECK(std::round(cochran_error(1.96, 0.5, 400) * 1e4) / 1e4 == 0.0490);
    CHECK(cochran_error(1.0, 0.5, 1) == 0.5);
    CHECK(cochran_error(1.96, 0.5, 1) == doctest::Approx(0.98));

    CHECK_THROWS_AS(cochran_error(0.0, 0.5, 10), DomainError);
    CHECK_THROWS_AS(cochran_error(1.96, 1.5, 10), DomainError);
    CHECK_THROWS_AS(cochran_error(1.96, 0.5, 0), DomainError);
}

TEST_CASE("cochran_n") {
    CHECK(cochran_n(1.96, 0.5, 0.0490) == 400);
    CHECK(cochran_n(1.0, 0.5, 0.5) == 1);
    // 0.3099 is e(10) = 0.309903 rounded down, so the ceiling asks for one more sample.
    CHECK(cochran_n(1.96, 0.5, 0.3099) == 11);
    CHECK(cochran_n(1.96, 0.5, cochran_error(1.96, 0.5, 10)) == 10);
    CHECK(cochran_n(1.96, 0.5, cochran_error(1.96, 0.5, 50)) == 50);

    CHECK_THROWS_AS(cochran_n(-1.0, 0.5, 0.1), DomainError);
    CHECK_THROWS_AS(cochran_n(1.96, 0.0, 0.1), DomainError);
    CHECK_THROWS_AS(cochran_n(1.96, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(cochran_n(1.96, 0.5, 0.0), DomainError);

    auto plan = plan_for_samples(1.96, 0.5, 50);
    CHECK(plan.n0 == 50);
    CHECK(plan.e == cochran_error(1.96, 0.5, 50));
}

TEST_CASE("cochran round trip and worst-case proportion") {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> z_dist(0.5, 3.5);
    std::uniform_real_distribution<double> p_dist(0.01, 0.99);
    std::uniform_real_distribution<double> e_dist(0.005, 0.6);
    for (int i = 0; i < 5000; ++i) {
        const double z = z_dist(gen);
        const double p = p_dist(gen);
        const double e = e_dist(gen);
        const auto n = cochran_n(z, p, e);
        CHECK(cochran_error(z, p, n) <= e * (1.0 + 1e-12));
        if (n > 1) CHECK(cochran_error(z, p, n - 1) > e * (1.0 - 1e-9));
        CHECK(cochran_n(z, 0.5, e) >= n);
    }
}

TEST_CASE("collect_samples") {
    auto one = collect_samples(kBlue, 1, 5);
    REQUIRE(one.delays_us.size() == 1);
    CHECK(one.delays_us[0] > 44.0);

    CHECK(collect_samples(kBlue, 50, 17, "p") == collect_samples(kBlue, 50, 17, "p"));
    CHECK(collect_samples(kBlue, 50, 17).delays_us != collect_samples(kBlue, 50, 18).delays_us);
    CHECK_THROWS_AS(collect_samples(kBlue, 0, 1), DomainError);

    auto big = collect_samples(kBlue, 100000, 123);
    CHECK(std::abs(empirical_fraction_below(big, 82.0) - 0.938) <= 0.01);
}

TEST_CASE("empirical_fraction_below") {
    SampleSet s{"x", {80, 81, 83, 85, 90}, 0};
    CHECK(empirical_fraction_below(s, 82.0) == doctest::Approx(0.4));
    CHECK(empirical_fraction_below(s, 100.0) == 1.0);
    CHECK(empirical_fraction_below(s, 10.0) == 0.0);
    CHECK(empirical_fraction_below(s, 83.0) == doctest::Approx(0.6)); // inclusive
    CHECK_THROWS_AS(empirical_fraction_below(SampleSet{}, 1.0), DomainError);

    auto blue = collect_samples(kBlue, 200, 8);
    CHECK(empirical_fraction_below(blue, kBlue.propagation_us) == 0.0);

    std::mt19937_64 gen(1);
    for (int i = 0; i < 50; ++i) {
        auto shuffled = blue;
        std::shuffle(shuffled.delays_us.begin(), shuffled.delays_us.end(), gen);
        CHECK(empirical_fraction_below(shuffled, 70.0) == empirical_fraction_below(blue, 70.0));
    }
}

TEST_CASE("empirical fraction falls within the Cochran margin in >= 93.5% of sets") {
    const double truth = cdf(kBlue, 82.0);
    for (std::size_t n0 : {10, 50, 400}) {
        const double margin = cochran_error(1.96, 0.5, n0);
        std::size_t covered = 0;
        const std::size_t sets = 2000;
        for (std::size_t i = 0; i < sets; ++i) {
            auto s = collect_samples(kBlue, n0, 7000 + i);
            covered += std::abs(empirical_fraction_below(s, 82.0) - truth) <= margin;
        }
        CHECK(static_cast<double>(covered) / sets >= 0.935);
    }
}

TEST_CASE("sample CSV round trip") {
    auto s = collect_samples(kBlue, 64, 0xDEADBEEFCAFEULL, "Node_47->Node_10");
    std::stringstream buf;
    write_sample_csv(buf, s);
    CHECK(buf.str().rfind("# path_id=Node_47->Node_10\n# seed=244837814094590\ndelay_us\n", 0) == 0);
    CHECK(read_sample_csv(buf) == s);

    std::stringstream bad("# path_id=x\n1.0\n");
    CHECK_THROWS_AS(read_sample_csv(bad), ParseError);
    std::stringstream negative("delay_us\n-3\n");
    CHECK_THROWS_AS(read_sample_csv(negative), ParseError);
}
