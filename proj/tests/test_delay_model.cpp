#include "telsim/delay_model.hpp"
#include "telsim/errors.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace telsim;

namespace {

PathDelayModel blue() { return {44.0, std::vector<double>(3, 19.0 / 3.0)}; }
PathDelayModel green() { return {68.0, std::vector<double>(4, 1.25)}; }

Topology chain(double length_km, double load, std::size_t hops) {
    std::vector<NodeSpec> nodes{{"S", NodeRole::Aco}};
    for (std::size_t i = 1; i < hops; ++i) nodes.push_back({"T" + std::to_string(i), NodeRole::Transit});
    nodes.push_back({"D", NodeRole::Maco});
    std::vector<LinkSpec> links;
    for (std::size_t i = 0; i < hops; ++i) {
        links.push_back({"L" + std::to_string(i + 1), nodes[i].id, nodes[i + 1].id, length_km, load, 1.0});
    }
    return Topology("chain", std::move(nodes), std::move(links));
}

} // namespace

TEST_CASE("build_path_model applies propagation and M/M/1 stage means") {
    SUBCASE("one link, rho 0.5") {
        auto topo = chain(8.8, 0.5, 1);
        auto model = build_path_model(topo, route(topo, "S", "D"));
        CHECK(model.propagation_us == doctest::Approx(44.0).epsilon(1e-12));
        REQUIRE(model.stage_means_us.size() == 1);
        CHECK(model.stage_means_us[0] == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("three links of 8.8/3 km at rho = 16/19 (the 63 us path)") {
        auto topo = chain(8.8 / 3.0, 16.0 / 19.0, 3);
        auto path = route(topo, "S", "D");
        auto model = build_path_model(topo, path);
        CHECK(model.propagation_us == 5.0 * topo.path_length_km(path));
        CHECK(model.propagation_us == doctest::Approx(44.0).epsilon(1e-12));
        for (double m : model.stage_means_us) CHECK(m == doctest::Approx(19.0 / 3.0).epsilon(1e-12));
        CHECK(model.mean_us() == doctest::Approx(63.0).epsilon(1e-12));
    }
    SUBCASE("four links of 3.4 km at rho 0.2 (the 73 us path)") {
        auto topo = chain(13.6 / 4.0, 0.2, 4);
        auto model = build_path_model(topo, route(topo, "S", "D"));
        CHECK(model.propagation_us == doctest::Approx(68.0).epsilon(1e-12));
        for (double m : model.stage_means_us) CHECK(m == doctest::Approx(1.25).epsilon(1e-12));
        CHECK(model.mean_us() == doctest::Approx(73.0).epsilon(1e-12));
    }
    SUBCASE("unknown link") {
        auto topo = chain(1.0, 0.5, 1);
        CHECK_THROWS_AS(build_path_model(topo, PathSpec{"S", "D", {"nope"}}), RoutingError);
    }
}

TEST_CASE("erlang_blocks groups equal and near-equal means") {
    auto blocks = erlang_blocks({0.0, {3.0, 1.0, 3.0, 2.0, 2.0000000001}});
    REQUIRE(blocks.size() == 3);
    CHECK(blocks[0].mean_us == 1.0);
    CHECK(blocks[0].stages == 1);
    CHECK(blocks[1].stages == 2);
    CHECK(blocks[1].mean_us == doctest::Approx(2.00000000005));
    CHECK(blocks[2].mean_us == 3.0);
    CHECK(blocks[2].stages == 2);

    CHECK(erlang_blocks({0.0, {2.0, 2.002}}).size() == 2);
}

TEST_CASE("cdf closed-form anchors") {
    CHECK(cdf(blue(), 44.0) == 0.0);
    CHECK(cdf(blue(), 10.0) == 0.0);
    CHECK(cdf({5.0, {4.0}}, 9.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(cdf(blue(), 1e9) == doctest::Approx(1.0));

    // Erlang-3 / Erlang-4 values at the 82 us threshold (mpmath, 30 digits).
    CHECK(cdf(blue(), 82.0) == doctest::Approx(0.93803119558334103942).epsilon(1e-13));
    CHECK(cdf(green(), 82.0) == doctest::Approx(0.99577365240906501456).epsilon(1e-13));
    CHECK(fraction_below(blue(), 82.0) == cdf(blue(), 82.0));

    // Phase-type values from an mpmath matrix exponential (40 digits).
    CHECK(cdf({0.0, {2.0, 3.0, 3.0}}, 10.0) == doctest::Approx(0.72333025857289134838).epsilon(1e-13));
    CHECK(cdf({3.0, {1, 1, 1, 1, 1, 5}}, 10.5) == doctest::Approx(0.38110508224551618761).epsilon(1e-13));
    CHECK(cdf({0.0, {1.25, 6.5, 2.0, 2.0000001}}, 12.0) == doctest::Approx(0.61221829527776360225).epsilon(1e-8));
}

TEST_CASE("cdf equals the Erlang closed form on equal-stage models") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> mean_dist(0.3, 12.0);
    std::uniform_int_distribution<int> k_dist(1, 12);
    for (int i = 0; i < 200; ++i) {
        const auto k = static_cast<std::size_t>(k_dist(gen));
        const double m = mean_dist(gen);
        const PathDelayModel model{20.0, std::vector<double>(k, m)};
        for (double x : {0.01, 0.5 * m, m * k, 3.0 * m * k, 8.0 * m * k}) {
            CHECK(std::abs(cdf(model, 20.0 + x) - oracle::erlang_cdf(k, m, x)) <= 1e-12);
        }
    }
}

TEST_CASE("cdf agrees with trapezoid convolution on mixed models") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> mean_dist(1.0, 4.0);
    std::uniform_int_distribution<int> k_dist(1, 5);
    for (int i = 0; i < 6; ++i) {
        std::vector<double> means;
        const int k = k_dist(gen);
        for (int s = 0; s < k; ++s) {
            // Every other model repeats a mean to exercise Erlang blocks.
            if (i % 2 == 1 && s > 0 && s % 2 == 0) {
                means.push_back(means.back());
            } else {
                means.push_back(mean_dist(gen));
            }
        }
        const PathDelayModel model{7.0, means};
        double total = 0.0;
        for (double m : means) total += m;
        const double x = 0.02 * std::round(total / 0.02);
        CHECK(std::abs(cdf(model, 7.0 + x) - oracle::convolution_cdf(means, x)) <= 1e-6);
    }
}

TEST_CASE("cdf is monotone in t") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> mean_dist(0.5, 8.0);
    std::uniform_real_distribution<double> step(0.0, 2.0);
    for (int i = 0; i < 40; ++i) {
        PathDelayModel model{10.0, {}};
        for (int s = 0; s < 1 + i % 6; ++s) model.stage_means_us.push_back(mean_dist(gen));
        double previous = 0.0;
        for (double t = 5.0; t < 120.0; t += step(gen)) {
            const double f = cdf(model, t);
            CHECK(f >= previous - 1e-15);
            CHECK(f <= 1.0);
            previous = f;
        }
    }
}

TEST_CASE("sample_delay") {
    Engine rng(42);
    const auto model = blue();
    double sum = 0.0;
    std::size_t below = 0;
    const std::size_t n = 1'000'000;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = sample_delay(model, rng);
        REQUIRE(d > model.propagation_us);
        sum += d;
        below += d <= 82.0;
    }
    // Stage variance 3 * (19/3)^2; three standard errors of the mean.
    const double se = std::sqrt(3.0 * (19.0 / 3.0) * (19.0 / 3.0) / n);
    CHECK(std::abs(sum / n - 63.0) <= 3.0 * se);
    CHECK(std::abs(sum / n - 63.0) <= 0.1);

    const double p = cdf(model, 82.0);
    CHECK(std::abs(static_cast<double>(below) / n - p) <= 4.0 * std::sqrt(p * (1.0 - p) / n));

    Engine a(9), b(9);
    for (int i = 0; i < 100; ++i) CHECK(sample_delay(model, a) == sample_delay(model, b));
}

TEST_CASE("cdf matches Monte Carlo frequencies on random models") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> mean_dist(0.5, 6.0);
    for (int trial = 0; trial < 5; ++trial) {
        PathDelayModel model{30.0, {}};
        for (int s = 0; s < 2 + trial; ++s) model.stage_means_us.push_back(mean_dist(gen));
        const double t = model.mean_us() + (trial - 2) * 2.0;
        Engine rng(1000 + trial);
        const std::size_t n = 1'000'000;
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) hits += sample_delay(model, rng) <= t;
        const double p = cdf(model, t);
        CHECK(std::abs(static_cast<double>(hits) / n - p) <= 4.0 * std::sqrt(p * (1.0 - p) / n));
    }
}

TEST_CASE("quantile") {
    const PathDelayModel single{12.0, {3.0}};
    CHECK(quantile(single, 1.0 - std::exp(-1.0)) == doctest::Approx(15.0).epsilon(1e-9));
    CHECK(std::abs(quantile(single, 1.0 - std::exp(-1.0)) - 15.0) <= 1e-6);

    for (const auto& model : {blue(), green(), PathDelayModel{3.0, {1.0, 2.5, 2.5, 7.0}}}) {
        for (double p : {0.01, 0.5, 0.99}) CHECK(std::abs(cdf(model, quantile(model, p)) - p) <= 1e-9);
    }
    CHECK(std::abs(quantile(blue(), 0.937) - 82.0) <= 0.2);

    CHECK_THROWS_AS(quantile(blue(), 0.0), DomainError);
    CHECK_THROWS_AS(quantile(blue(), 1.0), DomainError);
}

TEST_CASE("calibrate_path reconstructs the two published paths") {
    auto b = calibrate_path(44.0, 19.0, 82.0, 0.937, 8);
    CHECK(b.hops == 3);
    CHECK(b.achieved_fraction == doctest::Approx(0.938031).epsilon(1e-5));
    CHECK(b.model.mean_us() == doctest::Approx(63.0).epsilon(1e-12));

    auto g = calibrate_path(68.0, 5.0, 82.0, 0.995, 8);
    CHECK(g.hops == 4);
    CHECK(g.achieved_fraction == doctest::Approx(0.995774).epsilon(1e-5));
    CHECK(g.model.mean_us() == doctest::Approx(73.0).epsilon(1e-12));

    CHECK_THROWS_AS(calibrate_path(44.0, 60.0, 82.0, 0.999999, 8), InfeasibleError);
    CHECK_THROWS_AS(calibrate_path(44.0, 19.0, 40.0, 0.9, 8), DomainError);
    CHECK_THROWS_AS(calibrate_path(44.0, 19.0, 82.0, 1.0, 8), DomainError);
}
