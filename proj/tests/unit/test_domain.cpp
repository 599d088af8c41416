#include <cmath>

#include "doctest.h"
#include "edgeprice/domain.hpp"
#include "fixtures.hpp"

using namespace edgeprice;

TEST_CASE("degenerate ranges fix input and output sizes") {
    ApplicationProfile p = fixtures::standard_application();
    p.input_min_kb = p.input_max_kb = 500;
    p.output_ratio_min = p.output_ratio_max = 0.5;
    RngStream r(1);
    Task t = sample_task(p, 0, 0.0, 0, r);
    CHECK(t.input_bits == 4000000.0);
    CHECK(t.output_bits == 2000000.0);
    CHECK(t.container_bits == t.input_bits);
    CHECK(t.max_delay == 0.5);
}

TEST_CASE("container follows the drawn input when its range is zero") {
    ApplicationProfile p = fixtures::standard_application();
    p.input_min_kb = p.input_max_kb = 800;
    RngStream r(2);
    Task t = sample_task(p, 0, 0.0, 0, r);
    CHECK(t.container_bits == doctest::Approx(800 * 8000.0));

    p.container_min_kb = p.container_max_kb = 50;
    Task u = sample_task(p, 0, 0.0, 1, r);
    CHECK(u.container_bits == doctest::Approx(50 * 8000.0));
}

TEST_CASE("sampled tasks respect the profile ranges") {
    ApplicationProfile p = fixtures::standard_application();
    RngStream r(3);
    for (int i = 0; i < 10000; ++i) {
        Task t = sample_task(p, 0, 0.0, i, r);
        REQUIRE(t.length_mi > 0.0);
        REQUIRE(t.input_bits >= 100 * 8000.0);
        REQUIRE(t.input_bits <= 1000 * 8000.0);
        REQUIRE(t.output_bits >= 0.2 * t.input_bits - 1e-6);
        REQUIRE(t.output_bits <= 0.8 * t.input_bits + 1e-6);
    }
}

TEST_CASE("importance weights lie on the simplex") {
    RngStream r(4);
    const int n = 100000;
    double sd = 0, se = 0, sp = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        auto w = generate_weights(r);
        REQUIRE(w.delay >= 0.0);
        REQUIRE(w.energy >= 0.0);
        REQUIRE(w.price >= 0.0);
        REQUIRE(w.delay + w.energy + w.price == doctest::Approx(1.0).epsilon(1e-15));
        sd += w.delay;
        se += w.energy;
        sp += w.price;
        sq += w.delay * w.delay;
    }
    CHECK(std::abs(sd / n - 1.0 / 3) < 0.01);
    CHECK(std::abs(se / n - 1.0 / 3) < 0.01);
    CHECK(std::abs(sp / n - 1.0 / 3) < 0.01);
    double var = sq / n - (sd / n) * (sd / n);
    CHECK(std::abs(var - 1.0 / 18) < 0.005);
}

TEST_CASE("poisson arrivals") {
    RngStream r(5);
    CHECK(poisson_arrivals(1.0, 0.0, r).empty());

    auto times = poisson_arrivals(1.0, 3600.0, r);
    CHECK(std::abs(static_cast<double>(times.size()) - 3600.0) <= 180.0);
    for (std::size_t i = 1; i < times.size(); ++i) REQUIRE(times[i] > times[i - 1]);
    CHECK(times.back() <= 3600.0);

    RngStream a(9), b(9), c(10);
    CHECK(poisson_arrivals(1.0, 100.0, a) == poisson_arrivals(1.0, 100.0, b));
    CHECK(poisson_arrivals(1.0, 100.0, c) != poisson_arrivals(1.0, 100.0, b));
}

TEST_CASE("task lifecycle only moves forward") {
    Task t;
    t.advance(TaskStatus::Queued);
    t.advance(TaskStatus::Executing);
    CHECK_THROWS_AS(t.advance(TaskStatus::Queued), std::logic_error);
    t.advance(TaskStatus::DoneSuccess);
    CHECK_THROWS_AS(t.advance(TaskStatus::FailedLatency), std::logic_error);

    Task u;
    u.advance(TaskStatus::FailedDeviceDead);
    CHECK(is_terminal(u.status));
    CHECK(to_string(u.status) == "failed-device-dead");
}

TEST_CASE("spec validation rejects inverted ranges") {
    ApplicationProfile p = fixtures::standard_application();
    p.input_min_kb = 2000;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    DeviceTypeSpec d = fixtures::standard_devices()[0];
    d.idle_power = 10;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);

    ServerSpec s{105, 185, 0, 20000, 1, 1};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
