#include <doctest.h>

#include <random>

#include "selsense/geo.hpp"
#include "support/oracles.hpp"

using namespace selsense;

TEST_CASE("haversine distance matches high-precision reference points") {
    CHECK(haversine_distance({0, 0}, {0, 0}) == 0.0);
    // Frozen values computed with a 40-digit evaluation of
    // 2R asin(sqrt(sin^2(dphi/2) + cos(phi1) cos(phi2) sin^2(dlambda/2))).
    CHECK(haversine_distance({0, 0}, {0, 0.001}) ==
          doctest::Approx(111.1949266445587373).epsilon(1e-6));
    CHECK(haversine_distance({0, 0}, {0, 180}) ==
          doctest::Approx(20015086.79602057272).epsilon(1e-6));
    CHECK(haversine_distance({0, 0}, {0.0005, 0}) ==
          doctest::Approx(55.59746332227936867).epsilon(1e-6));
    CHECK(haversine_distance({52.2, 0.1}, {48.8566, 2.3522}) ==
          doctest::Approx(404370.9257421154).epsilon(1e-6));
}

TEST_CASE("haversine is symmetric, non-negative, zero iff equal") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-179.0, 179.0);
    for (int i = 0; i < 200; ++i) {
        const GeoPoint a{lat(rng), lon(rng)};
        const GeoPoint b{lat(rng), lon(rng)};
        const double d_ab = haversine_distance(a, b);
        const double d_ba = haversine_distance(b, a);
        CHECK(d_ab == doctest::Approx(d_ba).epsilon(1e-12));
        CHECK(d_ab >= 0.0);
        CHECK(haversine_distance(a, a) == 0.0);
    }
}

TEST_CASE("haversine rejects out-of-range coordinates") {
    CHECK_THROWS_AS(haversine_distance({91.0, 0.0}, {0.0, 0.0}), Error);
    CHECK_THROWS_AS(haversine_distance({0.0, 0.0}, {0.0, -181.0}), Error);
}

TEST_CASE("geofence membership: boundary counts as inside") {
    const GeoFence fence{"f", 0.0, 0.0, 100.0};
    CHECK(geofence_contains(fence, {0.0, 0.0}));
    CHECK_FALSE(geofence_contains(fence, {0.0, 0.001})); // ~111.19 m
    CHECK(geofence_contains(fence, {0.0005, 0.0}));      // ~55.60 m
    // A fence whose radius is exactly the point's distance.
    const double d = haversine_distance({0.0, 0.0}, {0.0004, 0.0});
    CHECK(geofence_contains({"g", 0.0, 0.0, d}, {0.0004, 0.0}));
}

TEST_CASE("geofence membership agrees with the independent distance oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lat(51.9, 52.1), lon(-0.1, 0.1), r(50.0, 2000.0);
    for (int i = 0; i < 1000; ++i) {
        const GeoFence fence{"f", lat(rng), lon(rng), r(rng)};
        const GeoPoint p{lat(rng), lon(rng)};
        const double d = oracles::haversine_atan2(fence.center_lat_deg, fence.center_lon_deg,
                                                  p.lat_deg, p.lon_deg);
        if (std::abs(d - fence.radius_m) < 1e-6) continue; // oracle/impl tie zone
        CHECK(geofence_contains(fence, p) == (d <= fence.radius_m));
    }
}

TEST_CASE("fence transitions emit alternating enter/exit") {
    const GeoFence fence{"f", 0.0, 0.0, 100.0};
    const GeoPoint in{0.0, 0.0}, out{0.0, 0.01};

    SUBCASE("all inside -> single enter at t0") {
        const auto events = fence_transitions(fence, {{0, in}, {1, in}, {2, in}});
        REQUIRE(events.size() == 1);
        CHECK(events[0] == FenceEvent{0, "f", FenceEvent::Kind::Enter});
    }
    SUBCASE("inside, outside, inside") {
        const auto events = fence_transitions(fence, {{0, in}, {1, out}, {2, in}});
        REQUIRE(events.size() == 3);
        CHECK(events[0].kind == FenceEvent::Kind::Enter);
        CHECK(events[1].kind == FenceEvent::Kind::Exit);
        CHECK(events[2].kind == FenceEvent::Kind::Enter);
        CHECK(events[1].t_sec == 1.0);
    }
    SUBCASE("all outside -> no events") {
        CHECK(fence_transitions(fence, {{0, out}, {1, out}}).empty());
    }
    SUBCASE("unsorted trace rejected") {
        CHECK_THROWS_AS(fence_transitions(fence, {{1, in}, {0, in}}), Error);
    }
}

TEST_CASE("replaying fence events reconstructs membership at every sample") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> lat(51.995, 52.005);
    const GeoFence fence{"f", 52.0, 0.0, 300.0};
    std::vector<TimedPoint> trace;
    for (int t = 0; t < 300; ++t) {
        trace.push_back({static_cast<double>(t), {lat(rng), 0.0}});
    }
    const auto events = fence_transitions(fence, trace);

    // Alternation per fence.
    for (size_t i = 1; i < events.size(); ++i) {
        CHECK(events[i].kind != events[i - 1].kind);
    }
    // Replay.
    size_t next_event = 0;
    bool inside = false;
    for (const auto& tp : trace) {
        while (next_event < events.size() && events[next_event].t_sec <= tp.t_sec) {
            inside = events[next_event].kind == FenceEvent::Kind::Enter;
            ++next_event;
        }
        CHECK(inside == geofence_contains(fence, tp.pos));
    }
}

TEST_CASE("fence catalog json round trip") {
    const std::vector<GeoFence> fences = {{"park", 52.0, 0.0, 300.0}, {"lab", 51.5, -0.1, 75.5}};
    const auto parsed = parse_fence_catalog(fence_catalog_to_json(fences));
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].id == "park");
    CHECK(parsed[1].radius_m == 75.5);
    CHECK_THROWS_AS(parse_fence_catalog("{\"not\":\"an array\"}"), Error);
    CHECK_THROWS_AS(parse_fence_catalog("[{\"id\":\"x\",\"lat\":0,\"lon\":0,\"radius_m\":0}]"),
                    Error);
}
