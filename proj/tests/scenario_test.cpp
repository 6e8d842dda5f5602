#include <doctest.h>

#include "selsense/context.hpp"
#include "selsense/scenario.hpp"

using namespace selsense;

namespace {

// Independent gate-open accounting straight from the segment table.
double seconds_where(const Scenario& sc, bool (*pred)(const Segment&)) {
    double total = 0.0;
    for (const auto& seg : sc.segments) {
        if (pred(seg)) total += seg.end_sec - seg.start_sec;
    }
    return total;
}

} // namespace

TEST_CASE("bus scenario: 60-minute truncation gives 44 min moving, 16 min stopped") {
    const Scenario sc = builtin_scenario("bus");
    CHECK(sc.total_duration_sec == 3600.0);
    const double moving =
        seconds_where(sc, [](const Segment& s) { return s.activity == Activity::InVehicle; });
    const double stopped =
        seconds_where(sc, [](const Segment& s) { return s.activity == Activity::Still; });
    CHECK(moving == 2640.0);
    CHECK(stopped == 960.0);
    // wifi only while stopped
    for (const auto& seg : sc.segments) {
        CHECK(seg.wifi == (seg.activity == Activity::Still));
    }
}

TEST_CASE("bus scenario: full ten cycles variant is 70 minutes") {
    const Scenario sc = builtin_scenario("bus", BusOptions{true});
    CHECK(sc.total_duration_sec == 4200.0);
    const double moving =
        seconds_where(sc, [](const Segment& s) { return s.activity == Activity::InVehicle; });
    CHECK(moving == 3000.0);
}

TEST_CASE("rehab scenario: 50 minutes total, 35 walking") {
    const Scenario sc = builtin_scenario("rehab");
    CHECK(sc.total_duration_sec == 3000.0);
    const double walking =
        seconds_where(sc, [](const Segment& s) { return s.activity == Activity::Walking; });
    CHECK(walking == 2100.0);
}

TEST_CASE("park scenario: only the running segment lies inside the fence") {
    const Scenario sc = builtin_scenario("park");
    CHECK(sc.total_duration_sec == 3900.0);
    REQUIRE(sc.fences.size() == 1);
    const GeoFence& park = sc.fences[0];
    for (const auto& seg : sc.segments) {
        // Sample the segment densely; membership must match activity==running.
        for (double t = seg.start_sec; t < seg.end_sec; t += 7.0) {
            const bool inside = geofence_contains(park, sc.position_at(t));
            CHECK(inside == (seg.activity == Activity::Running));
        }
    }
    const double running =
        seconds_where(sc, [](const Segment& s) { return s.activity == Activity::Running; });
    CHECK(running == 1800.0);
}

TEST_CASE("cycle-commute scenario: 20 of 40 minutes cycling") {
    const Scenario sc = builtin_scenario("cycle-commute");
    CHECK(sc.total_duration_sec == 2400.0);
    const double cycling =
        seconds_where(sc, [](const Segment& s) { return s.activity == Activity::Cycling; });
    CHECK(cycling == 1200.0);
}

TEST_CASE("unknown scenario name is rejected") {
    CHECK_THROWS_AS(builtin_scenario("zeppelin"), Error);
    CHECK_THROWS_AS(canonical_query("zeppelin"), Error);
}

TEST_CASE("trace csv round trip preserves per-second context") {
    const Scenario sc = builtin_scenario("park");
    const std::string csv = trace_to_csv(sc);
    const Scenario back = scenario_from_trace_csv(csv, "park");
    CHECK(back.total_duration_sec == sc.total_duration_sec);
    for (long t = 0; t < 3900; t += 13) {
        const auto& a = sc.segment_at(static_cast<double>(t));
        const auto& b = back.segment_at(static_cast<double>(t));
        CHECK(a.activity == b.activity);
        CHECK(a.raining == b.raining);
        CHECK(a.wifi == b.wifi);
        const GeoPoint pa = sc.position_at(static_cast<double>(t));
        const GeoPoint pb = back.position_at(static_cast<double>(t));
        CHECK(pa.lat_deg == doctest::Approx(pb.lat_deg).epsilon(1e-12));
        CHECK(pa.lon_deg == doctest::Approx(pb.lon_deg).epsilon(1e-12));
    }
    // Sub-second positions interpolate identically too (piecewise linear).
    const GeoPoint mid_a = sc.position_at(1234.5);
    const GeoPoint mid_b = back.position_at(1234.5);
    CHECK(mid_a.lat_deg == doctest::Approx(mid_b.lat_deg).epsilon(1e-12));
}

TEST_CASE("trace csv parse errors") {
    CHECK_THROWS_AS(scenario_from_trace_csv(""), Error);
    CHECK_THROWS_AS(scenario_from_trace_csv("bogus,header\n"), Error);
    CHECK_THROWS_AS(
        scenario_from_trace_csv("t_sec,lat_deg,lon_deg,activity,raining,wifi\n5,0,0,3,0,0\n"),
        Error);
    CHECK_THROWS_AS(
        scenario_from_trace_csv("t_sec,lat_deg,lon_deg,activity,raining,wifi\n0,0,0,9,0,0\n"),
        Error);
}

TEST_CASE("scenario segment json round trip") {
    const Scenario sc = builtin_scenario("park");
    const Scenario back = scenario_from_json(scenario_to_json(sc));
    CHECK(back.segments.size() == sc.segments.size());
    CHECK(back.total_duration_sec == sc.total_duration_sec);
    REQUIRE(back.fences.size() == 1);
    CHECK(back.fences[0].id == "park");
    for (size_t i = 0; i < sc.segments.size(); ++i) {
        CHECK(back.segments[i].activity == sc.segments[i].activity);
        CHECK(back.segments[i].start_sec == sc.segments[i].start_sec);
        CHECK(back.segments[i].waypoint_end.lat_deg == sc.segments[i].waypoint_end.lat_deg);
    }
}

TEST_CASE("scenario validation catches gaps and overlaps") {
    Scenario sc;
    sc.name = "broken";
    sc.total_duration_sec = 20.0;
    sc.segments = {
        {0, 10, Activity::Still, {0, 0}, {0, 0}, false, false},
        {12, 20, Activity::Still, {0, 0}, {0, 0}, false, false}, // gap at 10..12
    };
    CHECK_THROWS_AS(sc.validate(), Error);
    sc.segments[1].start_sec = 10;
    CHECK_NOTHROW(sc.validate());
    sc.total_duration_sec = 25.0; // mismatch with last end
    CHECK_THROWS_AS(sc.validate(), Error);
}
