#pragma once

// Seeded random builders for property tests: scenario timelines, grammar-
// shaped gates, cost cases, and worker registries.

#include <random>
#include <string>
#include <vector>

#include "selsense/coordinator.hpp"
#include "selsense/query.hpp"
#include "selsense/scenario.hpp"

#include "support/oracles.hpp"

namespace generators {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random contiguous timeline around a single fence at (52, 0).
inline selsense::Scenario random_scenario(Rng& rng) {
    selsense::Scenario sc;
    sc.name = "random";
    sc.fences = {selsense::GeoFence{"zone", 52.0, 0.0, uniform_real(rng, 100.0, 500.0)}};
    const int n_segments = uniform_int(rng, 3, 8);
    double t = 0.0;
    auto random_point = [&] {
        return selsense::GeoPoint{52.0 + uniform_real(rng, -0.006, 0.006),
                                  uniform_real(rng, -0.006, 0.006)};
    };
    selsense::GeoPoint prev = random_point();
    for (int i = 0; i < n_segments; ++i) {
        selsense::Segment seg;
        seg.start_sec = t;
        seg.end_sec = t + uniform_int(rng, 10, 90);
        seg.activity = selsense::activity_from_code(uniform_int(rng, 1, 6));
        seg.waypoint_start = prev;
        seg.waypoint_end = random_point();
        seg.raining = uniform_int(rng, 0, 1) == 1;
        seg.wifi = uniform_int(rng, 0, 1) == 1;
        prev = seg.waypoint_end;
        t = seg.end_sec;
        sc.segments.push_back(seg);
    }
    sc.total_duration_sec = t;
    sc.validate();
    return sc;
}

// One random grammar-shaped term (predicate or NOT predicate).
inline selsense::GateExpr random_term(Rng& rng) {
    using selsense::GateExpr;
    using selsense::Predicate;
    Predicate p;
    switch (uniform_int(rng, 0, 4)) {
        case 0:
            p.kind = Predicate::Kind::ActivityEquals;
            p.activity_code = uniform_int(rng, 1, 6);
            break;
        case 1: {
            p.kind = Predicate::Kind::ActivityInSet;
            const int n = uniform_int(rng, 1, 4);
            for (int i = 0; i < n; ++i) p.activity_set.push_back(uniform_int(rng, 1, 6));
            break;
        }
        case 2:
            p.kind = Predicate::Kind::WithinFence;
            p.fence_id = "zone";
            p.within_expected = uniform_int(rng, 0, 1);
            break;
        case 3:
            p.kind = Predicate::Kind::RainFlag;
            p.rain_expected = uniform_int(rng, 0, 1) == 1;
            break;
        default: {
            p.kind = Predicate::Kind::NumericCompare;
            // Thresholds chosen near the generators' output ranges so both
            // branches actually occur.
            static const struct {
                const char* field;
                double lo, hi;
            } kFields[] = {{"light", 200.0, 340.0},
                           {"sound", 40.0, 56.0},
                           {"pressure", 1010.0, 1016.0},
                           {"heart", 55.0, 160.0}};
            const auto& f = kFields[uniform_int(rng, 0, 3)];
            p.field = f.field;
            p.cmp = static_cast<selsense::Cmp>(uniform_int(rng, 0, 5));
            p.constant = uniform_real(rng, f.lo, f.hi);
            break;
        }
    }
    GateExpr leaf = GateExpr::leaf(std::move(p));
    if (uniform_int(rng, 0, 3) == 0) return GateExpr::make_not(std::move(leaf));
    return leaf;
}

// Left-associative random chain, exactly the shapes the grammar can produce.
inline selsense::GateExpr random_gate(Rng& rng) {
    selsense::GateExpr gate = random_term(rng);
    const int extra = uniform_int(rng, 0, 3);
    for (int i = 0; i < extra; ++i) {
        auto rhs = random_term(rng);
        gate = uniform_int(rng, 0, 1) == 0
                   ? selsense::GateExpr::make_and(std::move(gate), std::move(rhs))
                   : selsense::GateExpr::make_or(std::move(gate), std::move(rhs));
    }
    return gate;
}

inline selsense::QueryAst random_query(Rng& rng) {
    selsense::QueryAst ast;
    const char* kSelectable[] = {"accelerometer", "light", "pressure", "gyroscope", "sound",
                                 "pm25", "heart"};
    const int n = uniform_int(rng, 1, 4);
    std::vector<int> picks;
    for (int i = 0; i < n; ++i) {
        int idx;
        do {
            idx = uniform_int(rng, 0, 6);
        } while (std::find(picks.begin(), picks.end(), idx) != picks.end());
        picks.push_back(idx);
        ast.selected_fields.push_back({kSelectable[idx], {}});
    }
    ast.source = "node";
    ast.gate = random_gate(rng);
    ast.sample_period_sec = uniform_int(rng, 0, 4) == 0 ? 0.5 : 1.0;
    return ast;
}

inline oracles::CostCase random_cost_case(Rng& rng) {
    oracles::CostCase c;
    c.t_td = uniform_int(rng, 50, 2500);
    long t = 0;
    while (t < c.t_td) {
        t += uniform_int(rng, 1, 200); // gap
        if (t >= c.t_td) break;
        const long start = t;
        t += uniform_int(rng, 1, 300);
        const long end = std::min(t, c.t_td);
        if (end > start) {
            c.open.push_back({static_cast<double>(start), static_cast<double>(end)});
        }
    }
    c.t_ncf = uniform_real(rng, 0.25, 30.0);
    c.t_sf = uniform_int(rng, 1, 10);
    c.t_dcom_round = uniform_real(rng, 0.001, 0.5);
    c.e_cpu_rate = uniform_real(rng, 0.0, 2.0);
    c.e_dcom_rate = uniform_real(rng, 0.0, 2.0);
    c.k_rate = uniform_real(rng, 0.0, 1.0);
    c.e_overhead_rate = uniform_real(rng, 0.0, 0.2);
    c.cpu_sec_per_record = uniform_real(rng, 0.0, 0.01);
    c.record_size = uniform_real(rng, 8.0, 512.0);
    c.overhead_frac = uniform_int(rng, 0, 1) == 0 ? 0.0 : uniform_real(rng, 0.0, 0.5);
    return c;
}

struct RegistryCase {
    std::vector<selsense::WorkerInfo> workers;
    int cap = 1;
    std::vector<std::string> expected; // eligible ids, ascending, pre-cap
};

// Registry with random availability and capability; `expected` holds every
// eligible id for a query needing {accelerometer, pm25}.
inline RegistryCase random_registry(Rng& rng) {
    RegistryCase rc;
    const int n = uniform_int(rng, 1, 60);
    rc.cap = uniform_int(rng, 1, 40);
    for (int i = 0; i < n; ++i) {
        char id[8];
        std::snprintf(id, sizeof(id), "w%03d", i);
        selsense::WorkerInfo info;
        info.worker_id = id;
        info.available = uniform_int(rng, 0, 3) > 0;
        info.sensors = {"accelerometer"};
        if (uniform_int(rng, 0, 3) > 0) info.sensors.insert("pm25");
        if (uniform_int(rng, 0, 1) == 1) info.sensors.insert("light");
        rc.workers.push_back(info);
        if (info.available && info.sensors.contains("pm25")) rc.expected.push_back(id);
    }
    return rc;
}

} // namespace generators
