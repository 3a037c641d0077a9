#pragma once

#include <memory>
#include <random>

#include "hetnet/hetnet.hpp"
#include "hetnet/spec_io.hpp"

namespace testing_fixtures {

using namespace hetnet;

inline const NetworkSpec& ks_spec() {
    static const NetworkSpec spec = load_network_spec(HETNET_DEMOS_DIR "/networks/kirk_silber.json");
    return spec;
}

inline const HeteroclinicNetwork& ks_net() { return ks_spec().network; }

inline const VectorField& ks_field() {
    static const VectorField f = build_field(ks_spec().fields.front());
    return f;
}

inline std::shared_ptr<const NetworkGeometry> ks_geometry() {
    static const auto g = [] {
        TraceOptions opt;
        opt.max_segment = 0.003;
        return std::make_shared<const NetworkGeometry>(trace_network(ks_net(), ks_field(), opt));
    }();
    return g;
}

inline const NeighborhoodSet& ks_nbhd() {
    static const NeighborhoodSet nb = make_neighborhoods(ks_net(), ks_geometry(), 0.05);
    return nb;
}

inline IntegratorOptions ks_integrator() {
    IntegratorOptions io;
    io.rel = 1e-8;
    io.abs = 1e-100;
    return io;
}

// Neighborhood set carrying only the KS endpoint maps, for timeline tests.
inline NeighborhoodSet ks_maps_only() {
    NeighborhoodSet nb;
    for (const auto& c : ks_net().connections()) {
        nb.alpha[c.id] = c.source;
        nb.omega[c.id] = c.target;
    }
    return nb;
}

}  // namespace testing_fixtures
