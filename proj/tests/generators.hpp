#pragma once

#include <random>

#include "fixtures.hpp"

namespace testing_fixtures {

inline SymbolSequence random_sequence(std::mt19937& rng) {
    std::uniform_int_distribution<int> sym(1, 5), len(0, 6), tlen(1, 6), kind(0, 2);
    auto word = [&](int n) {
        Word w;
        for (int i = 0; i < n; ++i) w.push_back(sym(rng));
        return w;
    };
    switch (kind(rng)) {
    case 0: return SymbolSequence::finite(word(len(rng) + 30));
    case 1: return SymbolSequence::eventually_periodic(word(len(rng)), word(tlen(rng)));
    default: {
        StaircaseRule r{word(tlen(rng)), word(tlen(rng)), static_cast<std::size_t>(len(rng)), static_cast<std::size_t>(len(rng) % 3)};
        return SymbolSequence::generated(r, static_cast<std::size_t>(len(rng)));
    }
    }
}

// Random timelines over the Kirk-Silber labels: mostly walks along the
// network with occasional stray visits, random tube history.
inline VisitTimeline random_timeline(std::mt19937& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> n_visits(0, 18), u_label(1, 4), v_label(1, 5);
    VisitTimeline tl;
    double t = 0.1;
    auto add = [&](ProbeFamily f, int label) {
        tl.visits.push_back({f, label, t, t + 0.4});
        t += 0.5;
    };
    int q = v_label(rng);
    const int n = n_visits(rng);
    const double noise = unit(rng) * 0.4;
    while (static_cast<int>(tl.visits.size()) < n) {
        if (unit(rng) < noise) {
            if (unit(rng) < 0.5) add(ProbeFamily::U, u_label(rng));
            else add(ProbeFamily::V, v_label(rng));
            continue;
        }
        add(ProbeFamily::U, ks_net().connection(q).source);
        add(ProbeFamily::V, q);
        const auto outs = ks_net().out_connections(ks_net().connection(q).target);
        q = outs[std::uniform_int_distribution<std::size_t>(0, outs.size() - 1)(rng)];
    }
    tl.t_end = t + 0.2;
    tl.ends_in_tube = unit(rng) < 0.85;
    if (tl.ends_in_tube) {
        if (unit(rng) < 0.5 || tl.visits.empty()) {
            tl.last_entry = 0.0;
        } else {
            const auto& v = tl.visits[std::uniform_int_distribution<std::size_t>(0, tl.visits.size() - 1)(rng)];
            tl.last_entry = v.enter - 0.05;
            tl.last_exit = v.enter - 0.07;
        }
    } else {
        tl.last_exit = tl.t_end - 0.1;
    }
    for (const auto& v : tl.visits) tl.any_u = tl.any_u || v.family == ProbeFamily::U;
    return tl;
}

inline Word random_word(std::mt19937& rng, const VisitTimeline& tl) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Word w;
    if (unit(rng) < 0.6 && !tl.visits.empty()) {
        std::uniform_int_distribution<std::size_t> pos(0, tl.visits.size() - 1);
        std::size_t a = pos(rng), b = pos(rng);
        if (a > b) std::swap(a, b);
        for (std::size_t i = a; i <= b; ++i)
            if (tl.visits[i].family == ProbeFamily::V) w.push_back(tl.visits[i].label);
        return w;
    }
    const int len = std::uniform_int_distribution<int>(0, 6)(rng);
    for (int i = 0; i < len; ++i) w.push_back(std::uniform_int_distribution<int>(1, 5)(rng));
    return w;
}

}  // namespace testing_fixtures
