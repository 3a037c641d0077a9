#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetnet/error.hpp"
#include "hetnet/geometry.hpp"
#include "hetnet/integrator.hpp"
#include "hetnet/network.hpp"
#include "hetnet/sequence.hpp"

namespace hetnet {

struct Ball {
    State center;
    double radius = 0.0;
};

struct RadiiOverrides {
    double u_factor = 0.9;
    double v_factor = 0.9;
    std::map<int, double> u;
    std::map<int, double> v;
};

// U_p around equilibria, V_q around connection witnesses, and the tube
// B_delta(N). Doubles as the probe set for event detection: probes are
// ordered U (by id), V (by id), tube.
class NeighborhoodSet : public ProbeSet {
public:
    double delta = 0.0;
    std::map<int, Ball> U;
    std::map<int, Ball> V;
    std::shared_ptr<const NetworkGeometry> geometry;
    std::map<int, int> alpha;  // connection -> source equilibrium
    std::map<int, int> omega;  // connection -> target equilibrium

    void finalize() {
        index_ = std::make_shared<SegmentIndex>(*geometry, 2.0 * delta);
        probes_.clear();
        min_radius_ = std::numeric_limits<double>::infinity();
        for (const auto& [id, b] : U) add_probe(ProbeFamily::U, id, b);
        for (const auto& [id, b] : V) add_probe(ProbeFamily::V, id, b);
        Probe t;
        t.family = ProbeFamily::tube;
        probes_.push_back(t);
        centers_.clear();
        r2_.clear();
        for (const auto& p : probes_) {
            if (p.family == ProbeFamily::tube) continue;
            centers_.insert(centers_.end(), p.center.begin(), p.center.end());
            r2_.push_back(p.radius * p.radius);
        }
    }

    std::size_t size() const override { return probes_.size(); }
    ProbeFamily family(std::size_t i) const override { return probes_[i].family; }
    int label(std::size_t i) const override { return probes_[i].label; }
    double sample_spacing() const override { return 0.25 * min_radius_; }

    void evaluate(std::span<const double> x, std::span<double> out) const override {
        const std::size_t nb = r2_.size();
        bool in_ball = false;
        for (std::size_t i = 0; i < nb; ++i) {
            out[i] = ball_value(i, x);
            in_ball = in_ball || out[i] <= 0.0;
        }
        // balls lie inside the tube, so only the sign matters there
        out[nb] = in_ball ? -1.0 : index_->distance(x) - delta;
    }

    double evaluate_one(std::size_t i, std::span<const double> x) const override {
        const std::size_t nb = r2_.size();
        if (i < nb) return ball_value(i, x);
        for (std::size_t k = 0; k < nb; ++k)
            if (ball_value(k, x) <= 0.0) return -1.0;
        return index_->distance(x) - delta;
    }

    bool in_tube(std::span<const double> x) const { return evaluate_one(r2_.size(), x) <= 0.0; }
    double clamped_distance(std::span<const double> x) const { return index_->distance(x); }

private:
    struct Probe {
        ProbeFamily family = ProbeFamily::tube;
        int label = 0;
        State center;
        double radius = 0.0;
    };

    void add_probe(ProbeFamily f, int id, const Ball& b) {
        Probe p;
        p.family = f;
        p.label = id;
        p.center = b.center;
        p.radius = b.radius;
        probes_.push_back(p);
        min_radius_ = std::min(min_radius_, b.radius);
    }

    double ball_value(std::size_t i, std::span<const double> x) const {
        const std::size_t d = x.size();
        const double* c = &centers_[i * d];
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += (x[k] - c[k]) * (x[k] - c[k]);
        return s - r2_[i];
    }

    std::vector<Probe> probes_;
    std::vector<double> centers_;
    std::vector<double> r2_;
    double min_radius_ = 0.0;
    std::shared_ptr<SegmentIndex> index_;
};

// Error if polylines of distinct connections come within 2 delta of each
// other away from the equilibria (more than 3 delta from all of them).
inline void check_tube_separation(const NetworkGeometry& g, double delta) {
    const auto& pls = g.polylines();
    for (std::size_t a = 0; a < pls.size(); ++a) {
        for (std::size_t b = a + 1; b < pls.size(); ++b) {
            for (const auto& p : pls[a].points) {
                bool near_eq = false;
                for (const auto& [id, e] : g.equilibria()) near_eq = near_eq || distance(p, e) < 3.0 * delta;
                if (near_eq) continue;
                const double d = pls[b].distance_to(p);
                if (d < 2.0 * delta)
                    throw DomainError("tube self-intersects: connections " + std::to_string(pls[a].connection) + " and " +
                                      std::to_string(pls[b].connection) + " come within " + std::to_string(d) +
                                      " of each other; reduce delta");
            }
        }
    }
}

inline NeighborhoodSet make_neighborhoods(const HeteroclinicNetwork& net, std::shared_ptr<const NetworkGeometry> geometry,
                                          double delta, const RadiiOverrides& radii = {}) {
    if (!(delta > 0.0)) throw DomainError("make_neighborhoods: delta must be positive (empty tube)");
    if (!geometry) throw DomainError("make_neighborhoods: missing geometry");
    check_tube_separation(*geometry, delta);
    NeighborhoodSet n;
    n.delta = delta;
    n.geometry = geometry;
    for (const auto& e : net.equilibria()) {
        auto it = radii.u.find(e.id);
        n.U[e.id] = {e.position, it != radii.u.end() ? it->second : radii.u_factor * delta};
    }
    for (const auto& c : net.connections()) {
        auto it = radii.v.find(c.id);
        n.V[c.id] = {c.witness, it != radii.v.end() ? it->second : radii.v_factor * delta};
        n.alpha[c.id] = c.source;
        n.omega[c.id] = c.target;
    }

    std::vector<Ball*> balls;
    for (auto& [id, b] : n.U) balls.push_back(&b);
    for (auto& [id, b] : n.V) balls.push_back(&b);
    for (Ball* b : balls)
        if (!(b->radius > 0.0)) throw DomainError("make_neighborhoods: ball radii must be positive");
    std::vector<double> new_r;
    for (std::size_t i = 0; i < balls.size(); ++i) {
        double dmin = std::numeric_limits<double>::infinity();
        bool collides = false;
        for (std::size_t j = 0; j < balls.size(); ++j) {
            if (i == j) continue;
            const double d = distance(balls[i]->center, balls[j]->center);
            dmin = std::min(dmin, d);
            collides = collides || balls[i]->radius + balls[j]->radius >= d;
        }
        new_r.push_back(collides ? std::min(balls[i]->radius, 0.4 * dmin) : balls[i]->radius);
    }
    for (std::size_t i = 0; i < balls.size(); ++i) balls[i]->radius = new_r[i];
    for (std::size_t i = 0; i < balls.size(); ++i) {
        if (!(balls[i]->radius > 0.0)) throw DomainError("make_neighborhoods: two neighborhood centers coincide");
        if (geometry->distance(balls[i]->center) + balls[i]->radius >= delta)
            throw DomainError("make_neighborhoods: a neighborhood ball is not contained in the tube; use smaller radii");
    }
    n.finalize();
    return n;
}

struct Visit {
    ProbeFamily family = ProbeFamily::U;
    int label = 0;
    double enter = 0.0;
    double exit = 0.0;
    double mid() const { return 0.5 * (enter + exit); }
};

// Ball visits in time order plus the tube history, read from events.
struct VisitTimeline {
    std::vector<Visit> visits;
    double t_end = 0.0;
    bool ends_in_tube = false;
    double last_entry = 0.0;  // start of the final tube interval
    double last_exit = -std::numeric_limits<double>::infinity();
    bool any_u = false;
};

inline VisitTimeline make_timeline(const TrajectoryRecord& rec) {
    VisitTimeline tl;
    tl.t_end = rec.t_end();
    std::map<std::pair<int, int>, double> open;  // (family, label) -> enter time
    bool in_tube = false;
    for (const auto& ev : rec.events) {
        switch (ev.kind) {
        case EventKind::enter_U: open[{0, ev.label}] = ev.t; break;
        case EventKind::enter_V: open[{1, ev.label}] = ev.t; break;
        case EventKind::exit_U:
        case EventKind::exit_V: {
            const int fam = ev.kind == EventKind::exit_U ? 0 : 1;
            auto it = open.find({fam, ev.label});
            if (it == open.end()) break;
            tl.visits.push_back({fam == 0 ? ProbeFamily::U : ProbeFamily::V, ev.label, it->second, ev.t});
            open.erase(it);
            break;
        }
        case EventKind::enter_tube:
            in_tube = true;
            tl.last_entry = ev.t;
            break;
        case EventKind::exit_tube:
            in_tube = false;
            tl.last_exit = ev.t;
            break;
        }
    }
    for (const auto& [key, t0] : open) tl.visits.push_back({key.first == 0 ? ProbeFamily::U : ProbeFamily::V, key.second, t0, tl.t_end});
    std::sort(tl.visits.begin(), tl.visits.end(), [](const Visit& a, const Visit& b) { return a.enter < b.enter; });
    tl.ends_in_tube = in_tube;
    for (const auto& v : tl.visits) tl.any_u = tl.any_u || v.family == ProbeFamily::U;
    return tl;
}

struct FollowCertificate {
    enum class Verdict { follows, violated, no_anchor };
    Word word;
    // Number of leading symbols with a valid time assignment.
    std::size_t k_max = 0;
    std::vector<double> t;
    std::vector<double> t_prime;
    Verdict verdict = Verdict::follows;
    int condition = 0;  // 1, 2 or 3 when violated
    double time = 0.0;
    std::string detail;

    bool ok() const { return verdict == Verdict::follows; }
};

inline std::string verdict_string(const FollowCertificate& c) {
    switch (c.verdict) {
    case FollowCertificate::Verdict::follows: return "follows(" + std::to_string(c.k_max) + ")";
    case FollowCertificate::Verdict::no_anchor: return "no_anchor";
    case FollowCertificate::Verdict::violated: {
        static const char* names[] = {"", "i", "ii", "iii"};
        return std::string("violated(") + names[c.condition] + ")";
    }
    }
    return "";
}

namespace detail {

struct ChainStep {
    std::vector<std::size_t> members;      // visit indices of V_{q_k} visits in R_k
    std::vector<std::size_t> predecessor;  // aligned with members: chosen element of R_{k-1}
};

// R_k for one symbol. For k = 0 `prev` is ignored and any U_{alpha} visit at
// or after `lower` qualifies.
inline ChainStep chain_step(const VisitTimeline& tl, const NeighborhoodSet& nb, std::size_t lower, const Word& w, std::size_t k,
                            const ChainStep* prev, bool check_iii) {
    ChainStep out;
    const int q = w[k];
    const int need = nb.alpha.at(q);
    const int allowed = k > 0 ? nb.omega.at(w[k - 1]) : 0;
    std::ptrdiff_t last_good = -1, last_bad = -1;
    const auto& v = tl.visits;
    for (std::size_t j = lower; j < v.size(); ++j) {
        if (v[j].family == ProbeFamily::U) {
            const bool bad = k > 0 && check_iii && v[j].label != allowed;
            if (bad) last_bad = static_cast<std::ptrdiff_t>(j);
            else if (v[j].label == need) last_good = static_cast<std::ptrdiff_t>(j);
            continue;
        }
        if (v[j].label != q || last_good < 0 || last_good < last_bad) continue;
        if (k == 0) {
            out.members.push_back(j);
            out.predecessor.push_back(j);
            continue;
        }
        const auto& pm = prev->members;
        // first member after the last offending U visit
        auto it = last_bad < 0 ? pm.begin() : std::upper_bound(pm.begin(), pm.end(), static_cast<std::size_t>(last_bad));
        if (it != pm.end() && static_cast<std::ptrdiff_t>(*it) < last_good) {
            out.members.push_back(j);
            out.predecessor.push_back(*it);
        }
    }
    return out;
}

inline std::size_t lower_index(const VisitTimeline& tl, double t0) {
    std::size_t i = 0;
    while (i < tl.visits.size() && tl.visits[i].enter < t0) ++i;
    return i;
}

}  // namespace detail

inline FollowCertificate follows(const VisitTimeline& tl, std::span<const Symbol> word, const NeighborhoodSet& nb) {
    FollowCertificate cert;
    cert.word.assign(word.begin(), word.end());
    for (Symbol s : word)
        if (!nb.alpha.count(s)) throw DomainError("follows: unknown symbol " + std::to_string(s));
    if (word.empty()) {
        if (tl.ends_in_tube) return cert;
        cert.verdict = FollowCertificate::Verdict::violated;
        cert.condition = 1;
        cert.time = tl.last_exit;
        cert.detail = "record ends outside the tube";
        return cert;
    }
    if (!tl.any_u) {
        cert.verdict = FollowCertificate::Verdict::no_anchor;
        cert.detail = "trajectory never enters any U_p";
        return cert;
    }
    const std::size_t K = word.size();
    const Word w(word.begin(), word.end());

    auto run = [&](std::size_t lower, std::vector<detail::ChainStep>& steps) -> std::size_t {
        steps.clear();
        for (std::size_t k = 0; k < K; ++k) {
            steps.push_back(detail::chain_step(tl, nb, lower, w, k, k ? &steps[k - 1] : nullptr, true));
            if (steps.back().members.empty()) return k;
        }
        return K;
    };

    const std::size_t lower = tl.ends_in_tube ? detail::lower_index(tl, tl.last_entry) : tl.visits.size();
    std::vector<detail::ChainStep> steps;
    const std::size_t reached = run(lower, steps);

    // Earliest chain for the longest certified prefix.
    cert.k_max = reached;
    if (reached > 0) {
        std::vector<std::size_t> js(reached);
        js[reached - 1] = steps[reached - 1].members.front();
        for (std::size_t k = reached - 1; k > 0; --k) {
            const auto& st = steps[k];
            const auto pos = std::lower_bound(st.members.begin(), st.members.end(), js[k]) - st.members.begin();
            js[k - 1] = st.predecessor[static_cast<std::size_t>(pos)];
        }
        for (std::size_t k = 0; k < reached; ++k) {
            const int need = nb.alpha.at(w[k]);
            const std::size_t from = k == 0 ? lower : js[k - 1] + 1;
            std::size_t u = from;
            while (!(tl.visits[u].family == ProbeFamily::U && tl.visits[u].label == need)) ++u;
            cert.t.push_back(tl.visits[u].mid());
            cert.t_prime.push_back(tl.visits[js[k]].mid());
        }
    }
    if (reached == K) return cert;

    cert.verdict = FollowCertificate::Verdict::violated;
    std::vector<detail::ChainStep> relaxed;
    if (run(0, relaxed) == K || !tl.ends_in_tube) {
        cert.condition = 1;
        cert.time = tl.last_exit;
        cert.detail = tl.ends_in_tube ? "the trajectory leaves the tube after the first admissible t_1" : "record ends outside the tube";
        return cert;
    }
    const std::size_t k = reached;
    const auto loose = detail::chain_step(tl, nb, lower, w, k, k ? &steps[k - 1] : nullptr, false);
    if (k > 0 && !loose.members.empty()) {
        cert.condition = 3;
        const std::size_t from = loose.predecessor.front();
        const int allowed = nb.omega.at(w[k - 1]);
        std::size_t u = from + 1;
        while (u < tl.visits.size() && !(tl.visits[u].family == ProbeFamily::U && tl.visits[u].label != allowed)) ++u;
        cert.time = u < tl.visits.size() ? tl.visits[u].enter : tl.t_end;
        cert.detail = "visits U_" + std::to_string(u < tl.visits.size() ? tl.visits[u].label : 0) + " between V_" +
                      std::to_string(w[k - 1]) + " and V_" + std::to_string(w[k]);
        return cert;
    }
    cert.condition = 2;
    cert.time = k > 0 ? cert.t_prime.back() : (lower < tl.visits.size() ? tl.visits[lower].enter : tl.t_end);
    cert.detail = "no visit to V_" + std::to_string(w[k]) + " preceded by U_" + std::to_string(nb.alpha.at(w[k])) +
                  " for symbol " + std::to_string(k + 1);
    return cert;
}

inline FollowCertificate follows(const TrajectoryRecord& rec, std::span<const Symbol> word, const NeighborhoodSet& nb) {
    return follows(make_timeline(rec), word, nb);
}

struct MaximalItinerary {
    Word word;
    // Last tube entry with no later exit.
    double entry_time = 0.0;
    // Time of the first V visit of the word.
    double start_time = 0.0;
    double t_end = 0.0;
    // Times the visit chain broke after the entry; the word starts after the last break.
    std::size_t restarts = 0;
};

// Longest word followed from the last permanent tube entry: chains V visits
// whose intermediate U visits satisfy conditions (ii) and (iii). A broken
// chain means no followed word spans the break, so reading restarts there.
inline std::optional<MaximalItinerary> try_extract_maximal_itinerary(const VisitTimeline& tl, const NeighborhoodSet& nb,
                                                                      std::size_t horizon) {
    if (!tl.ends_in_tube) return std::nullopt;
    MaximalItinerary m;
    m.entry_time = tl.last_entry;
    m.t_end = tl.t_end;
    const auto& v = tl.visits;
    std::vector<int> u_labels;  // U visits since the last accepted V visit
    Word word;
    double start = 0.0;
    for (std::size_t j = detail::lower_index(tl, tl.last_entry); j < v.size(); ++j) {
        const Visit& x = v[j];
        if (x.family == ProbeFamily::U) {
            u_labels.push_back(x.label);
            continue;
        }
        const int need = nb.alpha.at(x.label);
        if (!word.empty()) {
            if (u_labels.empty() && x.label == word.back()) continue;  // re-entry into the same V ball
            const int allowed = nb.omega.at(word.back());
            const bool clean = !u_labels.empty() && std::all_of(u_labels.begin(), u_labels.end(), [&](int l) { return l == allowed; });
            if (clean && need == allowed) {
                word.push_back(x.label);
                u_labels.clear();
                continue;
            }
            word.clear();
            ++m.restarts;
        }
        if (std::find(u_labels.begin(), u_labels.end(), need) != u_labels.end()) {
            word.push_back(x.label);
            start = x.mid();
        }
        u_labels.clear();
    }
    if (word.size() > horizon) word.resize(horizon);
    m.word = std::move(word);
    m.start_time = start;
    return m;
}

inline MaximalItinerary extract_maximal_itinerary(const VisitTimeline& tl, const NeighborhoodSet& nb, std::size_t horizon) {
    auto m = try_extract_maximal_itinerary(tl, nb, horizon);
    if (!m) throw DomainError("extract_maximal_itinerary: trajectory never settles in the tube within the record");
    return *m;
}

inline MaximalItinerary extract_maximal_itinerary(const TrajectoryRecord& rec, const NeighborhoodSet& nb, std::size_t horizon) {
    return extract_maximal_itinerary(make_timeline(rec), nb, horizon);
}

inline bool shift_consistency_check(const VisitTimeline& tl, const NeighborhoodSet& nb, std::span<const Symbol> word) {
    if (word.empty()) return true;
    return follows(tl, word.subspan(1), nb).ok();
}

inline bool shift_consistency_check(const TrajectoryRecord& rec, const NeighborhoodSet& nb, std::span<const Symbol> word) {
    return shift_consistency_check(make_timeline(rec), nb, word);
}

}  // namespace hetnet
