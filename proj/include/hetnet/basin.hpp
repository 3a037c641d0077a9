#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "hetnet/error.hpp"
#include "hetnet/geometry.hpp"
#include "hetnet/integrator.hpp"
#include "hetnet/itinerary.hpp"
#include "hetnet/network.hpp"
#include "hetnet/sequence.hpp"

namespace hetnet {

struct TubeRegion {
    double delta = 0.05;
};

struct BallRegion {
    State center;
    double radius = 0.0;
};

struct SamplingPlan {
    std::size_t n_samples = 1000;
    std::uint64_t seed = 1;
    std::variant<TubeRegion, BallRegion> region = TubeRegion{};
    double horizon_time = 2500.0;
    std::size_t horizon_symbols = 60;
    double convergence_threshold = std::numeric_limits<double>::infinity();

    void validate() const {
        if (n_samples == 0) throw SpecError("sampling plan: n_samples must be positive");
        if (!(horizon_time > 0.0)) throw SpecError("sampling plan: horizon_time must be positive");
        if (horizon_symbols == 0) throw SpecError("sampling plan: horizon_symbols must be positive");
        if (!(convergence_threshold > 0.0)) throw SpecError("sampling plan: convergence_threshold must be positive");
        if (const auto* t = std::get_if<TubeRegion>(&region)) {
            if (!(t->delta > 0.0)) throw SpecError("sampling plan: tube delta must be positive");
        } else {
            const auto& b = std::get<BallRegion>(region);
            if (!(b.radius > 0.0)) throw SpecError("sampling plan: ball radius must be positive");
        }
    }
};

// splitmix64; also used to derive independent per-sample streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    static Rng for_sample(std::uint64_t seed, std::uint64_t index) {
        Rng r(seed);
        const std::uint64_t a = r.next();
        Rng s(a ^ (index * 0xd1b54a32d192ed03ull + 0x632be59bd9b4e019ull));
        s.next();
        return s;
    }

private:
    std::uint64_t s_;
};

struct SampleSet {
    std::vector<State> points;
    std::size_t attempts = 0;
    // Lebesgue volume of the region (estimated for tubes, exact for balls).
    double region_volume = 0.0;
};

inline SampleSet sample_region(const SamplingPlan& plan, const NetworkGeometry& g) {
    plan.validate();
    const std::size_t d = g.dim();
    SampleSet out;
    out.points.reserve(plan.n_samples);
    if (const auto* ball = std::get_if<BallRegion>(&plan.region)) {
        if (ball->center.size() != d) throw SpecError("sampling plan: ball center has wrong dimension");
        for (std::size_t i = 0; i < plan.n_samples; ++i) {
            Rng rng = Rng::for_sample(plan.seed, i);
            while (true) {
                ++out.attempts;
                State x(d);
                double r2 = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    x[k] = rng.uniform(ball->center[k] - ball->radius, ball->center[k] + ball->radius);
                    r2 += (x[k] - ball->center[k]) * (x[k] - ball->center[k]);
                }
                if (r2 < ball->radius * ball->radius) {
                    out.points.push_back(std::move(x));
                    break;
                }
            }
        }
        out.region_volume = std::pow(M_PI, 0.5 * static_cast<double>(d)) / std::tgamma(0.5 * static_cast<double>(d) + 1.0) *
                            std::pow(ball->radius, static_cast<double>(d));
        return out;
    }

    const double delta = std::get<TubeRegion>(plan.region).delta;
    struct Box {
        State lo, hi;
        double volume = 1.0;
    };
    std::vector<Box> boxes;
    auto add_box = [&](State lo, State hi) {
        Box b{std::move(lo), std::move(hi), 1.0};
        for (std::size_t k = 0; k < d; ++k) b.volume *= b.hi[k] - b.lo[k];
        boxes.push_back(std::move(b));
    };
    for (const auto& [id, p] : g.equilibria()) {
        State lo(d), hi(d);
        for (std::size_t k = 0; k < d; ++k) {
            lo[k] = p[k] - delta;
            hi[k] = p[k] + delta;
        }
        add_box(lo, hi);
    }
    for (const auto& pl : g.polylines()) {
        State lo(d, std::numeric_limits<double>::infinity()), hi(d, -std::numeric_limits<double>::infinity());
        for (const auto& p : pl.points)
            for (std::size_t k = 0; k < d; ++k) {
                lo[k] = std::min(lo[k], p[k] - delta);
                hi[k] = std::max(hi[k], p[k] + delta);
            }
        add_box(lo, hi);
    }
    std::vector<double> cum;
    double total = 0.0;
    for (const auto& b : boxes) cum.push_back(total += b.volume);
    const SegmentIndex index(g, 1.5 * delta);
    double accepted_weight = 0.0;
    for (std::size_t i = 0; i < plan.n_samples; ++i) {
        Rng rng = Rng::for_sample(plan.seed, i);
        while (true) {
            ++out.attempts;
            if (out.attempts > 1'000'000 && accepted_weight < 1e-4 * static_cast<double>(out.attempts))
                throw DomainError("sample_region: acceptance rate below 1e-4, region and geometry do not match");
            const double u = rng.uniform() * total;
            const std::size_t bi = std::min<std::size_t>(static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin()), boxes.size() - 1);
            State x(d);
            for (std::size_t k = 0; k < d; ++k) x[k] = rng.uniform(boxes[bi].lo[k], boxes[bi].hi[k]);
            const double thin = rng.uniform();
            if (!(index.distance(x) < delta)) continue;
            // overlapping boxes: keep with probability 1/multiplicity
            std::size_t mult = 0;
            for (const auto& b : boxes) {
                bool in = true;
                for (std::size_t k = 0; k < d && in; ++k) in = x[k] >= b.lo[k] && x[k] <= b.hi[k];
                mult += in;
            }
            accepted_weight += 1.0 / static_cast<double>(mult);
            if (thin * static_cast<double>(mult) >= 1.0) continue;
            out.points.push_back(std::move(x));
            break;
        }
    }
    out.region_volume = total * accepted_weight / static_cast<double>(out.attempts);
    return out;
}

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

inline Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

// Everything later estimators need from one integrated sample.
struct SampleOutcome {
    std::size_t index = 0;
    State initial;
    IntegrationStatus status = IntegrationStatus::completed;
    std::string message;
    VisitTimeline timeline;
    bool settled = false;
    double entry_time = 0.0;
    // Full maximal word read from the record (not capped by the symbol horizon).
    Word word;
    std::size_t restarts = 0;
    std::optional<Periodicity> tail;
    State final_state;
    // Thinned states from the last quarter of the record.
    std::vector<double> tail_times;
    std::vector<State> tail_states;
    double terminal_distance = 0.0;

    bool failed() const { return !(status == IntegrationStatus::completed || status == IntegrationStatus::stopped); }
};

struct BasinContext {
    const HeteroclinicNetwork* net = nullptr;
    const VectorField* field = nullptr;
    const NeighborhoodSet* nbhd = nullptr;
    IntegratorOptions integrator;
    std::size_t jobs = 1;
};

// Far enough that only runaway trajectories are cut off.
inline double default_escape_radius(const NetworkGeometry& g) {
    auto [lo, hi] = g.bounding_box();
    double r = 0.0;
    for (std::size_t k = 0; k < lo.size(); ++k) r = std::max({r, std::abs(lo[k]), std::abs(hi[k])});
    return std::max(10.0 * g.bounding_diagonal(), 2.0 * r * std::sqrt(static_cast<double>(lo.size())));
}

inline SampleOutcome run_sample(const BasinContext& ctx, const SamplingPlan& plan, std::size_t index, const State& x0) {
    IntegratorOptions io = ctx.integrator;
    const NetworkGeometry& g = *ctx.nbhd->geometry;
    if (!std::isfinite(io.escape_radius)) io.escape_radius = default_escape_radius(g);
    const TrajectoryRecord rec = integrate(*ctx.field, x0, plan.horizon_time, io, ctx.nbhd);
    SampleOutcome o;
    o.index = index;
    o.initial = x0;
    o.status = rec.status;
    o.message = rec.message;
    o.final_state = rec.final_state();
    o.terminal_distance = g.distance(o.final_state);
    o.timeline = make_timeline(rec);
    if (o.failed()) return o;
    if (auto m = try_extract_maximal_itinerary(o.timeline, *ctx.nbhd, std::numeric_limits<std::size_t>::max())) {
        o.settled = true;
        o.entry_time = m->entry_time;
        o.word = std::move(m->word);
        o.restarts = m->restarts;
        o.tail = detect_periodic_tail(o.word, 2);
    }
    const double t_end = rec.t_end();
    const double t_q = 0.75 * t_end;
    const auto first = std::lower_bound(rec.times.begin(), rec.times.end(), t_q) - rec.times.begin();
    const std::size_t count = rec.size() - static_cast<std::size_t>(first);
    const std::size_t stride = std::max<std::size_t>(1, count / 256);
    for (std::size_t i = static_cast<std::size_t>(first); i < rec.size(); i += stride) {
        o.tail_times.push_back(rec.times[i]);
        o.tail_states.emplace_back(rec.state(i).begin(), rec.state(i).end());
    }
    if (o.tail_times.empty() || o.tail_times.back() != t_end) {
        o.tail_times.push_back(t_end);
        o.tail_states.push_back(o.final_state);
    }
    return o;
}

inline std::vector<SampleOutcome> run_samples(const BasinContext& ctx, const SamplingPlan& plan, const SampleSet& samples) {
    std::vector<SampleOutcome> out(samples.points.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= samples.points.size()) return;
            try {
                out[i] = run_sample(ctx, plan, i, samples.points[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(ctx.jobs, samples.points.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

// Geometry of Gamma(q): the recurrent connections and their endpoints.
inline NetworkGeometry invariant_geometry(const NetworkGeometry& g, const InvariantSet& inv) {
    std::map<int, State> eq;
    for (int id : inv.equilibria) eq[id] = g.equilibria().at(id);
    std::vector<Polyline> pls;
    for (int id : inv.connections) pls.push_back(g.polyline(id));
    return NetworkGeometry(g.dim(), std::move(eq), std::move(pls));
}

// Finite-horizon proxy for omega(x) in Gamma: the final stretch of the record
// (last eighth) stays within the threshold of Gamma's geometry. Distances at
// this scale are dominated by polyline chord error, so no trend is tested.
class AttractionTest {
public:
    AttractionTest(const NetworkGeometry& g, const InvariantSet& inv, double delta, double threshold)
        : threshold_(threshold), sub_(invariant_geometry(g, inv)),
          index_(sub_, std::isfinite(threshold) ? std::max(2.0 * delta, 2.0 * threshold) : 2.0 * delta) {}

    bool operator()(const SampleOutcome& o) const {
        if (!std::isfinite(threshold_)) return true;
        if (o.tail_states.empty()) return false;
        if (!(sub_.distance(o.final_state) < threshold_)) return false;
        const double t0 = o.tail_times.front(), t1 = o.tail_times.back();
        const double mid = 0.5 * (t0 + t1);
        for (std::size_t i = 0; i < o.tail_states.size(); ++i)
            if (o.tail_times[i] >= mid && !(index_.distance(o.tail_states[i]) < threshold_)) return false;
        return true;
    }

private:
    double threshold_;
    NetworkGeometry sub_;
    SegmentIndex index_;
};

struct BasinEstimate {
    std::string target;
    double delta = 0.0;
    double convergence_threshold = std::numeric_limits<double>::infinity();
    std::size_t total = 0;
    std::size_t failed = 0;
    std::size_t valid = 0;
    std::size_t followed = 0;
    std::size_t attracted = 0;
    Interval followed_ci, attracted_ci;
    double region_volume = 0.0;
    // Decomposition part (empty when not computed).
    std::size_t k_max = 0;
    std::vector<std::size_t> per_k;
    std::size_t basin = 0;
    Interval basin_ci;
    std::size_t inclusion_violations = 0;
    std::size_t certificate_mismatches = 0;
    // Per-sample minimal k (-1 = not in the basin).
    std::vector<long> minimal_k;

    double followed_fraction() const { return valid ? static_cast<double>(followed) / static_cast<double>(valid) : 0.0; }
    double attracted_fraction() const { return valid ? static_cast<double>(attracted) / static_cast<double>(valid) : 0.0; }
    double basin_fraction() const { return valid ? static_cast<double>(basin) / static_cast<double>(valid) : 0.0; }
};

inline BasinEstimate estimate_attracting_set(const std::vector<SampleOutcome>& outcomes, const NeighborhoodSet& nbhd,
                                             const HeteroclinicNetwork& net, std::span<const Symbol> prefix, double threshold) {
    BasinEstimate e;
    e.target = to_string(prefix);
    e.delta = nbhd.delta;
    e.convergence_threshold = threshold;
    e.total = outcomes.size();
    InvariantSet inv = invariant_set(net, SymbolSequence::finite(Word(prefix.begin(), prefix.end())));
    if (inv.connections.empty())
        for (const auto& c : net.connections()) inv.connections.insert(c.id), inv.equilibria.insert(c.source), inv.equilibria.insert(c.target);
    const AttractionTest attracted(*nbhd.geometry, inv, nbhd.delta, threshold);
    for (const auto& o : outcomes) {
        if (o.failed()) {
            ++e.failed;
            continue;
        }
        ++e.valid;
        if (!follows(o.timeline, prefix, nbhd).ok()) continue;
        ++e.followed;
        if (attracted(o)) ++e.attracted;
    }
    e.followed_ci = wilson_interval(e.followed, e.valid);
    e.attracted_ci = wilson_interval(e.attracted, e.valid);
    return e;
}

inline BasinEstimate estimate_stable_set(const std::vector<SampleOutcome>& outcomes, const NeighborhoodSet& nbhd,
                                         const HeteroclinicNetwork& net, std::span<const Symbol> prefix) {
    return estimate_attracting_set(outcomes, nbhd, net, prefix, std::numeric_limits<double>::infinity());
}

struct DecompositionOptions {
    std::size_t k_max = 12;
    // Symbol window for follows() certificates.
    std::size_t window = 12;
};

// Membership of a sample in S_delta(shift(q, k)).
// Finite targets: follows() on the remaining suffix. Eventually periodic
// targets: the sample's maximal word, extended by its detected tail, must be
// a shift of shift(q, k) and be long enough to cover `window` symbols past
// its tail start. Generated targets: follows() on a fixed window.
inline std::vector<char> shift_memberships(const SampleOutcome& o, const NeighborhoodSet& nbhd, const SymbolSequence& q,
                                           const DecompositionOptions& opt, std::size_t* mismatches) {
    std::vector<char> m(opt.k_max + 1, 0);
    switch (q.kind()) {
    case SymbolSequence::Kind::finite: {
        const Word& w = q.head();
        for (std::size_t k = 0; k <= opt.k_max; ++k) {
            const std::size_t s = std::min(k, w.size());
            m[k] = follows(o.timeline, std::span<const Symbol>(w).subspan(s), nbhd).ok();
        }
        break;
    }
    case SymbolSequence::Kind::eventually_periodic: {
        if (!o.settled || !o.tail) break;
        const std::size_t need = o.tail->preperiod + o.tail->period + opt.window;
        if (o.word.size() < need) break;
        const auto what = extrapolate(o.word, 2);
        if (!what) break;
        for (std::size_t k = 0; k <= opt.k_max; ++k) {
            m[k] = shift_offset(*what, shift(q, k)).has_value();
            if (m[k] && mismatches && !follows(o.timeline, shift(q, k).prefix(opt.window), nbhd).ok()) ++*mismatches;
        }
        break;
    }
    case SymbolSequence::Kind::generated:
        for (std::size_t k = 0; k <= opt.k_max; ++k) m[k] = follows(o.timeline, shift(q, k).prefix(opt.window), nbhd).ok();
        break;
    }
    return m;
}

inline BasinEstimate estimate_basin_decomposition(const std::vector<SampleOutcome>& outcomes, const NeighborhoodSet& nbhd,
                                                  const HeteroclinicNetwork& net, const SymbolSequence& q, double threshold,
                                                  const DecompositionOptions& opt = {}) {
    BasinEstimate e;
    e.target = to_string(q);
    e.delta = nbhd.delta;
    e.convergence_threshold = threshold;
    e.total = outcomes.size();
    e.k_max = opt.k_max;
    e.per_k.assign(opt.k_max + 1, 0);
    const AttractionTest attracted(*nbhd.geometry, invariant_set(net, q), nbhd.delta, threshold);
    for (const auto& o : outcomes) {
        if (o.failed()) {
            ++e.failed;
            e.minimal_k.push_back(-1);
            continue;
        }
        ++e.valid;
        const auto m = shift_memberships(o, nbhd, q, opt, &e.certificate_mismatches);
        const bool att = attracted(o);
        if (m[0]) {
            ++e.followed;
            if (att) ++e.attracted;
        }
        for (std::size_t k = 0; k + 1 <= opt.k_max; ++k)
            if (m[k] && !m[k + 1]) {
                ++e.inclusion_violations;
                break;
            }
        long kmin = -1;
        if (att)
            for (std::size_t k = 0; k <= opt.k_max; ++k)
                if (m[k]) {
                    kmin = static_cast<long>(k);
                    break;
                }
        e.minimal_k.push_back(kmin);
        if (kmin >= 0) {
            ++e.per_k[static_cast<std::size_t>(kmin)];
            ++e.basin;
        }
    }
    e.followed_ci = wilson_interval(e.followed, e.valid);
    e.attracted_ci = wilson_interval(e.attracted, e.valid);
    e.basin_ci = wilson_interval(e.basin, e.valid);
    return e;
}

struct CensusClass {
    std::string key;
    enum class Kind { periodic, irregular } kind = Kind::periodic;
    // Minimal rotation of the periodic tail, or the longest member word.
    Word representative;
    std::size_t count = 0;
    // Recoded tail (periodic) or word (irregular); empty when not codable.
    std::optional<std::string> recoded;
    // Recoded heads before the tail, e.g. "AA" -> count.
    std::map<std::string, std::size_t> heads;
    std::size_t uncodable_members = 0;
};

struct SequenceCensus {
    std::size_t total = 0;
    std::size_t failed = 0;
    std::size_t unsettled = 0;
    // Settled but with fewer symbols than the resolution threshold.
    std::size_t unresolved = 0;
    std::size_t classified = 0;
    std::vector<CensusClass> classes;
    // Per-sample class index (-1 if not classified).
    std::vector<long> sample_class;
    // Samples certified for a class other than their own, or not for their own.
    std::size_t conflicts = 0;

    double classified_fraction() const { return total ? static_cast<double>(classified) / static_cast<double>(total) : 0.0; }
};

struct CensusOptions {
    std::size_t min_symbols = 6;
    const CycleCoding* coding = nullptr;
};

namespace detail {

inline std::optional<std::string> recode_from_anchor(const CycleCoding& coding, std::span<const Symbol> w) {
    std::size_t start = 0;
    if (coding.anchor()) {
        auto it = std::find(w.begin(), w.end(), *coding.anchor());
        if (it == w.end()) return std::nullopt;
        start = static_cast<std::size_t>(it - w.begin());
    }
    try {
        return recode(coding, w.subspan(start), true).joined();
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

inline Word repeat_to(std::span<const Symbol> block, std::size_t n) {
    Word out;
    while (out.size() < n) out.insert(out.end(), block.begin(), block.end());
    out.resize(n);
    return out;
}

}  // namespace detail

inline SequenceCensus census(const std::vector<SampleOutcome>& outcomes, const NeighborhoodSet& nbhd, const CensusOptions& opt = {}) {
    SequenceCensus c;
    c.total = outcomes.size();
    std::map<std::string, std::size_t> by_key;
    for (const auto& o : outcomes) {
        long cls = -1;
        if (o.failed()) {
            ++c.failed;
        } else if (!o.settled) {
            ++c.unsettled;
        } else if (o.word.size() < opt.min_symbols) {
            ++c.unresolved;
        } else {
            std::string key;
            CensusClass proto;
            if (o.tail) {
                const auto tail = std::span<const Symbol>(o.word).subspan(o.tail->preperiod, o.tail->period);
                proto.kind = CensusClass::Kind::periodic;
                proto.representative = min_rotation(tail);
                key = "tail:" + to_string(proto.representative);
            } else {
                proto.kind = CensusClass::Kind::irregular;
                proto.representative = o.word;
                // suffix matching against existing irregular classes
                for (auto& cl : c.classes) {
                    if (cl.kind != CensusClass::Kind::irregular) continue;
                    if (is_suffix(o.word, cl.representative) || is_suffix(cl.representative, o.word)) {
                        key = cl.key;
                        if (o.word.size() > cl.representative.size()) cl.representative = o.word;
                        break;
                    }
                }
                if (key.empty()) key = "word:" + to_string(o.word);
            }
            auto it = by_key.find(key);
            if (it == by_key.end()) {
                proto.key = key;
                if (opt.coding) {
                    proto.recoded = proto.kind == CensusClass::Kind::periodic
                                        ? [&]() -> std::optional<std::string> {
                                              auto r = recode_periodic_tail(*opt.coding, proto.representative);
                                              if (r && r->remainder.empty()) return r->joined();
                                              return std::nullopt;
                                          }()
                                        : detail::recode_from_anchor(*opt.coding, proto.representative);
                }
                it = by_key.emplace(key, c.classes.size()).first;
                c.classes.push_back(std::move(proto));
            }
            CensusClass& cl = c.classes[it->second];
            ++cl.count;
            ++c.classified;
            cls = static_cast<long>(it->second);
            if (opt.coding) {
                auto rec = detail::recode_from_anchor(*opt.coding, o.word);
                if (!rec) {
                    ++cl.uncodable_members;
                } else {
                    std::string head = *rec;
                    if (cl.kind == CensusClass::Kind::periodic && cl.recoded && !cl.recoded->empty()) {
                        // strip trailing copies of the recoded tail (any rotation)
                        const std::string& t = *cl.recoded;
                        bool stripped = true;
                        while (stripped) {
                            stripped = false;
                            for (std::size_t r = 0; r < t.size() && !stripped; ++r) {
                                const std::string rot = t.substr(r) + t.substr(0, r);
                                if (head.size() >= rot.size() && head.compare(head.size() - rot.size(), rot.size(), rot) == 0) {
                                    head.resize(head.size() - rot.size());
                                    stripped = true;
                                }
                            }
                        }
                    }
                    ++cl.heads[head];
                }
            }
        }
        c.sample_class.push_back(cls);
    }

    // Single-valuedness: each classified sample must be certified for its own
    // class over the span of its repeating tail and for no other class.
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const long own = c.sample_class[i];
        if (own < 0) continue;
        const auto& o = outcomes[i];
        const std::size_t span = o.tail ? o.word.size() - o.tail->preperiod : o.word.size();
        bool conflict = false;
        for (std::size_t j = 0; j < c.classes.size() && !conflict; ++j) {
            const auto& cl = c.classes[j];
            bool certified = false;
            if (cl.kind == CensusClass::Kind::periodic) {
                const Word& t = cl.representative;
                for (std::size_t r = 0; r < t.size() && !certified; ++r)
                    certified = follows(o.timeline, detail::repeat_to(detail::rotate_left(t, r), span), nbhd).ok();
            } else {
                certified = follows(o.timeline, cl.representative, nbhd).ok();
                if (!certified && static_cast<long>(j) == own) certified = follows(o.timeline, o.word, nbhd).ok();
            }
            conflict = certified != (static_cast<long>(j) == own);
        }
        if (conflict) ++c.conflicts;
    }
    return c;
}

struct FasEvidence {
    enum class Label { fas_evidence, f_fas_evidence, inconclusive };
    Label label = Label::inconclusive;
    std::string rationale;
};

inline const char* to_string(FasEvidence::Label l) {
    switch (l) {
    case FasEvidence::Label::fas_evidence: return "fas_evidence";
    case FasEvidence::Label::f_fas_evidence: return "f_fas_evidence";
    case FasEvidence::Label::inconclusive: return "inconclusive";
    }
    return "";
}

// Evidence labels only; infinite-type behavior is never asserted because
// finitely many shifts can be checked.
inline FasEvidence classify_fas_evidence(const std::vector<BasinEstimate>& by_delta, std::size_t min_trailing_zeros = 2) {
    FasEvidence out;
    std::set<double> deltas;
    for (const auto& e : by_delta) deltas.insert(e.delta);
    if (deltas.size() < 2) {
        out.rationale = "needs estimates at two or more values of delta";
        return out;
    }
    bool positive = true, finite_type = true;
    std::string notes;
    for (const auto& e : by_delta) {
        const bool pos = e.basin_ci.lo > 0.0;
        positive = positive && pos;
        std::size_t zeros = 0;
        for (auto it = e.per_k.rbegin(); it != e.per_k.rend() && *it == 0; ++it) ++zeros;
        const bool ft = !e.per_k.empty() && zeros >= min_trailing_zeros && zeros < e.per_k.size();
        finite_type = finite_type && ft;
        notes += "delta=" + std::to_string(e.delta) + ": basin " + std::to_string(e.basin) + "/" + std::to_string(e.valid) +
                 (pos ? " (CI excludes 0)" : " (CI includes 0)") + ", last nonzero k=" +
                 (zeros < e.per_k.size() ? std::to_string(e.per_k.size() - 1 - zeros) : std::string("none")) + "; ";
    }
    if (!positive) {
        out.label = FasEvidence::Label::inconclusive;
        out.rationale = notes + "basin fraction not separated from 0 at every delta";
    } else if (finite_type) {
        out.label = FasEvidence::Label::f_fas_evidence;
        out.rationale = notes + "positive basin at every delta and per_k vanishes beyond a finite k; evidence, not proof";
    } else {
        out.label = FasEvidence::Label::fas_evidence;
        out.rationale = notes + "positive basin at every delta; per_k does not vanish within the tested shifts (infinite type is not asserted)";
    }
    return out;
}

}  // namespace hetnet
