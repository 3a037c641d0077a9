#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hetnet/error.hpp"
#include "hetnet/vector_field.hpp"

namespace hetnet {

enum class ProbeFamily { U, V, tube };

enum class EventKind { enter_U, exit_U, enter_V, exit_V, enter_tube, exit_tube };

inline const char* to_string(EventKind k) {
    switch (k) {
    case EventKind::enter_U: return "enter_U";
    case EventKind::exit_U: return "exit_U";
    case EventKind::enter_V: return "enter_V";
    case EventKind::exit_V: return "exit_V";
    case EventKind::enter_tube: return "enter_tube";
    case EventKind::exit_tube: return "exit_tube";
    }
    return "";
}

struct Event {
    double t = 0.0;
    EventKind kind = EventKind::enter_U;
    int label = 0;
};

// Scalar indicator functions; a point is inside probe i iff value(i, x) <= 0.
// Only the sign of the values is used.
class ProbeSet {
public:
    virtual ~ProbeSet() = default;
    virtual std::size_t size() const = 0;
    virtual ProbeFamily family(std::size_t i) const = 0;
    virtual int label(std::size_t i) const = 0;
    virtual void evaluate(std::span<const double> x, std::span<double> out) const = 0;
    virtual double evaluate_one(std::size_t i, std::span<const double> x) const {
        std::vector<double> all(size());
        evaluate(x, all);
        return all[i];
    }
    // Largest spacing between probe samples along a step.
    virtual double sample_spacing() const { return std::numeric_limits<double>::infinity(); }
};

enum class IntegrationStatus { completed, stopped, escaped, step_underflow, nonfinite, max_steps };

inline const char* to_string(IntegrationStatus s) {
    switch (s) {
    case IntegrationStatus::completed: return "completed";
    case IntegrationStatus::stopped: return "stopped";
    case IntegrationStatus::escaped: return "escaped";
    case IntegrationStatus::step_underflow: return "step_underflow";
    case IntegrationStatus::nonfinite: return "nonfinite";
    case IntegrationStatus::max_steps: return "max_steps";
    }
    return "";
}

struct IntegratorOptions {
    double rel = 1e-8;
    double abs = 1e-10;
    double h_max = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 20'000'000;
    double escape_radius = std::numeric_limits<double>::infinity();
    double event_time_tol = 1e-9;
    // Optional early stop, checked after every accepted step.
    std::function<bool(double, std::span<const double>)> stop;

    void validate() const {
        if (!(rel > 0.0)) throw SpecError("integrator: relative tolerance must be positive");
        if (!(abs > 0.0)) throw SpecError("integrator: absolute tolerance must be positive");
        if (!(event_time_tol > 0.0)) throw SpecError("integrator: event time tolerance must be positive");
    }
};

// Accepted steps with derivatives, enough for cubic Hermite dense output.
class TrajectoryRecord {
public:
    std::size_t dim = 0;
    std::vector<double> times;
    std::vector<double> states;       // times.size() * dim
    std::vector<double> derivatives;  // times.size() * dim
    std::vector<Event> events;
    IntegrationStatus status = IntegrationStatus::completed;
    std::string message;

    std::size_t size() const { return times.size(); }
    double t_end() const { return times.empty() ? 0.0 : times.back(); }
    std::span<const double> state(std::size_t i) const { return {states.data() + i * dim, dim}; }
    std::span<const double> derivative(std::size_t i) const { return {derivatives.data() + i * dim, dim}; }
    State initial() const { return State(state(0).begin(), state(0).end()); }
    State final_state() const { return State(state(size() - 1).begin(), state(size() - 1).end()); }

    State interpolate(double t) const {
        if (times.empty()) throw DomainError("interpolate: empty record");
        if (t <= times.front()) return initial();
        if (t >= times.back()) return final_state();
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
        State out(dim);
        hermite(i, t, out);
        return out;
    }

    void hermite(std::size_t i, double t, std::span<double> out) const {
        const double t0 = times[i], h = times[i + 1] - t0;
        const double th = (t - t0) / h;
        const double th2 = th * th, th3 = th2 * th;
        const double h00 = 2 * th3 - 3 * th2 + 1, h10 = th3 - 2 * th2 + th, h01 = -2 * th3 + 3 * th2, h11 = th3 - th2;
        auto y0 = state(i), y1 = state(i + 1), f0 = derivative(i), f1 = derivative(i + 1);
        for (std::size_t k = 0; k < dim; ++k) out[k] = h00 * y0[k] + h10 * h * f0[k] + h01 * y1[k] + h11 * h * f1[k];
    }

    bool ok() const { return status == IntegrationStatus::completed || status == IntegrationStatus::stopped; }

    void require_ok() const {
        if (!ok()) throw IntegrationError(std::string("integration failed: ") + to_string(status) + (message.empty() ? "" : ": " + message));
    }
};

namespace detail {

struct DormandPrince {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline double event_kind_enter_exit(bool entering, ProbeFamily fam, EventKind& kind) {
    switch (fam) {
    case ProbeFamily::U: kind = entering ? EventKind::enter_U : EventKind::exit_U; break;
    case ProbeFamily::V: kind = entering ? EventKind::enter_V : EventKind::exit_V; break;
    case ProbeFamily::tube: kind = entering ? EventKind::enter_tube : EventKind::exit_tube; break;
    }
    return 0.0;
}

}  // namespace detail

// Adaptive Dormand-Prince 5(4). Failures are reported through the record's
// status; call require_ok() to turn them into exceptions.
inline TrajectoryRecord integrate(const VectorField& field, std::span<const double> x0, double t_max,
                                  const IntegratorOptions& opt = {}, const ProbeSet* probes = nullptr) {
    opt.validate();
    const std::size_t d = field.dim;
    if (x0.size() != d) throw DomainError("integrate: initial point has dimension " + std::to_string(x0.size()) + ", field has " + std::to_string(d));
    if (!(t_max >= 0.0)) throw DomainError("integrate: t_max must be nonnegative");
    using DP = detail::DormandPrince;

    TrajectoryRecord rec;
    rec.dim = d;
    std::vector<double> y(x0.begin(), x0.end()), f0(d), k2(d), k3(d), k4(d), k5(d), k6(d), f1(d), y1(d), tmp(d);
    field.rhs(y.data(), f0.data());
    auto push = [&](double t, const std::vector<double>& yy, const std::vector<double>& ff) {
        rec.times.push_back(t);
        rec.states.insert(rec.states.end(), yy.begin(), yy.end());
        rec.derivatives.insert(rec.derivatives.end(), ff.begin(), ff.end());
    };
    push(0.0, y, f0);

    const std::size_t np = probes ? probes->size() : 0;
    std::vector<double> pv(np), pv_next(np);
    std::vector<char> inside(np, 0);
    const double spacing = probes ? probes->sample_spacing() : std::numeric_limits<double>::infinity();
    if (probes) {
        probes->evaluate(y, pv);
        for (std::size_t i = 0; i < np; ++i) {
            inside[i] = pv[i] <= 0.0;
            if (inside[i]) {
                Event ev;
                ev.t = 0.0;
                ev.label = probes->label(i);
                detail::event_kind_enter_exit(true, probes->family(i), ev.kind);
                rec.events.push_back(ev);
            }
        }
    }

    auto norm = [&](const std::vector<double>& v, const std::vector<double>& ya, const std::vector<double>& yb) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double sc = opt.abs + opt.rel * std::max(std::abs(ya[i]), std::abs(yb[i]));
            const double r = v[i] / sc;
            s += r * r;
        }
        return std::sqrt(s / static_cast<double>(d));
    };

    if (t_max == 0.0) return rec;
    if (opt.escape_radius < std::numeric_limits<double>::infinity()) {
        double r2 = 0.0;
        for (double v : y) r2 += v * v;
        if (std::sqrt(r2) > opt.escape_radius) {
            rec.status = IntegrationStatus::escaped;
            rec.message = "initial point outside escape radius";
            return rec;
        }
    }

    // Initial step size (Hairer, Norsett, Wanner II.4).
    double h;
    {
        const double d0 = norm(y, y, y), d1 = norm(f0, y, y);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, t_max);
        for (std::size_t i = 0; i < d; ++i) y1[i] = y[i] + h0 * f0[i];
        field.rhs(y1.data(), f1.data());
        for (std::size_t i = 0; i < d; ++i) tmp[i] = f1[i] - f0[i];
        const double d2 = norm(tmp, y, y) / h0;
        const double m = std::max(d1, d2);
        const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
        h = std::min({100 * h0, h1, opt.h_max, t_max});
    }

    double t = 0.0;
    std::size_t steps = 0;
    bool rejected_last = false;
    std::vector<Event> step_events;
    while (t < t_max) {
        if (steps++ >= opt.max_steps) {
            rec.status = IntegrationStatus::max_steps;
            rec.message = "step budget exhausted at t=" + std::to_string(t);
            return rec;
        }
        if (t + h > t_max) h = t_max - t;
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
            rec.status = IntegrationStatus::step_underflow;
            rec.message = "step size underflow at t=" + std::to_string(t);
            return rec;
        }
        for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + h * DP::a21 * f0[i];
        field.rhs(tmp.data(), k2.data());
        for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + h * (DP::a31 * f0[i] + DP::a32 * k2[i]);
        field.rhs(tmp.data(), k3.data());
        for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + h * (DP::a41 * f0[i] + DP::a42 * k2[i] + DP::a43 * k3[i]);
        field.rhs(tmp.data(), k4.data());
        for (std::size_t i = 0; i < d; ++i)
            tmp[i] = y[i] + h * (DP::a51 * f0[i] + DP::a52 * k2[i] + DP::a53 * k3[i] + DP::a54 * k4[i]);
        field.rhs(tmp.data(), k5.data());
        for (std::size_t i = 0; i < d; ++i)
            tmp[i] = y[i] + h * (DP::a61 * f0[i] + DP::a62 * k2[i] + DP::a63 * k3[i] + DP::a64 * k4[i] + DP::a65 * k5[i]);
        field.rhs(tmp.data(), k6.data());
        for (std::size_t i = 0; i < d; ++i)
            y1[i] = y[i] + h * (DP::a71 * f0[i] + DP::a73 * k3[i] + DP::a74 * k4[i] + DP::a75 * k5[i] + DP::a76 * k6[i]);
        field.rhs(y1.data(), f1.data());
        for (std::size_t i = 0; i < d; ++i)
            tmp[i] = h * (DP::e1 * f0[i] + DP::e3 * k3[i] + DP::e4 * k4[i] + DP::e5 * k5[i] + DP::e6 * k6[i] + DP::e7 * f1[i]);
        const double err = norm(tmp, y, y1);
        if (!std::isfinite(err)) {
            h *= 0.2;
            rejected_last = true;
            continue;
        }
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            rejected_last = true;
            continue;
        }
        bool finite = true;
        for (double v : y1) finite = finite && std::isfinite(v);
        if (!finite) {
            rec.status = IntegrationStatus::nonfinite;
            rec.message = "non-finite state at t=" + std::to_string(t + h);
            return rec;
        }
        const double t1 = t + h;
        push(t1, y1, f1);

        if (probes) {
            const std::size_t i0 = rec.size() - 2;
            double chord = 0.0;
            for (std::size_t i = 0; i < d; ++i) chord += (y1[i] - y[i]) * (y1[i] - y[i]);
            chord = std::sqrt(chord);
            const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(chord / spacing)));
            step_events.clear();
            std::vector<double> xs(d);
            double ta = t;
            for (std::size_t j = 1; j <= m; ++j) {
                const double tb = j == m ? t1 : t + h * static_cast<double>(j) / static_cast<double>(m);
                if (j == m) {
                    probes->evaluate(y1, pv_next);
                } else {
                    rec.hermite(i0, tb, xs);
                    probes->evaluate(xs, pv_next);
                }
                for (std::size_t p = 0; p < np; ++p) {
                    const bool in_b = pv_next[p] <= 0.0;
                    if (in_b == static_cast<bool>(inside[p])) continue;
                    double lo = ta, hi = tb;
                    while (hi - lo > opt.event_time_tol) {
                        const double mid = 0.5 * (lo + hi);
                        rec.hermite(i0, mid, xs);
                        const bool in_mid = probes->evaluate_one(p, xs) <= 0.0;
                        if (in_mid == static_cast<bool>(inside[p])) lo = mid;
                        else hi = mid;
                    }
                    Event ev;
                    ev.t = hi;
                    ev.label = probes->label(p);
                    detail::event_kind_enter_exit(in_b, probes->family(p), ev.kind);
                    step_events.push_back(ev);
                    inside[p] = in_b;
                }
                ta = tb;
            }
            std::stable_sort(step_events.begin(), step_events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
            rec.events.insert(rec.events.end(), step_events.begin(), step_events.end());
        }

        t = t1;
        y.swap(y1);
        f0.swap(f1);

        if (opt.escape_radius < std::numeric_limits<double>::infinity()) {
            double r2 = 0.0;
            for (double v : y) r2 += v * v;
            if (std::sqrt(r2) > opt.escape_radius) {
                rec.status = IntegrationStatus::escaped;
                rec.message = "left escape radius " + std::to_string(opt.escape_radius) + " at t=" + std::to_string(t);
                return rec;
            }
        }
        if (opt.stop && opt.stop(t, y)) {
            rec.status = IntegrationStatus::stopped;
            return rec;
        }

        double fac = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
        if (rejected_last) fac = std::min(fac, 1.0);
        rejected_last = false;
        h = std::min(h * fac, opt.h_max);
    }
    return rec;
}

}  // namespace hetnet
