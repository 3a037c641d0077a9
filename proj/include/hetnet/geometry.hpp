#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hetnet/error.hpp"
#include "hetnet/integrator.hpp"
#include "hetnet/linearize.hpp"
#include "hetnet/network.hpp"
#include "hetnet/vector_field.hpp"

namespace hetnet {

inline double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

inline double point_segment_distance2(const double* x, const double* a, const double* b, std::size_t d) {
    double ab2 = 0.0, axab = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double ab = b[i] - a[i];
        ab2 += ab * ab;
        axab += (x[i] - a[i]) * ab;
    }
    const double s = ab2 > 0.0 ? std::clamp(axab / ab2, 0.0, 1.0) : 0.0;
    double r = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double v = x[i] - (a[i] + s * (b[i] - a[i]));
        r += v * v;
    }
    return r;
}

struct Polyline {
    int connection = 0;
    int source = 0;
    int target = 0;
    std::vector<State> points;

    double length() const {
        double L = 0.0;
        for (std::size_t i = 1; i < points.size(); ++i) L += distance(points[i - 1], points[i]);
        return L;
    }
    double max_segment() const {
        double m = 0.0;
        for (std::size_t i = 1; i < points.size(); ++i) m = std::max(m, distance(points[i - 1], points[i]));
        return m;
    }
    double distance_to(std::span<const double> x) const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < points.size(); ++i)
            best = std::min(best, point_segment_distance2(x.data(), points[i - 1].data(), points[i].data(), x.size()));
        if (points.size() == 1) best = std::pow(distance(x, points[0]), 2);
        return std::sqrt(best);
    }
};

// Concrete description of the one-dimensional set N: equilibrium points
// plus a polyline per connection.
class NetworkGeometry {
public:
    NetworkGeometry() = default;
    NetworkGeometry(std::size_t dim, std::map<int, State> equilibria, std::vector<Polyline> polylines)
        : dim_(dim), equilibria_(std::move(equilibria)), polylines_(std::move(polylines)) {
        if (equilibria_.empty() && polylines_.empty()) throw DomainError("geometry: empty");
        for (const auto& [id, p] : equilibria_)
            if (p.size() != dim_) throw DomainError("geometry: equilibrium point has wrong dimension");
        for (const auto& pl : polylines_)
            for (const auto& p : pl.points)
                if (p.size() != dim_) throw DomainError("geometry: polyline point has wrong dimension");
    }

    std::size_t dim() const { return dim_; }
    const std::map<int, State>& equilibria() const { return equilibria_; }
    const std::vector<Polyline>& polylines() const { return polylines_; }
    const Polyline& polyline(int connection) const {
        for (const auto& p : polylines_)
            if (p.connection == connection) return p;
        throw DomainError("geometry: no polyline for connection " + std::to_string(connection));
    }

    double distance(std::span<const double> x) const {
        if (x.size() != dim_) throw DomainError("distance_to_network: point has wrong dimension");
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [id, p] : equilibria_) best = std::min(best, hetnet::distance(x, p));
        for (const auto& pl : polylines_) best = std::min(best, pl.distance_to(x));
        return best;
    }

    double max_segment_length() const {
        double m = 0.0;
        for (const auto& pl : polylines_) m = std::max(m, pl.max_segment());
        return m;
    }

    // Axis-aligned bounding box of all points.
    std::pair<State, State> bounding_box() const {
        State lo(dim_, std::numeric_limits<double>::infinity()), hi(dim_, -std::numeric_limits<double>::infinity());
        auto add = [&](const State& p) {
            for (std::size_t i = 0; i < dim_; ++i) {
                lo[i] = std::min(lo[i], p[i]);
                hi[i] = std::max(hi[i], p[i]);
            }
        };
        for (const auto& [id, p] : equilibria_) add(p);
        for (const auto& pl : polylines_)
            for (const auto& p : pl.points) add(p);
        return {lo, hi};
    }

    double bounding_diagonal() const {
        auto [lo, hi] = bounding_box();
        return hetnet::distance(lo, hi);
    }

    // Each segment split into `factor` equal pieces.
    NetworkGeometry refined(std::size_t factor) const {
        std::vector<Polyline> out;
        for (const auto& pl : polylines_) {
            Polyline r = pl;
            r.points.clear();
            for (std::size_t i = 0; i + 1 < pl.points.size(); ++i) {
                for (std::size_t k = 0; k < factor; ++k) {
                    const double s = static_cast<double>(k) / static_cast<double>(factor);
                    State p(dim_);
                    for (std::size_t j = 0; j < dim_; ++j) p[j] = pl.points[i][j] + s * (pl.points[i + 1][j] - pl.points[i][j]);
                    r.points.push_back(p);
                }
            }
            if (!pl.points.empty()) r.points.push_back(pl.points.back());
            out.push_back(std::move(r));
        }
        return NetworkGeometry(dim_, equilibria_, std::move(out));
    }

private:
    std::size_t dim_ = 0;
    std::map<int, State> equilibria_;
    std::vector<Polyline> polylines_;
};

inline double distance_to_network(const NetworkGeometry& g, std::span<const double> x) { return g.distance(x); }

// Uniform-grid accelerated distance, exact below `reach` and clamped to
// `reach` above it.
class SegmentIndex {
public:
    SegmentIndex() = default;
    SegmentIndex(const NetworkGeometry& g, double reach) : dim_(g.dim()), reach_(reach) {
        if (!(reach > 0.0)) throw DomainError("segment index: reach must be positive");
        for (const auto& [id, p] : g.equilibria()) add_segment(p, p);
        for (const auto& pl : g.polylines()) {
            for (std::size_t i = 1; i < pl.points.size(); ++i) add_segment(pl.points[i - 1], pl.points[i]);
            if (pl.points.size() == 1) add_segment(pl.points[0], pl.points[0]);
        }
        brute_ = dim_ > 6;
        if (brute_) return;
        cell_ = reach_;
        const std::size_t n = a_.size() / dim_;
        std::vector<std::int64_t> lo(dim_), hi(dim_), c(dim_);
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t k = 0; k < dim_; ++k) {
                const double mn = std::min(a_[s * dim_ + k], b_[s * dim_ + k]) - reach_;
                const double mx = std::max(a_[s * dim_ + k], b_[s * dim_ + k]) + reach_;
                lo[k] = static_cast<std::int64_t>(std::floor(mn / cell_));
                hi[k] = static_cast<std::int64_t>(std::floor(mx / cell_));
                c[k] = lo[k];
            }
            while (true) {
                auto& bucket = cells_[key(c)];
                if (bucket.empty() || bucket.back() != s) bucket.push_back(static_cast<std::uint32_t>(s));
                std::size_t k = 0;
                while (k < dim_ && c[k] == hi[k]) {
                    c[k] = lo[k];
                    ++k;
                }
                if (k == dim_) break;
                ++c[k];
            }
        }
    }

    double reach() const { return reach_; }

    double distance(std::span<const double> x) const {
        double best = reach_ * reach_;
        if (brute_) {
            const std::size_t n = a_.size() / dim_;
            for (std::size_t s = 0; s < n; ++s)
                best = std::min(best, point_segment_distance2(x.data(), &a_[s * dim_], &b_[s * dim_], dim_));
            return std::sqrt(best);
        }
        std::int64_t c[8];
        for (std::size_t k = 0; k < dim_; ++k) c[k] = static_cast<std::int64_t>(std::floor(x[k] / cell_));
        auto it = cells_.find(key(std::span<const std::int64_t>(c, dim_)));
        if (it == cells_.end()) return reach_;
        for (std::uint32_t s : it->second)
            best = std::min(best, point_segment_distance2(x.data(), &a_[s * dim_], &b_[s * dim_], dim_));
        return std::sqrt(best);
    }

private:
    void add_segment(const State& a, const State& b) {
        a_.insert(a_.end(), a.begin(), a.end());
        b_.insert(b_.end(), b.begin(), b.end());
    }

    // Colliding keys only merge candidate lists, which keeps results exact.
    static std::uint64_t key(std::span<const std::int64_t> c) {
        std::uint64_t h = 1469598103934665603ull;
        for (std::int64_t v : c) {
            h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h *= 1099511628211ull;
        }
        return h;
    }

    std::size_t dim_ = 0;
    double reach_ = 0.0;
    double cell_ = 1.0;
    bool brute_ = false;
    std::vector<double> a_, b_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

struct TraceOptions {
    double start_offset = 1e-7;
    double end_tol = 1e-6;
    // Closest approach accepted when the orbit cannot come within end_tol.
    double capture_radius = 1e-3;
    double t_max = 2000.0;
    std::size_t min_points = 500;
    // Resampling target for segment length; the tube radius / 10 in practice.
    double max_segment = std::numeric_limits<double>::infinity();
    double rel = 1e-11;
    double abs = 1e-14;
    double witness_tol = 1e-3;
};

namespace detail {

inline std::vector<State> resample(const std::vector<State>& raw, std::size_t n) {
    std::vector<double> s(raw.size(), 0.0);
    for (std::size_t i = 1; i < raw.size(); ++i) s[i] = s[i - 1] + distance(raw[i - 1], raw[i]);
    const double L = s.back();
    std::vector<State> out;
    out.reserve(n);
    std::size_t j = 1;
    const std::size_t d = raw.front().size();
    for (std::size_t k = 0; k < n; ++k) {
        const double target = L * static_cast<double>(k) / static_cast<double>(n - 1);
        while (j + 1 < raw.size() && s[j] < target) ++j;
        const double seg = s[j] - s[j - 1];
        const double u = seg > 0.0 ? std::clamp((target - s[j - 1]) / seg, 0.0, 1.0) : 0.0;
        State p(d);
        for (std::size_t i = 0; i < d; ++i) p[i] = raw[j - 1][i] + u * (raw[j][i] - raw[j - 1][i]);
        out.push_back(std::move(p));
    }
    out.front() = raw.front();
    out.back() = raw.back();
    return out;
}

}  // namespace detail

inline Polyline trace_connection(const HeteroclinicNetwork& net, const VectorField& field, int connection,
                                 const TraceOptions& opt = {}) {
    const auto& c = net.connection(connection);
    const State& src = net.equilibrium(c.source).position;
    const State& dst = net.equilibrium(c.target).position;
    const std::size_t d = net.dim();
    const Linearization lin = linearize_at(field, src);
    const Eigen::MatrixXd U = unstable_basis(lin);
    if (U.cols() == 0)
        throw SpecError("geometry: equilibrium " + std::to_string(c.source) + " has no unstable direction for connection " + std::to_string(connection));
    Eigen::VectorXd w(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) w(static_cast<Eigen::Index>(i)) = c.witness[i] - src[i];
    Eigen::VectorXd v = U * (U.transpose() * w);
    if (v.norm() < 1e-12 * std::max(1.0, w.norm()))
        throw SpecError("geometry: witness of connection " + std::to_string(connection) + " is orthogonal to the unstable subspace of its source");
    v /= v.norm();
    State x0(d);
    for (std::size_t i = 0; i < d; ++i) x0[i] = src[i] + opt.start_offset * v(static_cast<Eigen::Index>(i));

    IntegratorOptions io;
    io.rel = opt.rel;
    io.abs = opt.abs;
    io.h_max = 0.05;
    bool left = c.source != c.target;
    const double leave_radius = std::max(1e3 * opt.start_offset, 1e-3);
    // Without an invariant subspace pinning the orbit, it only passes the
    // target at a small distance; stop once it starts receding.
    double closest = std::numeric_limits<double>::infinity();
    io.stop = [&](double, std::span<const double> x) {
        if (!left && distance(x, src) > leave_radius) left = true;
        if (!left) return false;
        const double r = distance(x, dst);
        closest = std::min(closest, r);
        return r < opt.end_tol || (closest < opt.capture_radius && r > 2.0 * closest);
    };
    const TrajectoryRecord rec = integrate(field, x0, opt.t_max, io);
    if (rec.status != IntegrationStatus::stopped)
        throw SpecError("geometry: connection " + std::to_string(connection) + " did not reach equilibrium " + std::to_string(c.target) +
                        " (" + to_string(rec.status) + ", t=" + std::to_string(rec.t_end()) + ")");
    std::size_t last = rec.size() - 1;
    if (!(distance(rec.state(last), dst) < opt.end_tol)) {
        std::size_t away = 0;
        if (c.source == c.target)
            while (away < last && !(distance(rec.state(away), src) > leave_radius)) ++away;
        for (std::size_t i = away; i < rec.size(); ++i)
            if (distance(rec.state(i), dst) < distance(rec.state(last), dst)) last = i;
    }

    std::vector<State> raw{src};
    const double fine = std::min(1e-3, opt.max_segment / 4);
    State tmp(d);
    for (std::size_t i = 0; i < last; ++i) {
        const double chord = distance(rec.state(i), rec.state(i + 1));
        const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(chord / fine)));
        for (std::size_t k = 0; k < m; ++k) {
            const double t = rec.times[i] + (rec.times[i + 1] - rec.times[i]) * static_cast<double>(k) / static_cast<double>(m);
            rec.hermite(i, t, tmp);
            raw.push_back(tmp);
        }
    }
    raw.emplace_back(rec.state(last).begin(), rec.state(last).end());
    raw.push_back(dst);

    Polyline pl;
    pl.connection = connection;
    pl.source = c.source;
    pl.target = c.target;
    double L = 0.0;
    for (std::size_t i = 1; i < raw.size(); ++i) L += distance(raw[i - 1], raw[i]);
    std::size_t n = opt.min_points;
    if (std::isfinite(opt.max_segment)) n = std::max(n, static_cast<std::size_t>(std::ceil(L / opt.max_segment * 1.01)) + 1);
    pl.points = detail::resample(raw, n);

    const double wd = pl.distance_to(c.witness);
    if (wd > opt.witness_tol)
        throw SpecError("geometry: witness of connection " + std::to_string(connection) + " is " + std::to_string(wd) +
                        " away from the traced orbit");
    return pl;
}

inline NetworkGeometry trace_network(const HeteroclinicNetwork& net, const VectorField& field, const TraceOptions& opt = {}) {
    if (field.dim != net.dim()) throw SpecError("geometry: field dimension " + std::to_string(field.dim) + " does not match network dimension " + std::to_string(net.dim()));
    std::map<int, State> eq;
    for (const auto& e : net.equilibria()) {
        const double r = norm(field(e.position));
        if (!(r < 1e-8)) throw SpecError("geometry: |f| = " + std::to_string(r) + " at equilibrium " + std::to_string(e.id));
        eq[e.id] = e.position;
    }
    std::vector<Polyline> pls;
    for (const auto& c : net.connections()) pls.push_back(trace_connection(net, field, c.id, opt));
    return NetworkGeometry(net.dim(), std::move(eq), std::move(pls));
}

}  // namespace hetnet
