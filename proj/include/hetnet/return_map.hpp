#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "hetnet/error.hpp"

namespace hetnet {

struct ReturnMapParams {
    double c = 1.0;
    double e = 1.0;
    double c_tilde = -1.0;
    double c_hat = 1.0;
    double eps = 1.0;
    double delta0 = 0.5;

    double nu() const { return c / e; }

    void validate() const {
        if (!(c > 0.0) || !(e > 0.0)) throw DomainError("return map: rates c and e must be positive");
        if (!(eps > 0.0)) throw DomainError("return map: eps must be positive");
        if (!(c_hat > 0.0)) throw DomainError("return map: c_hat must be positive");
        if (!(c_tilde < 0.0)) throw DomainError("return map: c_tilde must be negative");
        if (!(delta0 > 0.0 && delta0 < eps)) throw DomainError("return map: delta0 must lie in (0, eps)");
    }
};

namespace detail {

// (1 - nu^n) / (1 - nu), with the nu = 1 limit n.
inline double geometric_sum(double nu, double n) {
    const double l = std::log(nu);
    if (l == 0.0) return n;
    return std::expm1(n * l) / std::expm1(l);
}

inline void require_unit_interval(double delta, const char* what) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError(std::string(what) + ": delta must lie in (0, 1)");
}

}  // namespace detail

inline double local_map(double delta, const ReturnMapParams& p, bool simplified = false) {
    if (!(delta > 0.0)) throw DomainError("local_map: delta must be positive");
    if (!(delta < p.eps)) throw DomainError("local_map: delta must be below eps");
    const double v = std::pow(delta, p.nu());
    return simplified ? v : p.c_hat * v;
}

struct LocalMapOrbit {
    std::vector<double> values;
    bool underflow = false;
};

inline LocalMapOrbit iterate_local_map(double delta0, double nu, std::size_t n) {
    if (!(delta0 > 0.0)) throw DomainError("iterate_local_map: delta0 must be positive");
    if (!(delta0 < 1.0)) throw DomainError("iterate_local_map: delta0 must be below 1");
    if (!(nu > 0.0)) throw DomainError("iterate_local_map: nu must be positive");
    LocalMapOrbit out;
    out.values.reserve(n + 1);
    const double l0 = std::log(delta0);
    const double lnu = std::log(nu);
    for (std::size_t k = 0; k <= n; ++k) {
        const double v = std::exp(std::exp(static_cast<double>(k) * lnu) * l0);
        if (v < std::numeric_limits<double>::min()) {
            out.underflow = true;
            out.values.push_back(0.0);
        } else {
            out.values.push_back(v);
        }
    }
    return out;
}

inline double transition_time(double delta, double c_tilde) {
    detail::require_unit_interval(delta, "transition_time");
    if (!(c_tilde < 0.0)) throw DomainError("transition_time: c_tilde must be negative");
    return c_tilde * std::log(delta);
}

inline double transition_time(double delta, const ReturnMapParams& p) { return transition_time(delta, p.c_tilde); }

inline double total_time_n_turns(double delta0, double nu, double n, double c_tilde) {
    detail::require_unit_interval(delta0, "total_time_n_turns");
    if (!(nu > 0.0)) throw DomainError("total_time_n_turns: nu must be positive");
    if (!(n >= 1.0)) throw DomainError("total_time_n_turns: n must be at least 1");
    if (!(c_tilde < 0.0)) throw DomainError("total_time_n_turns: c_tilde must be negative");
    return c_tilde * std::log(delta0) * detail::geometric_sum(nu, n);
}

inline double turns_in_time(double T, double delta0, double nu, double c_tilde) {
    detail::require_unit_interval(delta0, "turns_in_time");
    if (!(T > 0.0)) throw DomainError("turns_in_time: T must be positive");
    if (!(nu > 0.0)) throw DomainError("turns_in_time: nu must be positive");
    if (!(c_tilde < 0.0)) throw DomainError("turns_in_time: c_tilde must be negative");
    const double unit = c_tilde * std::log(delta0);
    const double l = std::log(nu);
    if (l == 0.0) return T / unit;
    // T / unit = expm1(n l) / expm1(l)
    const double arg = T / unit * std::expm1(l);
    if (!(arg > -1.0)) throw DomainError("turns_in_time: saturation, no finite number of turns takes time " + std::to_string(T));
    return std::log1p(arg) / l;
}

inline double n_of_m(double m, double nu_A, double nu_B) {
    if (!(nu_A > 0.0) || !(nu_B > 0.0)) throw DomainError("n_of_m: nu_A and nu_B must be positive");
    const double lA = std::log(nu_A);
    if (lA == 0.0) throw DomainError("n_of_m: nu_A must differ from 1");
    // 1 - (1-nu_A)/(1-nu_B) (1-nu_B^m) = 1 + expm1(lA) * S_B(m)
    const double x = std::expm1(lA) * detail::geometric_sum(nu_B, m);
    const double lB = std::log(nu_B);
    // Near the critical point 1 + x cancels away the nu_B^m term. The regrouped
    // form (nu_A - nu_B)/(1 - nu_B) + r nu_B^m, r = (1 - nu_A)/(1 - nu_B), keeps
    // it but cancels itself when nu_B is close to 1; take the better conditioned.
    double arg = 1.0 + x;
    bool regrouped = false;
    if (lB != 0.0) {
        const double head = (nu_A - nu_B) / -std::expm1(lB);
        const double tail = std::expm1(lA) / std::expm1(lB) * std::exp(m * lB);
        const double alt = head + tail;
        if ((std::abs(head) + std::abs(tail)) * std::abs(arg) < (1.0 + std::abs(x)) * std::abs(alt)) {
            arg = alt;
            regrouped = true;
        }
    }
    if (!(arg > 0.0)) {
        // critical m: where 1 + expm1(lA) S_B(m) reaches 0
        std::string crit = "none";
        if (nu_A < 1.0) {
            const double target = -1.0 / std::expm1(lA);
            double mc = lB == 0.0 ? target : std::log1p(target * std::expm1(lB)) / lB;
            if (std::isfinite(mc)) crit = std::to_string(mc);
        }
        throw DomainError("n_of_m: log argument nonpositive at m=" + std::to_string(m) + " (critical m=" + crit + ")");
    }
    return regrouped ? std::log(arg) / lA : std::log1p(x) / lA;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_abs_residual = 0.0;
    double max_rel_residual = 0.0;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw DomainError("fit_line: need at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::abs(y[i] - (f.slope * x[i] + f.intercept));
        f.max_abs_residual = std::max(f.max_abs_residual, r);
        if (y[i] != 0.0) f.max_rel_residual = std::max(f.max_rel_residual, r / std::abs(y[i]));
    }
    return f;
}

struct TurnCountReport {
    double nu_A = 0, nu_B = 0;
    std::vector<double> m;
    std::vector<double> n;
    LinearFit tail_fit;
    // ln nu_B / ln nu_A; a conjectured asymptotic slope, not a proven one.
    double conjectured_slope = 0;
    // Slopes of fits over [m_lo, m_hi] with m_lo increasing (shrinking window).
    std::vector<double> slope_scan;
};

inline TurnCountReport asymptotic_linearity_report(double nu_A, double nu_B, int m_lo, int m_hi) {
    if (!(nu_A > 1.0) || !(nu_B > 1.0)) throw DomainError("asymptotic_linearity_report: both nu must exceed 1");
    if (m_lo < 1 || m_hi - m_lo < 3) throw DomainError("asymptotic_linearity_report: m range needs at least 4 points starting at 1");
    TurnCountReport r;
    r.nu_A = nu_A;
    r.nu_B = nu_B;
    for (int m = m_lo; m <= m_hi; ++m) {
        r.m.push_back(m);
        r.n.push_back(n_of_m(m, nu_A, nu_B));
    }
    const std::size_t half = r.m.size() / 2;
    std::vector<double> tx(r.m.begin() + static_cast<std::ptrdiff_t>(half), r.m.end());
    std::vector<double> ty(r.n.begin() + static_cast<std::ptrdiff_t>(half), r.n.end());
    r.tail_fit = fit_line(tx, ty);
    r.conjectured_slope = std::log(nu_B) / std::log(nu_A);
    for (std::size_t s = 0; s + 2 < r.m.size(); ++s) {
        std::vector<double> x(r.m.begin() + static_cast<std::ptrdiff_t>(s), r.m.end());
        std::vector<double> y(r.n.begin() + static_cast<std::ptrdiff_t>(s), r.n.end());
        r.slope_scan.push_back(fit_line(x, y).slope);
    }
    return r;
}

enum class Stability { stable, unstable, boundary };

inline Stability cycle_stability(double c, double e) {
    if (!(c > 0.0) || !(e > 0.0)) throw DomainError("cycle_stability: rates must be positive");
    if (c > e) return Stability::stable;
    if (c < e) return Stability::unstable;
    return Stability::boundary;
}

inline const char* to_string(Stability s) {
    switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::boundary: return "boundary";
    }
    return "";
}

}  // namespace hetnet
