#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hetnet/error.hpp"

namespace hetnet {

using State = std::vector<double>;

struct VectorField {
    std::string name;
    std::size_t dim = 0;
    // rhs(x, out): out = f(x); both arrays have length dim.
    std::function<void(const double*, double*)> rhs;
    std::map<std::string, double> params;
    std::vector<State> known_equilibria;

    State operator()(std::span<const double> x) const {
        if (x.size() != dim) throw DomainError("vector field '" + name + "': point has wrong dimension");
        State out(dim);
        rhs(x.data(), out.data());
        return out;
    }
};

inline double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Registration check: |f| < 1e-10 at every known equilibrium.
inline void check_known_equilibria(const VectorField& f) {
    for (const auto& p : f.known_equilibria) {
        const double r = norm(f(p));
        if (!(r < 1e-10)) throw SpecError("vector field '" + f.name + "': |f| = " + std::to_string(r) + " at a registered equilibrium");
    }
}

inline VectorField linear_field(std::vector<std::vector<double>> m, std::string name = "linear") {
    const std::size_t d = m.size();
    for (const auto& row : m)
        if (row.size() != d) throw SpecError("linear field: matrix must be square");
    VectorField f;
    f.name = std::move(name);
    f.dim = d;
    f.rhs = [m = std::move(m), d](const double* x, double* out) {
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += m[i][j] * x[j];
            out[i] = s;
        }
    };
    return f;
}

// Level function of the planar homoclinic loop: zero on the loop through
// the origin that encloses the centre at (1, 0) and crosses the x-axis at 1.5.
inline double homoclinic_level(double x, double y) { return 0.5 * y * y - 0.5 * x * x + x * x * x / 3.0; }

// Planar factor: s * (Hamiltonian flow of H - alpha * H * grad H).
// Eigenvalues at the origin are +s and -s.
inline void homoclinic_factor_rhs(double s, double alpha, double x, double y, double& dx, double& dy) {
    const double h = homoclinic_level(x, y);
    const double hx = -x + x * x;
    dx = s * (y - alpha * h * hx);
    dy = s * (-hx - alpha * h * y);
}

struct ProductHomoclinicParams {
    double c_A = 1.0, e_A = 1.0;
    double c_B = 1.0, e_B = 1.0;
    double alpha_A = 0.5, alpha_B = 0.5;

    double nu_A() const { return c_A / e_A; }
    double nu_B() const { return c_B / e_B; }
};

inline VectorField homoclinic_factor(double s, double alpha) {
    if (!(s > 0.0)) throw DomainError("homoclinic factor: rate must be positive");
    if (!(alpha > 0.0)) throw DomainError("homoclinic factor: alpha must be positive, the loop is not attracting otherwise");
    VectorField f;
    f.name = "homoclinic_factor";
    f.dim = 2;
    f.params = {{"s", s}, {"alpha", alpha}};
    f.rhs = [s, alpha](const double* x, double* out) { homoclinic_factor_rhs(s, alpha, x[0], x[1], out[0], out[1]); };
    f.known_equilibria = {State(2, 0.0)};
    return f;
}

// State order (x_A, y_A, x_B, y_B); factor A lives in the first plane.
inline VectorField product_homoclinic(const ProductHomoclinicParams& p) {
    for (double r : {p.c_A, p.e_A, p.c_B, p.e_B})
        if (!(r > 0.0)) throw DomainError("product_homoclinic: rates must be positive");
    if (p.c_A != p.e_A || p.c_B != p.e_B)
        throw DomainError("product_homoclinic: the factor recipe only realizes c = e (nu = 1)");
    if (!(p.alpha_A > 0.0) || !(p.alpha_B > 0.0))
        throw DomainError("product_homoclinic: alpha must be positive, the loops are not attracting otherwise");
    VectorField f;
    f.name = "product_homoclinic";
    f.dim = 4;
    f.params = {{"c_A", p.c_A}, {"e_A", p.e_A}, {"c_B", p.c_B}, {"e_B", p.e_B}, {"alpha_A", p.alpha_A}, {"alpha_B", p.alpha_B}};
    const double sA = p.c_A, sB = p.c_B, aA = p.alpha_A, aB = p.alpha_B;
    f.rhs = [sA, sB, aA, aB](const double* x, double* out) {
        homoclinic_factor_rhs(sA, aA, x[0], x[1], out[0], out[1]);
        homoclinic_factor_rhs(sB, aB, x[2], x[3], out[2], out[3]);
    };
    f.known_equilibria = {State(4, 0.0)};
    check_known_equilibria(f);
    return f;
}

using Matrix4 = std::vector<std::vector<double>>;

// Robust network found by search: cycles 1->2->3->1 and 1->4->5->1 through
// the axis equilibria, with itineraries of the form A^k B^inf.
inline Matrix4 kirk_silber_default_coefficients() {
    return {{1.0, 2.0, 0.0, 0.0}, {0.0, 1.0, 2.5, 3.5}, {2.0, 0.0, 1.0, 1.5}, {1.6, 0.0, 1.5, 1.0}};
}

inline std::vector<State> kirk_silber_equilibria(const Matrix4& a) {
    std::vector<State> out;
    for (std::size_t i = 0; i < 4; ++i) {
        State p(4, 0.0);
        p[i] = 1.0 / std::sqrt(a[i][i]);
        out.push_back(p);
    }
    return out;
}

// dx_i/dt = x_i (1 - sum_j a_ij x_j^2)
inline VectorField kirk_silber(const Matrix4& a) {
    if (a.size() != 4) throw DomainError("kirk_silber: coefficient matrix must be 4x4");
    for (const auto& row : a)
        if (row.size() != 4) throw DomainError("kirk_silber: coefficient matrix must be 4x4");
    for (std::size_t i = 0; i < 4; ++i)
        if (!(a[i][i] > 0.0)) throw DomainError("kirk_silber: diagonal coefficient a_" + std::to_string(i + 1) + std::to_string(i + 1) + " must be positive for the axis equilibrium to exist");
    VectorField f;
    f.name = "kirk_silber";
    f.dim = 4;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) f.params["a" + std::to_string(i + 1) + std::to_string(j + 1)] = a[i][j];
    double m[4][4];
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) m[i][j] = a[i][j];
    f.rhs = [m](const double* x, double* out) {
        const double s0 = x[0] * x[0], s1 = x[1] * x[1], s2 = x[2] * x[2], s3 = x[3] * x[3];
        for (int i = 0; i < 4; ++i) out[i] = x[i] * (1.0 - m[i][0] * s0 - m[i][1] * s1 - m[i][2] * s2 - m[i][3] * s3);
    };
    f.known_equilibria = kirk_silber_equilibria(a);
    check_known_equilibria(f);
    return f;
}

// Planar connection xi_i -> xi_j: xi_i is unstable in direction j and
// xi_j is stable in direction i (with unit diagonal, a_ji < 1 < a_ij).
inline bool kirk_silber_has_planar_connection(const Matrix4& a, std::size_t i, std::size_t j) {
    const double unstable_at_i = 1.0 - a[j][i] / a[i][i];
    const double stable_at_j = 1.0 - a[i][j] / a[j][j];
    return unstable_at_i > 0.0 && stable_at_j < 0.0;
}

struct Monomial {
    std::size_t component = 0;  // 0-based output index
    double coeff = 0.0;
    std::vector<unsigned> powers;
};

inline VectorField polynomial_field(std::size_t dim, std::vector<Monomial> terms, std::string name = "polynomial") {
    if (dim == 0) throw SpecError("polynomial field: dimension must be positive");
    for (const auto& t : terms) {
        if (t.component >= dim) throw SpecError("polynomial field: term component out of range");
        if (t.powers.size() != dim) throw SpecError("polynomial field: term exponent list has wrong length");
    }
    VectorField f;
    f.name = std::move(name);
    f.dim = dim;
    f.rhs = [terms = std::move(terms), dim](const double* x, double* out) {
        for (std::size_t i = 0; i < dim; ++i) out[i] = 0.0;
        for (const auto& t : terms) {
            double v = t.coeff;
            for (std::size_t k = 0; k < dim; ++k)
                for (unsigned p = 0; p < t.powers[k]; ++p) v *= x[k];
            out[t.component] += v;
        }
    };
    return f;
}

}  // namespace hetnet
