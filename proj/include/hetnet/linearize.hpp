#pragma once

#include <algorithm>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/error.hpp"
#include "hetnet/vector_field.hpp"

namespace hetnet {

struct Linearization {
    Eigen::MatrixXd jacobian;
    // Sorted by real part, then imaginary part.
    std::vector<std::complex<double>> eigenvalues;
    // Column i belongs to eigenvalues[i].
    Eigen::MatrixXcd eigenvectors;
};

inline Eigen::MatrixXd fd_jacobian(const VectorField& field, std::span<const double> point, double fd_step = 1e-6) {
    const std::size_t d = field.dim;
    if (point.size() != d) throw DomainError("jacobian: point has wrong dimension");
    if (!(fd_step > 0.0)) throw DomainError("jacobian: fd_step must be positive");
    Eigen::MatrixXd J(d, d);
    State xp(point.begin(), point.end()), xm = xp, fp(d), fm(d);
    for (std::size_t j = 0; j < d; ++j) {
        xp[j] = point[j] + fd_step;
        xm[j] = point[j] - fd_step;
        field.rhs(xp.data(), fp.data());
        field.rhs(xm.data(), fm.data());
        for (std::size_t i = 0; i < d; ++i) J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (fp[i] - fm[i]) / (2.0 * fd_step);
        xp[j] = point[j];
        xm[j] = point[j];
    }
    return J;
}

inline Linearization linearize_at(const VectorField& field, std::span<const double> point, double fd_step = 1e-6) {
    const double r = norm(field(point));
    if (!(r < 1e-8)) throw DomainError("linearize_at: |f(point)| = " + std::to_string(r) + ", point is not an equilibrium");
    Linearization lin;
    lin.jacobian = fd_jacobian(field, point, fd_step);
    Eigen::EigenSolver<Eigen::MatrixXd> es(lin.jacobian);
    if (es.info() != Eigen::Success) throw Error("linearize_at: eigenvalue computation failed");
    const Eigen::Index d = lin.jacobian.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
    const auto ev = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
        return ev(a).imag() < ev(b).imag();
    });
    lin.eigenvectors.resize(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        lin.eigenvalues.push_back(ev(order[static_cast<std::size_t>(k)]));
        lin.eigenvectors.col(k) = es.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    }
    return lin;
}

// Orthonormal basis (columns) of the real span of eigenvectors with
// positive real part.
inline Eigen::MatrixXd unstable_basis(const Linearization& lin) {
    const Eigen::Index d = lin.jacobian.rows();
    Eigen::MatrixXd cols(d, 0);
    for (Eigen::Index k = 0; k < d; ++k) {
        if (lin.eigenvalues[static_cast<std::size_t>(k)].real() <= 0.0) continue;
        const Eigen::VectorXcd v = lin.eigenvectors.col(k);
        for (const Eigen::VectorXd& part : {Eigen::VectorXd(v.real()), Eigen::VectorXd(v.imag())}) {
            if (part.norm() < 1e-12) continue;
            cols.conservativeResize(d, cols.cols() + 1);
            cols.col(cols.cols() - 1) = part;
        }
    }
    if (cols.cols() == 0) return cols;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(cols);
    const Eigen::Index rank = qr.rank();
    Eigen::MatrixXd q = qr.householderQ();
    return q.leftCols(rank);
}

}  // namespace hetnet
