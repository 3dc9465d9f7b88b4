#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace bt_test {

/// n x k columns with sample correlation exactly rho between every pair: a shared
/// component plus private components, all centered and mutually orthonormal.
inline Eigen::MatrixXd equicorrelated(Eigen::Index n, Eigen::Index k, double rho, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXd raw(n, k + 2);
    raw.col(0).setOnes();
    for (Eigen::Index c = 1; c < k + 2; ++c)
        for (Eigen::Index i = 0; i < n; ++i) raw(i, c) = g(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ() * Eigen::MatrixXd::Identity(n, k + 2);
    Eigen::MatrixXd X(n, k);
    for (Eigen::Index c = 0; c < k; ++c) X.col(c) = std::sqrt(rho) * q.col(1) + std::sqrt(1.0 - rho) * q.col(c + 2);
    return X;
}

struct Planted {
    Eigen::VectorXd r, w;
    Eigen::MatrixXd X;
    double f0 = 0;
    Eigen::VectorXd lambda;
};

/// r = f0 + X lambda + sigma * eps with positive, uneven weights.
inline Planted planted(Eigen::Index n, Eigen::Index k, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.5, 2.0);
    Planted p;
    p.X.resize(n, k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index c = 0; c < k; ++c) p.X(i, c) = g(rng);
    p.w.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) p.w(i) = u(rng);
    p.w /= p.w.sum();
    p.f0 = 0.002;
    p.lambda.resize(k);
    for (Eigen::Index c = 0; c < k; ++c) p.lambda(c) = 0.001 * static_cast<double>(c + 1) * (c % 2 ? -1.0 : 1.0);
    p.r = Eigen::VectorXd::Constant(n, p.f0) + p.X * p.lambda;
    // Heteroskedastic in proportion to 1/sqrt(w) so the weighted fit is the efficient one.
    for (Eigen::Index i = 0; i < n; ++i) p.r(i) += sigma * g(rng) / std::sqrt(p.w(i) * static_cast<double>(n));
    return p;
}

}  // namespace bt_test
