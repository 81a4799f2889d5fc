#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace aniso {

using Real = double;
using Vec = Eigen::VectorXd;   // ambient vectors, size 2 or 3
using Mat = Eigen::MatrixXd;

inline Vec vec2(Real x, Real y) {
    Vec v(2);
    v << x, y;
    return v;
}

inline Vec vec3(Real x, Real y, Real z) {
    Vec v(3);
    v << x, y, z;
    return v;
}

inline Vec cross3(const Vec& a, const Vec& b) {
    Vec c(3);
    c << a(1) * b(2) - a(2) * b(1),
         a(2) * b(0) - a(0) * b(2),
         a(0) * b(1) - a(1) * b(0);
    return c;
}

// 90-degree counterclockwise rotation in the plane.
inline Vec rot90(const Vec& a) {
    Vec c(2);
    c << -a(1), a(0);
    return c;
}

// Orthonormal basis of the hyperplane orthogonal to a unit vector.
// Columns span nu^perp; dimension (d x d-1).
inline Mat tangent_basis(const Vec& nu) {
    const auto d = nu.size();
    if (d == 2) {
        Mat t(2, 1);
        t.col(0) = rot90(nu);
        return t;
    }
    if (d == 3) {
        int k = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(nu(i)) < std::abs(nu(k))) k = i;
        Vec e = Vec::Zero(3);
        e(k) = 1.0;
        Mat t(3, 2);
        t.col(0) = (e - nu.dot(e) * nu).normalized();
        t.col(1) = cross3(nu, t.col(0));
        return t;
    }
    throw std::invalid_argument("tangent_basis: ambient dimension must be 2 or 3");
}

// Neumaier compensated accumulator. Keeps quadrature totals stable
// under re-partitioning of the node set.
class KahanSum {
public:
    void add(Real x) {
        const Real t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    Real value() const { return sum_ + comp_; }

private:
    Real sum_ = 0.0;
    Real comp_ = 0.0;
};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    Real uniform(Real a, Real b) {
        return std::uniform_real_distribution<Real>(a, b)(gen_);
    }
    Real normal() { return std::normal_distribution<Real>(0.0, 1.0)(gen_); }

    Vec gaussian_vector(int dim) {
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v(i) = normal();
        return v;
    }

    // Uniform on the unit sphere S^{dim-1}.
    Vec unit_vector(int dim) {
        Vec v = gaussian_vector(dim);
        while (v.norm() < 1e-12) v = gaussian_vector(dim);
        return v.normalized();
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace aniso
