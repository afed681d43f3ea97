#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rewardlab/errors.hpp"

namespace rewardlab {

/// Dense rank-3 tensor indexed [s][a][s'], stored row-major.
/// Shared representation for transition functions, reward tables and
/// per-transition weight tensors.
struct Tensor3 {
    int dim_s = 0;
    int dim_a = 0;
    int dim_s2 = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(int s, int a, int s2, double fill = 0.0)
        : dim_s(s), dim_a(a), dim_s2(s2),
          data(static_cast<std::size_t>(s) * a * s2, fill) {}

    double& operator()(int s, int a, int s2) {
        return data[(static_cast<std::size_t>(s) * dim_a + a) * dim_s2 + s2];
    }
    double operator()(int s, int a, int s2) const {
        return data[(static_cast<std::size_t>(s) * dim_a + a) * dim_s2 + s2];
    }

    /// Pointer to the contiguous [s][a][.] row.
    const double* row(int s, int a) const {
        return data.data() + (static_cast<std::size_t>(s) * dim_a + a) * dim_s2;
    }
    double* row(int s, int a) {
        return data.data() + (static_cast<std::size_t>(s) * dim_a + a) * dim_s2;
    }

    std::size_t size() const { return data.size(); }

    bool same_shape(const Tensor3& other) const {
        return dim_s == other.dim_s && dim_a == other.dim_a && dim_s2 == other.dim_s2;
    }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data) m = std::max(m, std::abs(v));
        return m;
    }

    Tensor3& operator+=(const Tensor3& other) {
        for (std::size_t i = 0; i < data.size(); ++i) data[i] += other.data[i];
        return *this;
    }
    Tensor3& operator-=(const Tensor3& other) {
        for (std::size_t i = 0; i < data.size(); ++i) data[i] -= other.data[i];
        return *this;
    }
    Tensor3& operator*=(double c) {
        for (double& v : data) v *= c;
        return *this;
    }

    friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
    friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
    friend Tensor3 operator*(double c, Tensor3 a) { return a *= c; }
};

inline void require_same_shape(const Tensor3& a, const Tensor3& b, const char* what) {
    if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, what);
}

inline double dot(const Tensor3& a, const Tensor3& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
    return acc;
}

inline double sup_diff(const Tensor3& a, const Tensor3& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

/// Reward tables are dense per-transition tensors with the same layout as
/// the transition function they accompany.
using RewardTable = Tensor3;

} // namespace rewardlab
