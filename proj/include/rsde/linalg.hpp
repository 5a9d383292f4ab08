#pragma once

#include <array>
#include <cassert>
#include <cmath>

namespace rsde {

// Ambient dimensions in this library are at most 4 (a product of two planar
// factors). Vec/Mat are fixed-capacity value types so the integrator inner
// loop never allocates.
inline constexpr int kMaxDim = 4;

struct Vec {
    int n = 0;
    std::array<double, kMaxDim> a{};

    Vec() = default;
    explicit Vec(int dim) : n(dim) { assert(dim >= 0 && dim <= kMaxDim); }
    Vec(double x, double y) : n(2) { a[0] = x; a[1] = y; }

    static Vec zero(int dim) { return Vec(dim); }
    static Vec scalar(double x) { Vec v(1); v.a[0] = x; return v; }

    double& operator[](int i) { return a[static_cast<size_t>(i)]; }
    double operator[](int i) const { return a[static_cast<size_t>(i)]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n; ++i) a[i] += o.a[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n; ++i) a[i] -= o.a[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n; ++i) a[i] *= s;
        return *this;
    }
};

inline Vec operator+(Vec u, const Vec& v) { return u += v; }
inline Vec operator-(Vec u, const Vec& v) { return u -= v; }
inline Vec operator*(double s, Vec v) { return v *= s; }
inline Vec operator*(Vec v, double s) { return v *= s; }
inline Vec operator-(Vec v) { return v *= -1.0; }

inline double dot(const Vec& u, const Vec& v) {
    double s = 0;
    for (int i = 0; i < u.n; ++i) s += u.a[i] * v.a[i];
    return s;
}

inline double norm2(const Vec& v) { return dot(v, v); }
inline double norm(const Vec& v) { return std::sqrt(norm2(v)); }

inline Vec normalized(const Vec& v) {
    double m = norm(v);
    Vec u = v;
    if (m > 0) u *= 1.0 / m;
    return u;
}

// 2D helpers.
inline double cross2(const Vec& u, const Vec& v) { return u[0] * v[1] - u[1] * v[0]; }
inline Vec perp2(const Vec& v) { return Vec(-v[1], v[0]); }  // 90 degree CCW rotation

// Concatenate two short vectors (product-domain states).
inline Vec concat(const Vec& u, const Vec& v) {
    Vec w(u.n + v.n);
    for (int i = 0; i < u.n; ++i) w[i] = u[i];
    for (int i = 0; i < v.n; ++i) w[u.n + i] = v[i];
    return w;
}

inline Vec head(const Vec& v, int k) {
    Vec u(k);
    for (int i = 0; i < k; ++i) u[i] = v[i];
    return u;
}

inline Vec tail(const Vec& v, int k) {
    Vec u(k);
    for (int i = 0; i < k; ++i) u[i] = v[v.n - k + i];
    return u;
}

// Dense row-major matrix, at most 4x4.
struct Mat {
    int rows = 0, cols = 0;
    std::array<double, kMaxDim * kMaxDim> a{};

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c) { assert(r <= kMaxDim && c <= kMaxDim); }

    static Mat identity(int r, int c) {
        Mat m(r, c);
        for (int i = 0; i < r && i < c; ++i) m.at(i, i) = 1.0;
        return m;
    }

    double& at(int i, int j) { return a[static_cast<size_t>(i * cols + j)]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i * cols + j)]; }

    Vec apply(const Vec& v) const {
        Vec out(rows);
        for (int i = 0; i < rows; ++i) {
            double s = 0;
            for (int j = 0; j < cols; ++j) s += at(i, j) * v[j];
            out[i] = s;
        }
        return out;
    }

    Vec col(int j) const {
        Vec out(rows);
        for (int i = 0; i < rows; ++i) out[i] = at(i, j);
        return out;
    }
};

}  // namespace rsde
