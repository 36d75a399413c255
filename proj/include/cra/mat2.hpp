#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace cra {

/// Dense 2x2 matrix, row major. Small enough that everything is by value.
struct Mat2 {
    double a00 = 0.0, a01 = 0.0;
    double a10 = 0.0, a11 = 0.0;

    double operator()(int r, int c) const {
        return r == 0 ? (c == 0 ? a00 : a01) : (c == 0 ? a10 : a11);
    }
};

inline Mat2 mat2_identity() { return {1.0, 0.0, 0.0, 1.0}; }

inline Mat2 operator*(const Mat2& l, const Mat2& r) {
    return {l.a00 * r.a00 + l.a01 * r.a10, l.a00 * r.a01 + l.a01 * r.a11,
            l.a10 * r.a00 + l.a11 * r.a10, l.a10 * r.a01 + l.a11 * r.a11};
}

inline Mat2 operator+(const Mat2& l, const Mat2& r) {
    return {l.a00 + r.a00, l.a01 + r.a01, l.a10 + r.a10, l.a11 + r.a11};
}

inline Mat2 operator*(double s, const Mat2& m) {
    return {s * m.a00, s * m.a01, s * m.a10, s * m.a11};
}

inline double mat2_det(const Mat2& m) { return m.a00 * m.a11 - m.a01 * m.a10; }

/// (I - c*M)^-1 by the adjugate formula. The determinant is strictly positive
/// for every matrix this library feeds in (c below the spectral radius bound),
/// so a non-positive determinant signals an upstream bug.
inline Mat2 resolvent(const Mat2& m, double c) {
    Mat2 s{1.0 - c * m.a00, -c * m.a01, -c * m.a10, 1.0 - c * m.a11};
    double det = mat2_det(s);
    if (!(det > 0.0))
        throw std::runtime_error("resolvent: singular 2x2 system (parameters out of domain)");
    double inv = 1.0 / det;
    return {s.a11 * inv, -s.a01 * inv, -s.a10 * inv, s.a00 * inv};
}

/// M^n by repeated squaring; n = 0 gives the identity.
inline Mat2 mat2_pow(Mat2 base, unsigned long long n) {
    Mat2 acc = mat2_identity();
    while (n > 0) {
        if (n & 1ull) acc = acc * base;
        base = base * base;
        n >>= 1;
    }
    return acc;
}

}  // namespace cra
