#pragma once

// Second-order forward-mode automatic differentiation. A Jet<N> carries a
// value together with its gradient and Hessian with respect to N seed
// variables.

#include <Eigen/Core>
#include <cmath>

namespace aniso {

template <int N>
struct Jet {
    using Grad = Eigen::Matrix<double, N, 1>;
    using Hess = Eigen::Matrix<double, N, N>;

    double v = 0.0;
    Grad g = Grad::Zero();
    Hess h = Hess::Zero();

    Jet() = default;
    Jet(double value) : v(value) {} // NOLINT: constants promote implicitly

    static Jet variable(double value, int index) {
        Jet j(value);
        j.g[index] = 1.0;
        return j;
    }

    Jet& operator+=(const Jet& o) { v += o.v; g += o.g; h += o.h; return *this; }
    Jet& operator-=(const Jet& o) { v -= o.v; g -= o.g; h -= o.h; return *this; }
    Jet& operator*=(const Jet& o) { *this = *this * o; return *this; }
    Jet& operator/=(const Jet& o) { *this = *this / o; return *this; }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator-(const Jet& a) {
        Jet r;
        r.v = -a.v; r.g = -a.g; r.h = -a.h;
        return r;
    }
    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r;
        r.v = a.v * b.v;
        r.g = a.g * b.v + b.g * a.v;
        r.h = a.h * b.v + b.h * a.v + a.g * b.g.transpose() + b.g * a.g.transpose();
        return r;
    }
    friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

    // f(a) given f, f', f'' at a.v
    static Jet chain(const Jet& a, double f0, double f1, double f2) {
        Jet r;
        r.v = f0;
        r.g = f1 * a.g;
        r.h = f1 * a.h + f2 * a.g * a.g.transpose();
        return r;
    }

    friend Jet reciprocal(const Jet& a) {
        const double inv = 1.0 / a.v;
        return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
    }
};

template <int N>
Jet<N> sqrt(const Jet<N>& a) {
    const double s = std::sqrt(a.v);
    return Jet<N>::chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

template <int N>
Jet<N> sin(const Jet<N>& a) {
    return Jet<N>::chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v));
}

template <int N>
Jet<N> cos(const Jet<N>& a) {
    return Jet<N>::chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v));
}

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Jet<N>& x) { return x.v; }

} // namespace aniso
