#pragma once

// Real orthonormal spherical harmonics on S^2 (no Condon-Shortley phase).
// Evaluated as polynomials in the Cartesian components of a unit vector so
// they stay smooth through the poles and can be instantiated with jets.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>

namespace aniso {

inline int sh_index(int l, int m) { return l * l + l + m; }
inline int sh_count(int lmax) { return (lmax + 1) * (lmax + 1); }

// sqrt((2l+1)/4pi * (l-m)!/(l+m)!) * (2m-1)!!, times sqrt(2) when m != 0
inline double sh_normalization(int l, int m) {
    const int am = m < 0 ? -m : m;
    double log_n = 0.5 * (std::log((2.0 * l + 1.0) / (4.0 * std::numbers::pi)) +
                          std::lgamma(l - am + 1.0) - std::lgamma(l + am + 1.0));
    // (2m-1)!! = (2m)! / (2^m m!)
    log_n += std::lgamma(2.0 * am + 1.0) - am * std::log(2.0) - std::lgamma(am + 1.0);
    double n = std::exp(log_n);
    if (m != 0) n *= std::numbers::sqrt2;
    return n;
}

template <class T>
T real_sh(int l, int m, const T& x, const T& y, const T& z) {
    const int am = m < 0 ? -m : m;
    // azimuthal factor Re/Im of (x + i y)^|m|
    T re(1.0), im(0.0);
    for (int k = 0; k < am; ++k) {
        T nre = re * x - im * y;
        T nim = re * y + im * x;
        re = nre;
        im = nim;
    }
    // Q_l^m(z) = P_l^m(z) / ((1-z^2)^{m/2} (2m-1)!!), three-term recurrence in l
    T q_prev(1.0);
    T q = q_prev;
    if (l > am) {
        T q_cur = z * (2.0 * am + 1.0);
        for (int k = am + 2; k <= l; ++k) {
            T q_next = (z * q_cur * (2.0 * k - 1.0) - q_prev * (k + am - 1.0)) / T(double(k - am));
            q_prev = q_cur;
            q_cur = q_next;
        }
        q = q_cur;
    }
    const double n = sh_normalization(l, m);
    if (m > 0) return q * re * n;
    if (m < 0) return q * im * n;
    return q * n;
}

inline double real_sh(int l, int m, const Eigen::Vector3d& p) { return real_sh<double>(l, m, p.x(), p.y(), p.z()); }

// All harmonics up to lmax at a unit vector, indexed by sh_index.
void real_sh_all(int lmax, const Eigen::Vector3d& p, std::vector<double>& out);

} // namespace aniso
