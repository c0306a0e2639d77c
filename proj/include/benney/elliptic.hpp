#pragma once

// Complete elliptic integrals K(m), E(m) and the Jacobi functions sn, cn, dn,
// parametrized by m = kappa^2 (the squared modulus).  K and E are computed by
// the arithmetic-geometric-mean iteration; sn/cn/dn by a descending Landen
// transformation seeded from the same AGM sequence.  Both converge
// quadratically and reach machine precision in at most a dozen iterations.

#include <cmath>
#include <stdexcept>
#include <string>

namespace benney {

struct JacobiTriple {
    double sn;
    double cn;
    double dn;
};

namespace detail {

inline constexpr double agm_tol = 1e-15;
inline constexpr int agm_max_iter = 32;
inline constexpr double degenerate_band = 1e-12; // closed forms near m = 0, 1

struct AgmSequence {
    double a[agm_max_iter];
    double c[agm_max_iter]; // c_i = (a_{i-1} - b_{i-1})/2 for i >= 1, c_0 = sqrt(m)
    int n = 0;              // index of the last computed mean
};

inline AgmSequence agm(double m) {
    AgmSequence s;
    double a = 1.0;
    double b = std::sqrt(1.0 - m);
    s.a[0] = a;
    s.c[0] = std::sqrt(m);
    int i = 0;
    while (i + 1 < agm_max_iter) {
        const double an = 0.5 * (a + b);
        const double cn = 0.5 * (a - b);
        b = std::sqrt(a * b);
        a = an;
        ++i;
        s.a[i] = a;
        s.c[i] = cn;
        if (cn < agm_tol) break;
    }
    s.n = i;
    return s;
}

[[noreturn]] inline void domain_fail(const char* fn, double m, const char* range) {
    throw std::domain_error(std::string(fn) + ": m = " + std::to_string(m) +
                            " outside " + range);
}

} // namespace detail

/// K(m) = int_0^1 dt / sqrt((1-t^2)(1-m t^2)), valid for 0 <= m < 1.
inline double complete_K(double m) {
    if (m < 0.0 || m >= 1.0) detail::domain_fail("complete_K", m, "[0,1)");
    const auto s = detail::agm(m);
    return M_PI / (2.0 * s.a[s.n]);
}

/// E(m) = int_0^1 sqrt((1-m t^2)/(1-t^2)) dt, valid for 0 <= m <= 1; E(1) = 1.
inline double complete_E(double m) {
    if (m < 0.0 || m > 1.0) detail::domain_fail("complete_E", m, "[0,1]");
    if (m == 1.0) return 1.0;
    const auto s = detail::agm(m);
    double sum = 0.5 * s.c[0] * s.c[0];
    double p = 1.0;
    for (int i = 1; i <= s.n; ++i) {
        sum += p * s.c[i] * s.c[i]; // p = 2^{i-1}
        p *= 2.0;
    }
    return complete_K(m) * (1.0 - sum);
}

namespace detail {

// Landen descent seeded from the AGM angles.  Accurate for moderate m, but
// loses roughly eps/(1-m) relative accuracy as m -> 1 (the asin steps become
// ill-conditioned), so it is only used below m = 1/2.
inline JacobiTriple jacobi_landen(double x, double m) {
    const auto s = agm(m);
    double phi = std::ldexp(s.a[s.n] * x, s.n);
    for (int i = s.n; i >= 1; --i) {
        const double t = std::asin(std::clamp(s.c[i] / s.a[i] * std::sin(phi), -1.0, 1.0));
        phi = 0.5 * (phi + t);
    }
    const double sn = std::sin(phi);
    const double cn = std::cos(phi);
    // dn from the defining identity; the textbook cos(phi1-phi0) quotient is
    // 0/0 near x = K(m).  dn > 0 everywhere on [0,1], so the root is safe.
    const double dn = std::sqrt(1.0 - m + m * cn * cn);
    return {sn, cn, dn};
}

// Complementary-nome lattice sums,
//   dn(u|m) = (pi/2K') sum_n sech(h(u - 2nK)),   h = pi/(2K'),
//   cn(u|m) = (pi/2kK') sum_n (-1)^n sech(h(u - 2nK)),
//   sn(u|m) = cd(u - K),
// which stay fully accurate as m -> 1 where the Landen descent degrades.
inline JacobiTriple jacobi_lattice(double x, double m) {
    const double m1 = 1.0 - m;
    const double k = std::sqrt(m);
    const auto sm = agm(m);
    const auto sc = agm(m1);
    const double K = M_PI / (2.0 * sm.a[sm.n]);
    const double Kp = M_PI / (2.0 * sc.a[sc.n]);
    const double h = M_PI / (2.0 * Kp);
    const double P = 2.0 * K * h; // lattice spacing in the scaled variable
    const auto sums = [&](double v) {
        const long n0 = std::lround(v / P);
        const int nterms = static_cast<int>(std::ceil(42.0 / P)) + 1;
        double plain = 0.0, alternating = 0.0;
        for (long n = n0 - nterms; n <= n0 + nterms; ++n) {
            const double s = 1.0 / std::cosh(v - n * P);
            plain += s;
            alternating += (n & 1L) ? -s : s;
        }
        return std::pair<double, double>{plain, alternating};
    };
    const double v = h * x;
    const auto [sum_dn, sum_cn] = sums(v);
    const auto [sum_dn_shift, sum_cn_shift] = sums(v - 0.5 * P);
    double sn = sum_cn_shift / (k * sum_dn_shift);
    double cn = h / k * sum_cn;
    const double norm = std::hypot(sn, cn); // re-pin sn^2 + cn^2 = 1
    sn /= norm;
    cn /= norm;
    return {sn, cn, std::sqrt(1.0 - m + m * cn * cn)};
}

} // namespace detail

/// (sn, cn, dn)(x; m) for 0 <= m <= 1 and finite x.
inline JacobiTriple jacobi(double x, double m) {
    if (m < 0.0 || m > 1.0) detail::domain_fail("jacobi", m, "[0,1]");
    if (!std::isfinite(x)) throw std::domain_error("jacobi: x must be finite");

    if (x == 0.0) return {0.0, 1.0, 1.0};
    if (x < 0.0) { // sn odd, cn and dn even
        auto j = jacobi(-x, m);
        return {-j.sn, j.cn, j.dn};
    }
    if (m <= detail::degenerate_band) {
        // Circular limit with the O(m) correction, so the Jacobi identities
        // hold to O(m^2) rather than O(m).
        const double su = std::sin(x), cu = std::cos(x);
        const double w = m * (x - su * cu) / 4.0;
        return {su - w * cu, cu + w * su, 1.0 - 0.5 * m * su * su};
    }
    if (m == 1.0) {
        const double se = 1.0 / std::cosh(x);
        return {std::tanh(x), se, se};
    }
    return m < 0.5 ? detail::jacobi_landen(x, m) : detail::jacobi_lattice(x, m);
}

// Derivatives with respect to the modulus kappa = sqrt(m); used by the
// closed-form Hessian entries.  Near kappa = 0 both formulas are 0/0, so we
// switch to the Maclaurin series.
inline double dK_dkappa(double m) {
    if (m < 0.0 || m >= 1.0) detail::domain_fail("dK_dkappa", m, "[0,1)");
    const double k = std::sqrt(m);
    if (k < 1e-8) return M_PI / 4.0 * k * (1.0 + 9.0 / 8.0 * m);
    return (complete_E(m) - (1.0 - m) * complete_K(m)) / (k * (1.0 - m));
}

inline double dE_dkappa(double m) {
    if (m < 0.0 || m > 1.0) detail::domain_fail("dE_dkappa", m, "[0,1]");
    const double k = std::sqrt(m);
    if (k < 1e-8) return -M_PI / 4.0 * k * (1.0 + 3.0 / 8.0 * m);
    return (complete_E(m) - complete_K(m)) / k;
}

} // namespace benney
