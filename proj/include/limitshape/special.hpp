#pragma once
// Dilogarithm, Clausen/Lobachevsky functions.
#include <boost/math/special_functions/bernoulli.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "errors.hpp"

namespace limitshape {

using cplx = std::complex<double>;

namespace detail {

// Li2 for |z| <= 1, Re z <= 1/2 via the Bernoulli series in u = -log(1-z)
inline cplx li2_core(cplx z) {
    const cplx u = -std::log(1.0 - z);
    const cplx u2 = u * u;
    cplx sum = u - 0.25 * u2;
    cplx p = u;  // u^{2k+1}/(2k+1)!
    double fact = 1.0;
    for (int k = 1; k <= 30; ++k) {
        p *= u2;
        fact *= double((2 * k) * (2 * k + 1));
        const cplx term = boost::math::bernoulli_b2n<double>(k) * p / fact;
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace detail

// principal branch, cut on [1, inf)
inline cplx dilog(cplx z) {
    constexpr double pi2_6 = std::numbers::pi * std::numbers::pi / 6.0;
    if (z.imag() == 0.0 && z.real() > 1.0) throw BranchCut("dilog on the real cut z > 1");
    if (z == cplx(0.0)) return 0.0;
    if (z == cplx(1.0)) return pi2_6;
    if (std::abs(z) > 1.0) {
        const cplx l = std::log(-z);
        return -dilog(1.0 / z) - pi2_6 - 0.5 * l * l;
    }
    if (z.real() > 0.5) {
        return -detail::li2_core(1.0 - z) + pi2_6 - std::log(z) * std::log(1.0 - z);
    }
    return detail::li2_core(z);
}

// Cl2(theta) = -int_0^theta log|2 sin(t/2)| dt
inline double clausen2(double theta) {
    constexpr double pi = std::numbers::pi;
    theta = std::remainder(theta, 2.0 * pi);  // into [-pi, pi]
    if (theta == 0.0) return 0.0;
    double sign = 1.0;
    if (theta < 0) {
        sign = -1.0;
        theta = -theta;
    }
    // series valid for |theta| < 2 pi; fold to [0, pi/2] is unnecessary at this accuracy
    double s = theta - theta * std::log(theta);
    const double t2 = theta * theta;
    double p = theta;
    double fact = 1.0;
    for (int n = 1; n <= 60; ++n) {
        p *= t2;
        fact *= double((2 * n) * (2 * n + 1));
        const double term = std::abs(boost::math::bernoulli_b2n<double>(n)) * p / (2.0 * n * fact);
        s += term;
        if (term < 1e-18 * std::abs(s)) break;
    }
    return sign * s;
}

// L(x) = -int_0^x log|2 sin t| dt
inline double lobachevsky(double x) { return 0.5 * clausen2(2.0 * x); }

}  // namespace limitshape
