#include "agmon/quad.hpp"

#include <array>
#include <cmath>

namespace agmon {

namespace {

// 8-point Gauss-Legendre on [-1,1]
constexpr std::array<double, 8> kGlX = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlW = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

double gl8(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), s = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < 8; ++i) acc += kGlW[i] * f(c + s * kGlX[i]);
    return acc * s;
}

double rec(const std::function<double(double)>& f, double a, double b,
           double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double left = gl8(f, a, m), right = gl8(f, m, b);
    const double split = left + right;
    if (std::abs(split - whole) <= tol * (1.0 + std::abs(split))) return split;
    if (depth <= 0)
        throw numeric_error("adaptive quadrature did not converge (integrand not decaying?)");
    return rec(f, a, m, left, tol, depth - 1) + rec(f, m, b, right, tol, depth - 1);
}

} // namespace

double adaptive_gl(const std::function<double(double)>& f, double a, double b,
                   double tol, int max_depth) {
    if (a == b) return 0.0;
    return rec(f, a, b, gl8(f, a, b), tol, max_depth);
}

double periodic_integrate(const std::function<double(double)>& f, double tol) {
    const double two_pi = 2.0 * M_PI;
    int n = 8;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) prev += f(i * two_pi / n);
    prev *= two_pi / n;
    for (int it = 0; it < 14; ++it) {
        n *= 2;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += f(i * two_pi / n);
        acc *= two_pi / n;
        if (std::abs(acc - prev) <= tol * (1.0 + std::abs(acc))) return acc;
        prev = acc;
    }
    return prev;
}

} // namespace agmon
