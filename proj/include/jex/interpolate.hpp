#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>

namespace jex {

/// Monotonicity-preserving piecewise cubic interpolant (Fritsch-Carlson
/// slopes, the classic "pchip" rule). Exact at the knots, no overshoot
/// between samples of monotone data. Evaluation outside [x.front(), x.back()]
/// throws: extrapolated network data is meaningless downstream.
class PchipCurve {
public:
    PchipCurve() = default;

    PchipCurve(Eigen::VectorXd x, Eigen::VectorXd y) : x_(std::move(x)), y_(std::move(y)) {
        const auto n = x_.size();
        if (n < 2) throw std::invalid_argument("pchip: need at least two samples");
        if (y_.size() != n) throw std::invalid_argument("pchip: size mismatch");
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            if (!(x_[i] < x_[i + 1])) throw std::invalid_argument("pchip: abscissae not strictly increasing");
        }
        d_.resize(n);
        if (n == 2) {
            const double s = (y_[1] - y_[0]) / (x_[1] - x_[0]);
            d_[0] = d_[1] = s;
            return;
        }
        Eigen::VectorXd h(n - 1), delta(n - 1);
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            delta[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        for (Eigen::Index i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0.0) {
                d_[i] = 0.0;
            } else {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        d_[0] = endpoint_slope(h[0], h[1], delta[0], delta[1]);
        d_[n - 1] = endpoint_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    double operator()(double xq) const {
        const Eigen::Index k = locate(xq);
        const double t = xq - x_[k];
        const double hk = x_[k + 1] - x_[k];
        const double s = (y_[k + 1] - y_[k]) / hk;
        // Hermite cubic in local form.
        const double c2 = (3.0 * s - 2.0 * d_[k] - d_[k + 1]) / hk;
        const double c3 = (d_[k] + d_[k + 1] - 2.0 * s) / (hk * hk);
        return y_[k] + t * (d_[k] + t * (c2 + t * c3));
    }

    double derivative(double xq) const {
        const Eigen::Index k = locate(xq);
        const double t = xq - x_[k];
        const double hk = x_[k + 1] - x_[k];
        const double s = (y_[k + 1] - y_[k]) / hk;
        const double c2 = (3.0 * s - 2.0 * d_[k] - d_[k + 1]) / hk;
        const double c3 = (d_[k] + d_[k + 1] - 2.0 * s) / (hk * hk);
        return d_[k] + t * (2.0 * c2 + 3.0 * t * c3);
    }

    double x_min() const { return x_[0]; }
    double x_max() const { return x_[x_.size() - 1]; }
    const Eigen::VectorXd& knots() const { return x_; }

    /// Index of the interval [x_k, x_{k+1}] containing xq (inclusive bounds).
    Eigen::Index locate(double xq) const {
        const auto n = x_.size();
        if (xq < x_[0] || xq > x_[n - 1])
            throw std::domain_error("pchip: query outside tabulated range (no extrapolation)");
        Eigen::Index lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            const Eigen::Index mid = (lo + hi) / 2;
            if (x_[mid] <= xq) lo = mid; else hi = mid;
        }
        return lo;
    }

private:
    static double endpoint_slope(double h0, double h1, double del0, double del1) {
        // Three-point one-sided estimate with the standard pchip clamps.
        double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (d * del0 <= 0.0) {
            d = 0.0;
        } else if (del0 * del1 < 0.0 && std::abs(d) > 3.0 * std::abs(del0)) {
            d = 3.0 * del0;
        }
        return d;
    }

    Eigen::VectorXd x_, y_, d_;
};

/// Real/imaginary pair of pchip curves for tabulated complex data.
class ComplexPchipCurve {
public:
    ComplexPchipCurve() = default;
    ComplexPchipCurve(const Eigen::VectorXd& x, const Eigen::VectorXcd& y)
        : re_(x, y.real()), im_(x, y.imag()) {}

    std::complex<double> operator()(double xq) const { return {re_(xq), im_(xq)}; }
    const PchipCurve& real_part() const { return re_; }
    const PchipCurve& imag_part() const { return im_; }

private:
    PchipCurve re_, im_;
};

} // namespace jex
