#include "jex/exchange.hpp"

#include "jex/quantities.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <vector>

namespace jex {

namespace {

void finish(ExchangeResult& r) { r.j_over_h_mhz = r.j / (constants::h * 1e6); }

std::string ghz_str(double omega) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g GHz", rad_s_to_ghz(omega));
    return buf;
}

/// True when a flagged or detected pole lies within `intervals` grid steps of
/// omega_eval.
bool pole_nearby(const ImpedanceTable& table, double omega_eval, int intervals) {
    const auto n = table.omega.size();
    Eigen::Index k = 0;
    while (k + 1 < n && table.omega[k + 1] < omega_eval) ++k;
    const Eigen::Index lo = std::max<Eigen::Index>(0, k - intervals);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, k + 1 + intervals);

    std::vector<double> candidates = table.flagged_poles;
    const auto detected = find_poles(table, table.omega_min(), table.omega_max());
    candidates.insert(candidates.end(), detected.begin(), detected.end());
    for (double p : candidates) {
        if (p >= table.omega[lo] && p <= table.omega[hi]) return true;
    }
    return false;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return adaptive_simpson(f, a, b, fa, fm, fb, tol, 28);
}

/// Integrate f over [a, b] splitting at the interpolant's knots so the
/// adaptive rule never straddles a piecewise-cubic seam.
double integrate_over_knots(const std::function<double(double)>& f, const Eigen::VectorXd& knots,
                            double a, double b, double rel_tol, double scale) {
    if (!(b > a)) return 0.0;
    double total = 0.0;
    Eigen::Index k = 0;
    const auto n = knots.size();
    double lo = a;
    while (lo < b) {
        while (k + 1 < n && knots[k + 1] <= lo) ++k;
        double hi = b;
        if (k + 1 < n && knots[k + 1] < b) hi = knots[k + 1];
        if (!(hi > lo)) break;
        total += integrate(f, lo, hi, rel_tol * scale * std::max(1e-3, (hi - lo) / (b - a)));
        lo = hi;
    }
    return total;
}

} // namespace

ExchangeResult j_impedance(const TransmonSpectrum& qubit1, const TransmonSpectrum& qubit2,
                           const ImpedanceTable& table, int level_i, int level_j) {
    if (table.ports < 2) throw std::invalid_argument("j_impedance: need a 2-port (or larger) table");
    if (level_i < 0 || level_i >= qubit1.transitions.size() || level_j < 0 ||
        level_j >= qubit2.transitions.size())
        throw std::invalid_argument("j_impedance: level index outside the solved spectrum");

    const double q1 = qubit1.transitions[level_i];
    const double q2 = qubit2.transitions[level_j];
    if (q1 < table.omega_min() || q1 > table.omega_max() || q2 < table.omega_min() ||
        q2 > table.omega_max())
        throw std::domain_error("j_impedance: transition frequency outside the tabulated grid");

    const double n1 = qubit1.charge_matrix(level_i, level_i + 1);
    const double n2 = qubit2.charge_matrix(level_j, level_j + 1);

    ExchangeResult r;
    r.route = ExchangeRoute::impedance;

    const ZInterpolant z12(table, 0, 1);
    const ZInterpolant z21(table, 1, 0);
    const InterpolatedZ v12 = z12.at(q1);
    const InterpolatedZ v21 = z21.at(q2);
    for (const auto& w : v12.warnings) r.warnings.push_back("Z12@q1: " + w);
    for (const auto& w : v21.warnings) r.warnings.push_back("Z21@q2: " + w);

    const double e2 = constants::e * constants::e;
    r.term1 = 2.0 * e2 * n1 * n2 * q1 * v12.value.imag();
    r.term2 = 2.0 * e2 * n2 * n1 * q2 * v21.value.imag();
    r.j = r.term1 + r.term2;

    if (table.discarded_loss > 1e-6) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "discarded loss: table max |Re Z|/|Z| = %.3g",
                      table.discarded_loss);
        r.warnings.emplace_back(buf);
    }
    for (double q : {q1, q2}) {
        if (pole_nearby(table, q, 3)) {
            r.unreliable = true;
            r.warnings.push_back("pole within 3 grid intervals of evaluation at " + ghz_str(q) +
                                 "; result unreliable");
        }
    }
    finish(r);
    return r;
}

ExchangeResult j_mode_sum(const ModeSet& modes, double q1, double q2, double scale1,
                          double scale2) {
    modes.validate();
    ExchangeResult r;
    r.route = ExchangeRoute::mode_sum;

    std::complex<double> acc1{0.0, 0.0}, acc2{0.0, 0.0};
    for (Eigen::Index k = 0; k < modes.count(); ++k) {
        const double wk = modes.omega[k];
        if (wk == q1 || wk == q2)
            throw std::runtime_error("j_mode_sum: exact resonance with mode at " + ghz_str(wk));
        const std::complex<double> g1 = scale1 * modes.g(k, 0);
        const std::complex<double> g2 = scale2 * modes.g(k, 1);
        for (auto [g, q] : {std::pair{g1, q1}, std::pair{g2, q2}}) {
            if (std::abs(g / (q - wk)) > 0.1) {
                r.warnings.push_back("mode at " + ghz_str(wk) +
                                     ": |g/(q-w)| > 0.1, dispersive assumption strained");
                break;
            }
        }
        const std::complex<double> t1 = std::conj(g1) * g2 / (q1 - wk);
        const std::complex<double> t2 = g1 * std::conj(g2) / (q2 - wk);
        acc1 += 0.5 * constants::hbar * t1;
        acc2 += 0.5 * constants::hbar * t2;
    }
    const std::complex<double> total = acc1 + acc2;
    r.term1 = acc1.real();
    r.term2 = acc2.real();
    r.j = total.real();
    if (std::abs(total.imag()) > 1e-9 * std::abs(total)) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "complex exchange amplitude: |Im J|/|J| = %.3g",
                      std::abs(total.imag()) / std::abs(total));
        r.warnings.emplace_back(buf);
    }
    finish(r);
    return r;
}

ExchangeResult j_capacitive(double c1, double c2, double cc, double q1, double q2) {
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("j_capacitive: C1, C2 must be > 0");
    if (cc < 0.0) throw std::invalid_argument("j_capacitive: Cc must be >= 0");
    if (!(q1 > 0.0) || !(q2 > 0.0)) throw std::invalid_argument("j_capacitive: frequencies must be > 0");
    ExchangeResult r;
    r.route = ExchangeRoute::capacitive;
    r.j = constants::hbar * 0.5 * (cc / std::sqrt(c1 * c2)) * std::sqrt(q1 * q2);
    r.term1 = r.term2 = 0.5 * r.j;
    finish(r);
    return r;
}

double fit_cc(double j_target, double c1, double c2, double q1, double q2) {
    if (j_target < 0.0) throw std::invalid_argument("fit_cc: J must be >= 0");
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("fit_cc: C1, C2 must be > 0");
    return 2.0 * (j_target / constants::hbar) * std::sqrt(c1 * c2) / std::sqrt(q1 * q2);
}

PvCheckResult pv_integral_check(const ImpedanceTable& table, double q,
                                const PvCheckOptions& options) {
    const int i = 0;
    const int j = table.ports >= 2 ? 1 : 0;
    PvCheckResult out;

    const ZInterpolant zij(table, i, j);
    out.reference = q * zij.imag_part()(q);  // throws if q outside the grid

    double max_re = 0.0, max_im = 0.0;
    for (const auto& m : table.z) {
        max_re = std::max(max_re, std::abs(m(i, j).real()));
        max_im = std::max(max_im, std::abs(m(i, j).imag()));
    }
    if (max_re <= 1e-12 * std::max(max_im, 1e-300)) {
        out.applicable = false;
        out.pv_value = 0.0;
        out.relative_gap = 1.0;
        out.warnings.push_back("lossless input - check not applicable");
        return out;
    }

    const double a = table.omega_min();
    const double b = table.omega_max();
    const auto& re = zij.real_part();

    // Band coverage: the Re Z peak mass must live inside the grid. Edge
    // values times edge frequency bound the tails of 1/w^2-type rolloff.
    double mass = 0.0;
    for (Eigen::Index k = 0; k + 1 < table.omega.size(); ++k) {
        const double f0 = std::abs(table.z[static_cast<std::size_t>(k)](i, j).real());
        const double f1 = std::abs(table.z[static_cast<std::size_t>(k) + 1](i, j).real());
        mass += 0.5 * (f0 + f1) * (table.omega[k + 1] - table.omega[k]);
    }
    const double tail = std::abs(re(a)) * a + std::abs(re(b)) * b;
    if (tail > 0.01 * mass)
        throw std::runtime_error("pv_integral_check: insufficient band coverage (Re Z mass outside grid)");

    auto integrand = [&](double w) {
        return (2.0 / constants::pi) * w * w * re(w) / ((w - q) * (w + q));
    };

    double delta = options.window > 0.0 ? options.window : 0.0;
    if (delta <= 0.0) {
        const Eigen::Index k = re.locate(q);
        const double h_local = table.omega[std::min(k + 1, table.omega.size() - 1)] - table.omega[k];
        delta = std::max(3.0 * h_local, 5e-3 * q);
    }
    if (!(q - delta > a) || !(q + delta < b))
        throw std::runtime_error("pv_integral_check: q too close to the grid edge for the window");

    const double scale = std::max(std::abs(out.reference), max_re * q) + 1e-300;
    const auto& knots = re.knots();
    auto pv_with_window = [&](double d) {
        return integrate_over_knots(integrand, knots, a, q - d, options.quad_rel_tol, scale) +
               integrate_over_knots(integrand, knots, q + d, b, options.quad_rel_tol, scale);
    };
    const double coarse = pv_with_window(delta);
    const double fine = coarse +
                        integrate_over_knots(integrand, knots, q - delta, q - 0.5 * delta,
                                             options.quad_rel_tol, scale) +
                        integrate_over_knots(integrand, knots, q + 0.5 * delta, q + delta,
                                             options.quad_rel_tol, scale);
    // Window bias is first order in the width: Richardson on (delta, delta/2).
    out.pv_value = 2.0 * fine - coarse;
    out.relative_gap = std::abs(out.pv_value - out.reference) /
                       std::max(std::abs(out.reference), 1e-300);
    return out;
}

} // namespace jex
