#pragma once

#include "jex/netlist.hpp"
#include "jex/network.hpp"
#include "jex/transmon.hpp"

#include <string>
#include <vector>

namespace jex {

enum class ExchangeRoute { impedance, mode_sum, capacitive };

/// Exchange coupling rate with its per-term breakdown. J is an energy; the
/// reported rate J/h is cyclic MHz to match how such numbers are quoted.
struct ExchangeResult {
    double j = 0.0;          // joules
    double j_over_h_mhz = 0.0;
    ExchangeRoute route = ExchangeRoute::impedance;
    double term1 = 0.0;      // qubit-1-frequency branch, joules
    double term2 = 0.0;      // qubit-2-frequency branch, joules
    bool unreliable = false; // pole flagged near an evaluation point
    std::vector<std::string> warnings;
};

/// J = 2 e^2 [ n1 n2 q1 Im Z12(q1) + n2 n1 q2 Im Z21(q2) ] evaluated at the
/// i,i+1 / j,j+1 transitions (default 0,1). Re Z is discarded; the table's
/// discarded-loss metric and pole-proximity warnings propagate into the
/// result. A pole flagged within 3 grid intervals of an evaluation point
/// marks the result unreliable but still returns it.
ExchangeResult j_impedance(const TransmonSpectrum& qubit1, const TransmonSpectrum& qubit2,
                           const ImpedanceTable& table, int level_i = 0, int level_j = 0);

/// Finite mode sum J = sum_k (hbar/2) [ g1* g2 / (q1 - w_k) + g1 g2* / (q2 - w_k) ].
/// scale1/scale2 are the charge-element ratios n_{i,i+1}/n_{0,1} that promote
/// the stored j=0 couplings to higher transitions (1 for the 0-1 rate).
ExchangeResult j_mode_sum(const ModeSet& modes, double q1, double q2,
                          double scale1 = 1.0, double scale2 = 1.0);

/// Direct capacitive-coupling estimate J/hbar = (1/2) (Cc / sqrt(C1 C2)) sqrt(q1 q2).
ExchangeResult j_capacitive(double c1, double c2, double cc, double q1, double q2);

/// Exact inversion of the capacitive formula for the coupling capacitance.
double fit_cc(double j_target, double c1, double c2, double q1, double q2);

struct PvCheckResult {
    double pv_value = 0.0;     // principal-value integral, rad/s * ohm
    double reference = 0.0;    // q Im Z12(q) from the table, rad/s * ohm
    double relative_gap = 0.0;
    bool applicable = true;    // false for lossless input
    std::vector<std::string> warnings;
};

struct PvCheckOptions {
    double window = 0.0;        // exclusion half-width around q; 0 = automatic
    double quad_rel_tol = 1e-9; // adaptive Simpson tolerance per knot interval
};

/// Numerical check of the vanishing-loss identity
///   (2/pi) P.V. int_0^inf w^2 Re Z12(w) / (w^2 - q^2) dw  ->  q Im Z12(q),
/// the positive-frequency fold of the Hilbert-transform step that turns the
/// mode-continuum integral into the impedance formula. Computed by adaptive
/// Simpson on the table's interpolant with a symmetric exclusion window
/// around q, Richardson-extrapolated in the window width.
PvCheckResult pv_integral_check(const ImpedanceTable& table, double q,
                                const PvCheckOptions& options = {});

} // namespace jex
