#pragma once

#include "jex/netlist.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace jex {

/// Built-in oracle circuits used by the self-test suite and the CLI.
namespace fixtures {

/// Two grounded qubit pads bridged by a coupling capacitor.
Netlist pi_network(double c_q1, double c_q2, double c_c);

/// Ports coupled through small dead-end capacitors to a parallel-LC
/// resonator; the Z12 pole sits exactly at the bare tank frequency.
Netlist lc_coupler(double c_g, double resonance_rad_s, double c_tank);

/// Two grounded pads bridged by a single inductor; Z12 has no direct
/// capacitive path, the topology the vanishing-loss identity needs.
Netlist inductive_bridge(double c1, double c2, double resonance_rad_s);

/// Qubit pads coupled through an ideal transmission line (fundamental
/// open-open resonance at the given frequency).
Netlist tline_coupler(double c_q, double c_g, double fundamental_rad_s, double line_impedance);

/// Log grid over [lo, hi] with dense linear refinement around each center
/// (half-width as a fraction of the center).
Eigen::VectorXd log_grid_with_zoom(double lo, double hi, int base_points,
                                   const std::vector<std::pair<double, double>>& zooms,
                                   int zoom_points);

} // namespace fixtures

struct OracleCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

OracleCheck oracle_capacitive_equivalence();
OracleCheck oracle_pv_identity();
OracleCheck oracle_splitting_vs_modesum();
OracleCheck oracle_foster_monotonicity();

/// Run the named cross-validation checks; selector is a prefix match
/// ("all", "capacitive", "pv", "splitting", "foster"). Unknown selectors
/// throw std::invalid_argument.
std::vector<OracleCheck> run_oracle_checks(const std::string& selector);

} // namespace jex
