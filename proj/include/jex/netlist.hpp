#pragma once

#include "jex/network.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace jex {

/// Explicit list of EM modes with per-qubit coupling rates, the j = 0
/// manifold values; higher-level couplings scale by charge-element ratios.
struct ModeSet {
    Eigen::VectorXd omega;   // rad/s, strictly increasing, all > 0
    Eigen::MatrixXcd g;      // modes x 2, coupling rate g_{0,k}^{(l)} in rad/s

    Eigen::Index count() const { return omega.size(); }
    void validate() const;
};

enum class ElementKind { capacitor, inductor, resistor, tline };

struct NetlistElement {
    ElementKind kind = ElementKind::capacitor;
    std::string node_a, node_b;
    double value = 0.0;    // C in F, L in H, R in ohm, TLINE characteristic impedance in ohm
    double value2 = 0.0;   // TLINE one-way delay in seconds
};

struct NetlistPort {
    std::string node_pos, node_neg;
};

/// Small lumped / transmission-line circuit with a designated ground node
/// ("0" or "gnd"). Serves as the exact analytic oracle for the impedance
/// pipeline.
struct Netlist {
    std::vector<NetlistElement> elements;
    std::vector<NetlistPort> ports;

    void validate() const;   // connectivity after grounding, positive values, ports exist
};

/// Text format: one element per line `C|L|R nodeA nodeB value`,
/// `T nodeA nodeB z0 tau`, `PORT n node+ node-`, `!` comments.
Netlist parse_netlist(std::string_view text);
std::string serialize_netlist(const Netlist& netlist);

/// Exact multi-port Z(omega) by modified nodal analysis with dense complex
/// solves. Grid points where the admittance matrix is singular (exact pole
/// hits) are skipped and recorded in flagged_poles.
ImpedanceTable evaluate_z(const Netlist& netlist, const Eigen::VectorXd& omega_grid);

/// Point evaluation used by pole refinement.
Eigen::MatrixXcd evaluate_z_at(const Netlist& netlist, double omega);

/// Insert series resistances into every inductor so the first resonance has
/// quality factor ~ q_target. q_target = +inf returns the netlist unchanged.
Netlist add_series_loss(const Netlist& netlist, double q_target);

/// Frequencies in [omega_lo, omega_hi] where Im Z_12 (Z_11 for one-ports)
/// changes sign with diverging magnitude on both flanks. With a netlist the
/// brackets are refined by bisection on the sign of 1/Im Z to 1e-9 relative;
/// table-only inputs return bracket midpoints.
std::vector<double> find_poles(const ImpedanceTable& table, double omega_lo, double omega_hi,
                               const Netlist* refine_with = nullptr);

} // namespace jex
