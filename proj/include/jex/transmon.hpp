#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace jex {

/// Transmon defined by its charging and Josephson energies (strict SI joules)
/// in the Cooper-pair charge basis n = -N..N.
struct TransmonSpec {
    double charging_energy = 0.0;   // E_C, J
    double josephson_energy = 0.0;  // E_J, J
    double offset_charge = 0.0;     // n_g, dimensionless
    int charge_cutoff = 30;         // N, basis spans 2N+1 states
};

/// Diagonalized transmon. Level energies are angular frequencies referenced
/// to the ground state; the charge matrix uses the phase convention
/// n_{i,i+1} >= 0.
struct TransmonSpectrum {
    Eigen::VectorXd level_energies;   // q_j, rad/s, q_0 = 0
    Eigen::VectorXd transitions;      // q_{i,i+1} = q_{i+1} - q_i, rad/s
    double anharmonicity = 0.0;       // alpha = q_{1,2} - q_{0,1}, rad/s (negative for transmons)
    Eigen::MatrixXd charge_matrix;    // n_{i,j}, dimensionless
    bool converged = false;
    int cutoff_used = 0;
    std::vector<std::string> warnings;
};

/// Charge-basis Hamiltonian: diagonal 4 E_C (n - n_g)^2, off-diagonal -E_J/2.
/// Size (2N+1) x (2N+1), real symmetric tridiagonal. Entries in joules.
Eigen::MatrixXd build_charge_hamiltonian(const TransmonSpec& spec);

/// Diagonalize with automatic cutoff doubling until q_{0,1} is stable to
/// 1e-9 relative. Throws if the cutoff would exceed 200 before converging.
TransmonSpectrum solve_spectrum(const TransmonSpec& spec, int levels_kept = 5);

/// Invert q_{0,1}(E_J) for fixed E_C, n_g by bracketed bisection on the
/// monotone map. Returns E_J in joules reproducing the target to 1e-6
/// relative. Throws if the target leaves the transmon regime (E_J/E_C < 1).
double calibrate_ej(double target_q01_rad_s, double charging_energy, double offset_charge = 0.0);

/// E_C = e^2 / (2 C_total), then E_J from calibrate_ej.
TransmonSpec spec_from_capacitance(double c_total_farads, double target_q01_rad_s,
                                   double offset_charge = 0.0);

} // namespace jex
