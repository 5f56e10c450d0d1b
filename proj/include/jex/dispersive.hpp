#pragma once

#include "jex/netlist.hpp"
#include "jex/transmon.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace jex {

/// Multilevel qubit stripped to what the coupled model needs: nearest
/// neighbor transition frequencies and charge-element ratios against the 0-1
/// element (so ratio[0] = 1).
struct QubitLevels {
    Eigen::VectorXd transitions;   // q_{i,i+1}, rad/s, size L-1
    Eigen::VectorXd charge_ratio;  // n_{i,i+1}/n_{0,1}, size L-1

    int levels() const { return static_cast<int>(transitions.size()) + 1; }
};

QubitLevels qubit_levels_from_spectrum(const TransmonSpectrum& spectrum, int levels);

/// Two multilevel qubits coupled to an explicit mode set under the
/// rotating-wave interaction.
struct FullSystem {
    QubitLevels qubit1, qubit2;
    ModeSet modes;
    int photon_cutoff = 3;   // per mode; dimension (cutoff+1)^modes

    long dimension() const;
    void validate() const;   // L >= 3 per qubit, dimension <= 2e4, dispersive inputs
};

struct EffectiveModel {
    Eigen::MatrixXd chi1, chi2;        // dispersive shifts chi_{i,k}, rad/s, (L-1) x modes
    Eigen::MatrixXcd exchange;         // J_{ij}, joules, (L1-1) x (L2-1)
    double residual_off_block = -1.0;  // scaled SW residual; -1 if skipped
    std::vector<std::string> warnings;
};

/// Full multilevel Hamiltonian in the ordered basis (qubit1, qubit2, photon
/// numbers), entries in angular frequency (H/hbar, rad/s).
Eigen::MatrixXcd build_full_hamiltonian(const FullSystem& sys);

/// First-order Schrieffer-Wolff generator as the anti-Hermitian matrix iS1,
/// B_{i,k} = g_{i,k}/(q_{i,i+1} - w_k). Same units/basis as the Hamiltonian.
Eigen::MatrixXcd build_sw_generator(const FullSystem& sys);

/// Max off-photon-block Frobenius norm of e^{iS1} H e^{-iS1}, divided by
/// max |g| (both in rad/s). Second order in the coupling.
double sw_block_residual(const FullSystem& sys);

struct HeffResult {
    Eigen::MatrixXcd matrix;   // rad/s, same basis as build_full_hamiltonian
    EffectiveModel model;
};

/// Second-order effective Hamiltonian: dispersive shifts, photon-number
/// dependent pulls, and the qubit-qubit exchange block.
HeffResult build_heff(const FullSystem& sys);

/// Exact-diagonalization route to J for degenerate qubits: identify the
/// single-excitation qubit-like doublet by overlap with |10>, |01> (zero
/// photons) and read the signed coupling off the projected 2x2 block.
/// Returns joules.
double extract_j_from_splitting(const FullSystem& sys);

} // namespace jex
