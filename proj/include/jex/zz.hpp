#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace jex {

/// One Duffing mode: frequency and (positive) anharmonicity, the -alpha/2
/// b+b+bb convention.
struct DuffingMode {
    double frequency = 0.0;      // rad/s
    double anharmonicity = 0.0;  // rad/s, > 0
};

/// Two qubits and a tunable coupler with pairwise exchange couplings.
struct DuffingSystem {
    DuffingMode qubit1, qubit2, coupler;
    double j12 = 0.0, j1c = 0.0, j2c = 0.0;  // joules
    int truncation = 5;                       // per-mode levels, >= 3

    void validate() const;
};

/// Bare-label -> dressed-eigenstate assignment for the four states entering
/// the ZZ rate, plus the worst squared overlap ("label quality").
struct StateAssignment {
    std::array<long, 4> dressed_index{};   // order: |000>, |100>, |010>, |110>
    std::array<double, 4> overlap_sq{};
    double quality = 0.0;                  // min of overlap_sq
};

struct ZZCurve {
    Eigen::VectorXd coupler_freq;          // rad/s
    Eigen::VectorXd zeta;                  // rad/s
    std::vector<double> label_quality;     // per grid point
    std::vector<int> failed_points;        // labeling failures, excluded from brackets
    std::vector<double> crossings;         // rad/s
};

/// Sampled J_1c, J_2c curves on the coupler-frequency grid.
struct CouplerCurves {
    Eigen::VectorXd coupler_freq;  // rad/s, strictly increasing
    Eigen::VectorXd j1c, j2c;      // joules
};

/// Tensor Duffing Hamiltonian over (qubit1, qubit2, coupler), entries in
/// rad/s (H/hbar). Dimension d^3 guarded at 4096.
Eigen::MatrixXd build_duffing_hamiltonian(const DuffingSystem& sys);

/// Injective max-overlap assignment of the needed bare labels, resolved
/// globally over top candidates on conflicts. Throws when any squared
/// overlap falls below 0.5.
StateAssignment label_states(const Eigen::MatrixXd& eigenvectors, const DuffingSystem& sys);

/// zeta = E110 - E100 - E010 + E000 from the labeled dressed energies,
/// converged in truncation: the value at d+2 must move by < 2pi x 1 kHz.
double zz_rate(const DuffingSystem& sys);

/// ZZ vs coupler frequency with supplied J curves; crossings located by sign
/// change, bisected on exact re-diagonalization to 1e-4 GHz. Grid points are
/// independent; jobs > 1 dispatches them to a worker pool, result order is by
/// grid index regardless of completion order.
ZZCurve sweep_coupler(const DuffingSystem& sys_template, const CouplerCurves& curves,
                      int jobs = 1);

/// CSV "q_c_GHz,J1c_MHz,J2c_MHz" (header required).
CouplerCurves parse_coupler_curves(const std::string& csv_text);
std::string write_zz_csv(const ZZCurve& curve);

} // namespace jex
