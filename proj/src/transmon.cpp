#include "jex/transmon.hpp"

#include "jex/quantities.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace jex {

namespace {

void validate(const TransmonSpec& spec) {
    if (!(spec.charging_energy > 0.0)) throw std::invalid_argument("transmon: E_C must be > 0");
    if (spec.josephson_energy < 0.0) throw std::invalid_argument("transmon: E_J must be >= 0");
    if (spec.charge_cutoff < 5) throw std::invalid_argument("transmon: charge cutoff too small (N < 5)");
    if (!std::isfinite(spec.offset_charge)) throw std::invalid_argument("transmon: n_g not finite");
}

struct RawSolution {
    Eigen::VectorXd energies;     // joules, ascending
    Eigen::MatrixXd vectors;      // columns
    Eigen::VectorXd charge_values; // n = -N..N along the basis
};

RawSolution diagonalize(const TransmonSpec& spec, int cutoff) {
    TransmonSpec s = spec;
    s.charge_cutoff = cutoff;
    const Eigen::MatrixXd h = build_charge_hamiltonian(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw std::runtime_error("transmon: eigensolver failed");
    RawSolution out;
    out.energies = es.eigenvalues();
    out.vectors = es.eigenvectors();
    const int dim = 2 * cutoff + 1;
    out.charge_values.resize(dim);
    for (int i = 0; i < dim; ++i) out.charge_values[i] = static_cast<double>(i - cutoff);
    return out;
}

double q01_of(const RawSolution& sol) {
    return (sol.energies[1] - sol.energies[0]) / constants::hbar;
}

} // namespace

Eigen::MatrixXd build_charge_hamiltonian(const TransmonSpec& spec) {
    validate(spec);
    const int n_cut = spec.charge_cutoff;
    const int dim = 2 * n_cut + 1;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const double n = static_cast<double>(i - n_cut) - spec.offset_charge;
        h(i, i) = 4.0 * spec.charging_energy * n * n;
        if (i + 1 < dim) {
            h(i, i + 1) = -0.5 * spec.josephson_energy;
            h(i + 1, i) = -0.5 * spec.josephson_energy;
        }
    }
    return h;
}

TransmonSpectrum solve_spectrum(const TransmonSpec& spec, int levels_kept) {
    validate(spec);
    if (levels_kept < 2) throw std::invalid_argument("transmon: need at least two levels");
    if (levels_kept > 2 * spec.charge_cutoff - 3)
        throw std::invalid_argument("transmon: levels_kept exceeds 2N-3 for the requested cutoff");

    TransmonSpectrum out;
    if (spec.josephson_energy > 0.0 && spec.josephson_energy / spec.charging_energy < 20.0)
        out.warnings.push_back("E_J/E_C < 20: below the transmon regime, charge dispersion not negligible");

    int cutoff = spec.charge_cutoff;
    RawSolution sol = diagonalize(spec, cutoff);
    bool converged = false;
    while (true) {
        const int doubled = 2 * cutoff;
        if (doubled > 200) {
            if (!converged)
                throw std::runtime_error("transmon: spectrum not converged below charge cutoff 200");
            break;
        }
        RawSolution next = diagonalize(spec, doubled);
        const double q_a = q01_of(sol);
        const double q_b = q01_of(next);
        sol = std::move(next);
        cutoff = doubled;
        if (std::abs(q_b - q_a) <= 1e-9 * std::abs(q_b)) {
            converged = true;
            break;
        }
    }

    out.converged = converged;
    out.cutoff_used = cutoff;

    const int kept = levels_kept;
    out.level_energies.resize(kept);
    for (int j = 0; j < kept; ++j)
        out.level_energies[j] = (sol.energies[j] - sol.energies[0]) / constants::hbar;
    out.transitions.resize(kept - 1);
    for (int j = 0; j + 1 < kept; ++j)
        out.transitions[j] = out.level_energies[j + 1] - out.level_energies[j];
    out.anharmonicity = kept >= 3 ? out.transitions[1] - out.transitions[0] : 0.0;

    // n_{i,j} = v_i^T diag(n) v_j with column signs fixed so n_{i,i+1} >= 0.
    const Eigen::MatrixXd v = sol.vectors.leftCols(kept);
    Eigen::MatrixXd raw = v.transpose() * sol.charge_values.asDiagonal() * v;
    Eigen::VectorXd sign = Eigen::VectorXd::Ones(kept);
    for (int i = 0; i + 1 < kept; ++i) {
        const double elem = sign[i] * raw(i, i + 1);
        sign[i + 1] = elem < 0.0 ? -1.0 : 1.0;
    }
    out.charge_matrix = sign.asDiagonal() * raw * sign.asDiagonal();
    return out;
}

double calibrate_ej(double target_q01_rad_s, double charging_energy, double offset_charge) {
    if (!(target_q01_rad_s > 0.0)) throw std::invalid_argument("calibrate_ej: target must be > 0");
    if (!(charging_energy > 0.0)) throw std::invalid_argument("calibrate_ej: E_C must be > 0");

    auto q01_at = [&](double ej) {
        TransmonSpec s{charging_energy, ej, offset_charge, 30};
        return solve_spectrum(s, 3).transitions[0];
    };

    // Asymptotic inverse of q01 ~ (sqrt(8 E_C E_J) - E_C)/hbar as the seed.
    const double e_target = constants::hbar * target_q01_rad_s;
    double guess = (e_target + charging_energy) * (e_target + charging_energy) / (8.0 * charging_energy);
    guess = std::max(guess, charging_energy);

    double lo = guess / 8.0;
    double hi = guess * 8.0;
    for (int i = 0; i < 60 && q01_at(lo) > target_q01_rad_s; ++i) lo *= 0.25;
    for (int i = 0; i < 60 && q01_at(hi) < target_q01_rad_s; ++i) hi *= 4.0;
    if (q01_at(lo) > target_q01_rad_s || q01_at(hi) < target_q01_rad_s)
        throw std::runtime_error("calibrate_ej: could not bracket the target frequency");

    double mid = 0.5 * (lo + hi);
    for (int i = 0; i < 80; ++i) {
        mid = 0.5 * (lo + hi);
        const double q = q01_at(mid);
        if (std::abs(q - target_q01_rad_s) <= 1e-8 * target_q01_rad_s) break;
        if (q < target_q01_rad_s) lo = mid; else hi = mid;
    }

    if (mid / charging_energy < 1.0)
        throw std::runtime_error("calibrate_ej: target unreachable in the transmon regime (E_J/E_C < 1)");
    return mid;
}

TransmonSpec spec_from_capacitance(double c_total_farads, double target_q01_rad_s,
                                   double offset_charge) {
    if (!(c_total_farads > 0.0)) throw std::invalid_argument("spec_from_capacitance: C must be > 0");
    const double ec = constants::e * constants::e / (2.0 * c_total_farads);
    const double ej = calibrate_ej(target_q01_rad_s, ec, offset_charge);
    return TransmonSpec{ec, ej, offset_charge, 30};
}

} // namespace jex
