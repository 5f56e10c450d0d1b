#include "jex/dispersive.hpp"

#include "jex/quantities.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <map>
#include <stdexcept>

namespace jex {

namespace {

/// Basis bookkeeping for (qubit1, qubit2, n_1..n_M) in row-major order,
/// qubit1 slowest.
struct Basis {
    int l1, l2, nph, modes;
    long dim;

    explicit Basis(const FullSystem& sys)
        : l1(sys.qubit1.levels()),
          l2(sys.qubit2.levels()),
          nph(sys.photon_cutoff),
          modes(static_cast<int>(sys.modes.count())),
          dim(sys.dimension()) {}

    long index(int i1, int i2, const std::vector<int>& n) const {
        long idx = i1;
        idx = idx * l2 + i2;
        for (int k = 0; k < modes; ++k) idx = idx * (nph + 1) + n[k];
        return idx;
    }

    void decode(long idx, int& i1, int& i2, std::vector<int>& n) const {
        n.assign(modes, 0);
        for (int k = modes - 1; k >= 0; --k) {
            n[k] = static_cast<int>(idx % (nph + 1));
            idx /= (nph + 1);
        }
        i2 = static_cast<int>(idx % l2);
        i1 = static_cast<int>(idx / l2);
    }
};

/// g_{j,k}^{(l)}: stored j=0 coupling scaled by the charge-element ratio.
std::complex<double> coupling(const FullSystem& sys, int qubit, int level_j, int mode_k) {
    const QubitLevels& q = qubit == 0 ? sys.qubit1 : sys.qubit2;
    return q.charge_ratio[level_j] * sys.modes.g(mode_k, qubit);
}

double transition(const FullSystem& sys, int qubit, int level_j) {
    const QubitLevels& q = qubit == 0 ? sys.qubit1 : sys.qubit2;
    return q.transitions[level_j];
}

Eigen::VectorXd level_energies(const QubitLevels& q) {
    Eigen::VectorXd e(q.levels());
    e[0] = 0.0;
    for (int j = 0; j + 1 < q.levels(); ++j) e[j + 1] = e[j] + q.transitions[j];
    return e;
}

/// Photon occupation vector of a basis state, the block label for the SW
/// conditions.
std::vector<int> photon_block(const Basis& basis, long idx) {
    int i1, i2;
    std::vector<int> n;
    basis.decode(idx, i1, i2, n);
    return n;
}

} // namespace

QubitLevels qubit_levels_from_spectrum(const TransmonSpectrum& spectrum, int levels) {
    if (levels < 2 || levels > spectrum.transitions.size() + 1)
        throw std::invalid_argument("qubit_levels_from_spectrum: level count outside solved range");
    QubitLevels out;
    out.transitions = spectrum.transitions.head(levels - 1);
    out.charge_ratio.resize(levels - 1);
    const double n01 = spectrum.charge_matrix(0, 1);
    for (int j = 0; j + 1 < levels; ++j)
        out.charge_ratio[j] = spectrum.charge_matrix(j, j + 1) / n01;
    return out;
}

long FullSystem::dimension() const {
    long d = static_cast<long>(qubit1.levels()) * qubit2.levels();
    for (Eigen::Index k = 0; k < modes.count(); ++k) d *= photon_cutoff + 1;
    return d;
}

void FullSystem::validate() const {
    modes.validate();
    for (const QubitLevels* q : {&qubit1, &qubit2}) {
        if (q->levels() < 3)
            throw std::invalid_argument("full system: at least 3 levels per qubit required");
        if (q->charge_ratio.size() != q->transitions.size())
            throw std::invalid_argument("full system: ratio/transition size mismatch");
        for (Eigen::Index j = 0; j < q->transitions.size(); ++j) {
            if (!(q->transitions[j] > 0.0))
                throw std::invalid_argument("full system: transitions must be > 0");
        }
    }
    if (photon_cutoff < 1) throw std::invalid_argument("full system: photon cutoff must be >= 1");
    if (dimension() > 20000)
        throw std::invalid_argument("full system: Hilbert dimension exceeds 2e4 dense-solver guard");
}

Eigen::MatrixXcd build_full_hamiltonian(const FullSystem& sys) {
    sys.validate();
    const Basis basis(sys);
    const Eigen::VectorXd e1 = level_energies(sys.qubit1);
    const Eigen::VectorXd e2 = level_energies(sys.qubit2);

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(basis.dim, basis.dim);
    std::vector<int> n;
    for (long s = 0; s < basis.dim; ++s) {
        int i1, i2;
        basis.decode(s, i1, i2, n);
        double diag = e1[i1] + e2[i2];
        for (int k = 0; k < basis.modes; ++k) diag += n[k] * sys.modes.omega[k];
        h(s, s) = diag;

        // g_{j,k} |j><j+1| a_k^dag lowers the qubit and creates a photon.
        for (int k = 0; k < basis.modes; ++k) {
            if (n[k] + 1 > basis.nph) continue;
            for (int qubit = 0; qubit < 2; ++qubit) {
                const int lev = qubit == 0 ? i1 : i2;
                if (lev == 0) continue;
                const int j = lev - 1;
                std::vector<int> n2 = n;
                n2[k] += 1;
                const long t = qubit == 0 ? basis.index(i1 - 1, i2, n2) : basis.index(i1, i2 - 1, n2);
                const std::complex<double> amp =
                    coupling(sys, qubit, j, k) * std::sqrt(static_cast<double>(n[k] + 1));
                h(t, s) += amp;
                h(s, t) += std::conj(amp);
            }
        }
    }
    return h;
}

Eigen::MatrixXcd build_sw_generator(const FullSystem& sys) {
    sys.validate();
    const Basis basis(sys);

    for (int qubit = 0; qubit < 2; ++qubit) {
        const QubitLevels& q = qubit == 0 ? sys.qubit1 : sys.qubit2;
        for (Eigen::Index j = 0; j < q.transitions.size(); ++j) {
            for (Eigen::Index k = 0; k < sys.modes.count(); ++k) {
                if (q.transitions[j] == sys.modes.omega[k])
                    throw std::runtime_error("sw generator: exact qubit-mode resonance");
            }
        }
    }

    Eigen::MatrixXcd is1 = Eigen::MatrixXcd::Zero(basis.dim, basis.dim);
    std::vector<int> n;
    for (long s = 0; s < basis.dim; ++s) {
        int i1, i2;
        basis.decode(s, i1, i2, n);
        // iS1 = sum B*_{j,k} |j+1><j| a_k  -  B_{j,k} |j><j+1| a_k^dag.
        for (int k = 0; k < basis.modes; ++k) {
            if (n[k] == 0) continue;
            for (int qubit = 0; qubit < 2; ++qubit) {
                const int lev = qubit == 0 ? i1 : i2;
                const QubitLevels& q = qubit == 0 ? sys.qubit1 : sys.qubit2;
                if (lev + 1 >= q.levels()) continue;
                const int j = lev;
                std::vector<int> n2 = n;
                n2[k] -= 1;
                const long t = qubit == 0 ? basis.index(i1 + 1, i2, n2) : basis.index(i1, i2 + 1, n2);
                const std::complex<double> b =
                    coupling(sys, qubit, j, k) / (transition(sys, qubit, j) - sys.modes.omega[k]);
                const std::complex<double> amp = std::conj(b) * std::sqrt(static_cast<double>(n[k]));
                is1(t, s) += amp;
                is1(s, t) -= std::conj(amp);
            }
        }
    }
    return is1;
}

double sw_block_residual(const FullSystem& sys) {
    const Eigen::MatrixXcd h = build_full_hamiltonian(sys);
    const Eigen::MatrixXcd is1 = build_sw_generator(sys);
    const Basis basis(sys);

    const Eigen::MatrixXcd u = is1.exp();
    const Eigen::MatrixXcd h_eff = u * h * u.adjoint();

    // Dense block index (photon occupation -> small integer), then accumulate
    // the squared Frobenius norm per off-diagonal block pair.
    std::map<std::vector<int>, int> block_ids;
    std::vector<int> block_of(static_cast<std::size_t>(basis.dim));
    for (long s = 0; s < basis.dim; ++s) {
        const auto key = photon_block(basis, s);
        auto [it, inserted] = block_ids.emplace(key, static_cast<int>(block_ids.size()));
        block_of[static_cast<std::size_t>(s)] = it->second;
    }
    const int nb = static_cast<int>(block_ids.size());
    Eigen::MatrixXd pair_sq = Eigen::MatrixXd::Zero(nb, nb);
    for (long s = 0; s < basis.dim; ++s) {
        for (long t = 0; t < basis.dim; ++t) {
            const int bs = block_of[static_cast<std::size_t>(s)];
            const int bt = block_of[static_cast<std::size_t>(t)];
            if (bs != bt) pair_sq(bs, bt) += std::norm(h_eff(s, t));
        }
    }
    const double max_norm = std::sqrt(pair_sq.maxCoeff());

    double max_g = 0.0;
    for (Eigen::Index k = 0; k < sys.modes.count(); ++k)
        for (int qubit = 0; qubit < 2; ++qubit)
            max_g = std::max(max_g, std::abs(sys.modes.g(k, qubit)));
    if (max_g == 0.0) return 0.0;
    return max_norm / max_g;
}

HeffResult build_heff(const FullSystem& sys) {
    sys.validate();
    const Basis basis(sys);
    const Eigen::VectorXd e1 = level_energies(sys.qubit1);
    const Eigen::VectorXd e2 = level_energies(sys.qubit2);
    const int modes = basis.modes;

    HeffResult out;
    EffectiveModel& model = out.model;

    // chi_{i,k} = |g_{i,k}|^2 / (q_{i,i+1} - w_k)
    auto chi_table = [&](int qubit) {
        const QubitLevels& q = qubit == 0 ? sys.qubit1 : sys.qubit2;
        Eigen::MatrixXd chi(q.levels() - 1, modes);
        for (int i = 0; i + 1 < q.levels(); ++i) {
            for (int k = 0; k < modes; ++k) {
                if (q.transitions[i] == sys.modes.omega[k])
                    throw std::runtime_error("build_heff: exact qubit-mode resonance");
                chi(i, k) = std::norm(coupling(sys, qubit, i, k)) /
                            (q.transitions[i] - sys.modes.omega[k]);
            }
        }
        return chi;
    };
    model.chi1 = chi_table(0);
    model.chi2 = chi_table(1);

    // Exchange amplitudes J_{ij}; independent evaluation of the same mode sum
    // the exchange module exposes.
    model.exchange.resize(sys.qubit1.levels() - 1, sys.qubit2.levels() - 1);
    for (int i = 0; i + 1 < sys.qubit1.levels(); ++i) {
        for (int j = 0; j + 1 < sys.qubit2.levels(); ++j) {
            std::complex<double> acc1{0.0, 0.0}, acc2{0.0, 0.0};
            const double q1 = sys.qubit1.transitions[i];
            const double q2 = sys.qubit2.transitions[j];
            for (int k = 0; k < modes; ++k) {
                const double wk = sys.modes.omega[k];
                const std::complex<double> g1 = sys.qubit1.charge_ratio[i] * sys.modes.g(k, 0);
                const std::complex<double> g2 = sys.qubit2.charge_ratio[j] * sys.modes.g(k, 1);
                const std::complex<double> t1 = std::conj(g1) * g2 / (q1 - wk);
                const std::complex<double> t2 = g1 * std::conj(g2) / (q2 - wk);
                acc1 += 0.5 * constants::hbar * t1;
                acc2 += 0.5 * constants::hbar * t2;
            }
            model.exchange(i, j) = acc1 + acc2;
        }
    }

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(basis.dim, basis.dim);
    std::vector<int> n;
    for (long s = 0; s < basis.dim; ++s) {
        int i1, i2;
        basis.decode(s, i1, i2, n);
        double diag = e1[i1] + e2[i2];
        for (int k = 0; k < modes; ++k) diag += n[k] * sys.modes.omega[k];

        // Lamb shifts: level i+1 pulled by chi_{i,k}; photon-number dependent
        // pulls (level 0 pushed by -chi_{0,k} n_k, level i by
        // (chi_{i-1,k} - chi_{i,k}) n_k, chi past the top transition = 0).
        for (int k = 0; k < modes; ++k) {
            for (auto [lev, chi] : {std::pair{i1, &model.chi1}, std::pair{i2, &model.chi2}}) {
                const int top = static_cast<int>(chi->rows());
                if (lev == 0) {
                    diag -= (*chi)(0, k) * n[k];
                } else {
                    diag += (*chi)(lev - 1, k);
                    const double upper = lev < top ? (*chi)(lev, k) : 0.0;
                    diag += ((*chi)(lev - 1, k) - upper) * n[k];
                }
            }
        }
        h(s, s) = diag;

        // Exchange block: |i><i+1|^(1) |j+1><j|^(2), photon-independent.
        if (i1 + 1 < basis.l1 && i2 >= 1) {
            const long t = basis.index(i1 + 1, i2 - 1, n);
            const std::complex<double> jij =
                model.exchange(i1, i2 - 1) / constants::hbar;  // back to rad/s
            h(s, t) += jij;
            h(t, s) += std::conj(jij);
        }
    }
    out.matrix = std::move(h);

    if (basis.dim <= 4096) {
        model.residual_off_block = sw_block_residual(sys);
    } else {
        model.residual_off_block = -1.0;
        model.warnings.push_back("SW residual skipped (dimension above dense-exponential budget)");
    }
    return out;
}

double extract_j_from_splitting(const FullSystem& sys) {
    sys.validate();
    const double q1 = sys.qubit1.transitions[0];
    const double q2 = sys.qubit2.transitions[0];
    if (std::abs(q1 - q2) > 1e-9 * std::abs(q1))
        throw std::invalid_argument("extract_j_from_splitting: qubits must be degenerate");

    const Basis basis(sys);
    const Eigen::MatrixXcd h = build_full_hamiltonian(sys);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("extract_j_from_splitting: eigensolver failed");

    const std::vector<int> zero(basis.modes, 0);
    const long s10 = basis.index(1, 0, zero);
    const long s01 = basis.index(0, 1, zero);

    // The two dressed states spanning the single-excitation qubit doublet.
    long m_best = -1, m_second = -1;
    double p_best = -1.0, p_second = -1.0;
    for (long m = 0; m < basis.dim; ++m) {
        const double p = std::norm(es.eigenvectors()(s10, m)) + std::norm(es.eigenvectors()(s01, m));
        if (p > p_best) {
            m_second = m_best;
            p_second = p_best;
            m_best = m;
            p_best = p;
        } else if (p > p_second) {
            m_second = m;
            p_second = p;
        }
    }
    if (p_best < 0.5 || p_second < 0.5)
        throw std::runtime_error("extract_j_from_splitting: doublet not identifiable (overlap < 0.5)");

    // Project onto span{|10>, |01>} and rebuild the 2x2 block; its
    // off-diagonal is the signed exchange amplitude.
    Eigen::Matrix2cd t;
    t << es.eigenvectors()(s10, m_best), es.eigenvectors()(s10, m_second),
        es.eigenvectors()(s01, m_best), es.eigenvectors()(s01, m_second);
    Eigen::Vector2cd e{es.eigenvalues()[m_best], es.eigenvalues()[m_second]};
    const Eigen::Matrix2cd block = t * e.asDiagonal() * t.inverse();
    const Eigen::Matrix2cd herm = 0.5 * (block + block.adjoint());
    return constants::hbar * herm(0, 1).real();
}

} // namespace jex
