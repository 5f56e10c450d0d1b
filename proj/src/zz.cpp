#include "jex/zz.hpp"

#include "jex/interpolate.hpp"
#include "jex/network.hpp"
#include "jex/quantities.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace jex {

namespace {

constexpr double kZetaTol = 2.0 * constants::pi * 1e3;  // 1 kHz convergence bar

struct Indexer {
    int d;
    long index(int n1, int n2, int nc) const { return (static_cast<long>(n1) * d + n2) * d + nc; }
};

Eigen::MatrixXd hamiltonian_at(const DuffingSystem& sys, int d) {
    const long dim = static_cast<long>(d) * d * d;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);

    const std::array<DuffingMode, 3> modes{sys.qubit1, sys.qubit2, sys.coupler};
    const std::array<double, 3> j_rad{sys.j12 / constants::hbar, sys.j1c / constants::hbar,
                                      sys.j2c / constants::hbar};
    // pair order: (0,1) -> J12, (0,2) -> J1c, (1,2) -> J2c
    const std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};

    auto occ = [&](long s, int which) {
        if (which == 2) return static_cast<int>(s % d);
        if (which == 1) return static_cast<int>((s / d) % d);
        return static_cast<int>(s / (static_cast<long>(d) * d));
    };
    auto raised = [&](long s, int which) {
        const long stride = which == 2 ? 1 : which == 1 ? d : static_cast<long>(d) * d;
        return s + stride;
    };

    for (long s = 0; s < dim; ++s) {
        const std::array<int, 3> n{occ(s, 0), occ(s, 1), occ(s, 2)};
        double diag = 0.0;
        for (int m = 0; m < 3; ++m) {
            diag += modes[m].frequency * n[m] -
                    0.5 * modes[m].anharmonicity * n[m] * (n[m] - 1);
        }
        h(s, s) = diag;

        // J_ij (b_i^dag b_j + h.c.): hop one excitation from j to i.
        for (int p = 0; p < 3; ++p) {
            const int a = pairs[p][0], b = pairs[p][1];
            if (n[b] >= 1 && n[a] + 1 < d) {
                long t = s;
                t = raised(t, a);
                const long stride_b = b == 2 ? 1 : b == 1 ? d : static_cast<long>(d) * d;
                t -= stride_b;
                const double amp =
                    j_rad[p] * std::sqrt(static_cast<double>(n[a] + 1)) * std::sqrt(static_cast<double>(n[b]));
                h(t, s) += amp;
                h(s, t) += amp;
            }
        }
    }
    return h;
}

StateAssignment label_from_vectors(const Eigen::MatrixXd& vectors, int d) {
    const Indexer ix{d};
    const std::array<long, 4> bare{ix.index(0, 0, 0), ix.index(1, 0, 0), ix.index(0, 1, 0),
                                   ix.index(1, 1, 0)};
    const long dim = vectors.rows();

    // Top candidates per label, then the best injective assignment over them.
    constexpr int top_k = 6;
    std::array<std::vector<std::pair<double, long>>, 4> cand;
    for (int lbl = 0; lbl < 4; ++lbl) {
        std::vector<std::pair<double, long>> all(static_cast<std::size_t>(dim));
        for (long m = 0; m < dim; ++m) {
            const double p = vectors(bare[lbl], m) * vectors(bare[lbl], m);
            all[static_cast<std::size_t>(m)] = {p, m};
        }
        std::partial_sort(all.begin(), all.begin() + std::min<long>(top_k, dim), all.end(),
                          [](const auto& x, const auto& y) { return x.first > y.first; });
        all.resize(static_cast<std::size_t>(std::min<long>(top_k, dim)));
        cand[lbl] = std::move(all);
    }

    StateAssignment best;
    double best_total = -1.0;
    std::array<int, 4> pick{};
    auto recurse = [&](auto&& self, int lbl, double total) -> void {
        if (lbl == 4) {
            if (total > best_total) {
                best_total = total;
                for (int l = 0; l < 4; ++l) {
                    best.dressed_index[l] = cand[l][static_cast<std::size_t>(pick[l])].second;
                    best.overlap_sq[l] = cand[l][static_cast<std::size_t>(pick[l])].first;
                }
            }
            return;
        }
        for (int c = 0; c < static_cast<int>(cand[lbl].size()); ++c) {
            const long m = cand[lbl][static_cast<std::size_t>(c)].second;
            bool taken = false;
            for (int prev = 0; prev < lbl; ++prev)
                taken |= cand[prev][static_cast<std::size_t>(pick[prev])].second == m;
            if (taken) continue;
            pick[lbl] = c;
            self(self, lbl + 1, total + cand[lbl][static_cast<std::size_t>(c)].first);
        }
    };
    recurse(recurse, 0, 0.0);

    if (best_total < 0.0) throw std::runtime_error("label_states: no injective assignment found");
    best.quality = *std::min_element(best.overlap_sq.begin(), best.overlap_sq.end());
    if (best.quality < 0.5)
        throw std::runtime_error(
            "label_states: hybridization too strong to label (squared overlap < 0.5)");
    return best;
}

double zz_at_truncation(const DuffingSystem& sys, int d, double* quality) {
    if (sys.j12 == 0.0 && sys.j1c == 0.0 && sys.j2c == 0.0) {
        // Decoupled modes: dressed = bare, zeta vanishes identically.
        if (quality != nullptr) *quality = 1.0;
        return 0.0;
    }
    const Eigen::MatrixXd h = hamiltonian_at(sys, d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw std::runtime_error("zz_rate: eigensolver failed");
    const StateAssignment a = label_from_vectors(es.eigenvectors(), d);
    if (quality != nullptr) *quality = a.quality;
    const auto& e = es.eigenvalues();
    return e[a.dressed_index[3]] - e[a.dressed_index[1]] - e[a.dressed_index[2]] +
           e[a.dressed_index[0]];
}

} // namespace

void DuffingSystem::validate() const {
    for (const DuffingMode* m : {&qubit1, &qubit2, &coupler}) {
        if (!(m->frequency > 0.0)) throw std::invalid_argument("duffing: frequencies must be > 0");
        if (m->anharmonicity < 0.0)
            throw std::invalid_argument("duffing: anharmonicity must be >= 0 in the -alpha/2 convention");
    }
    if (truncation < 3) throw std::invalid_argument("duffing: per-mode truncation must be >= 3");
    const long dim = static_cast<long>(truncation) * truncation * truncation;
    if (dim > 4096) throw std::invalid_argument("duffing: dimension d^3 exceeds 4096");
}

Eigen::MatrixXd build_duffing_hamiltonian(const DuffingSystem& sys) {
    sys.validate();
    return hamiltonian_at(sys, sys.truncation);
}

StateAssignment label_states(const Eigen::MatrixXd& eigenvectors, const DuffingSystem& sys) {
    sys.validate();
    return label_from_vectors(eigenvectors, sys.truncation);
}

double zz_rate(const DuffingSystem& sys) {
    sys.validate();
    double quality = 0.0;
    const double coarse = zz_at_truncation(sys, sys.truncation, &quality);
    DuffingSystem finer = sys;
    finer.truncation = sys.truncation + 2;
    const double fine = zz_at_truncation(finer, finer.truncation, nullptr);
    if (std::abs(fine - coarse) > kZetaTol)
        throw std::runtime_error("zz_rate: not converged in truncation (d vs d+2 differ by > 1 kHz)");
    return fine;
}

ZZCurve sweep_coupler(const DuffingSystem& sys_template, const CouplerCurves& curves, int jobs) {
    sys_template.validate();
    const auto n = curves.coupler_freq.size();
    if (n < 2 || curves.j1c.size() != n || curves.j2c.size() != n)
        throw std::invalid_argument("sweep_coupler: inconsistent curve sizes");

    ZZCurve out;
    out.coupler_freq = curves.coupler_freq;
    out.zeta.resize(n);
    out.label_quality.assign(static_cast<std::size_t>(n), 0.0);

    std::vector<bool> ok(static_cast<std::size_t>(n), false);
    auto run_point = [&](Eigen::Index k) {
        DuffingSystem sys = sys_template;
        sys.coupler.frequency = curves.coupler_freq[k];
        sys.j1c = curves.j1c[k];
        sys.j2c = curves.j2c[k];
        try {
            double quality = 0.0;
            const double coarse = zz_at_truncation(sys, sys.truncation, &quality);
            DuffingSystem finer = sys;
            finer.truncation = sys.truncation + 2;
            const double fine = zz_at_truncation(finer, finer.truncation, nullptr);
            if (std::abs(fine - coarse) > kZetaTol)
                throw std::runtime_error("not converged");
            out.zeta[k] = fine;
            out.label_quality[static_cast<std::size_t>(k)] = quality;
            ok[static_cast<std::size_t>(k)] = true;
        } catch (const std::runtime_error&) {
            out.zeta[k] = std::numeric_limits<double>::quiet_NaN();
            ok[static_cast<std::size_t>(k)] = false;
        }
    };

    if (jobs <= 1) {
        for (Eigen::Index k = 0; k < n; ++k) run_point(k);
    } else {
        std::atomic<Eigen::Index> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) {
            pool.emplace_back([&] {
                for (Eigen::Index k = next.fetch_add(1); k < n; k = next.fetch_add(1)) run_point(k);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (Eigen::Index k = 0; k < n; ++k)
        if (!ok[static_cast<std::size_t>(k)]) out.failed_points.push_back(static_cast<int>(k));

    const PchipCurve j1c_curve(curves.coupler_freq, curves.j1c);
    const PchipCurve j2c_curve(curves.coupler_freq, curves.j2c);
    auto zeta_at = [&](double qc) {
        DuffingSystem sys = sys_template;
        sys.coupler.frequency = qc;
        sys.j1c = j1c_curve(qc);
        sys.j2c = j2c_curve(qc);
        DuffingSystem finer = sys;
        finer.truncation = sys.truncation + 2;
        return zz_at_truncation(finer, finer.truncation, nullptr);
    };

    const double tol_qc = 2.0 * constants::pi * 1e5;  // 1e-4 GHz
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (!ok[static_cast<std::size_t>(k)] || !ok[static_cast<std::size_t>(k + 1)]) continue;
        if (out.zeta[k] == 0.0) {
            out.crossings.push_back(out.coupler_freq[k]);
            continue;
        }
        if (out.zeta[k] * out.zeta[k + 1] >= 0.0) continue;
        double lo = out.coupler_freq[k], hi = out.coupler_freq[k + 1];
        double f_lo = out.zeta[k];
        double mid = 0.5 * (lo + hi);
        for (int it = 0; it < 80; ++it) {
            mid = 0.5 * (lo + hi);
            double f_mid;
            try {
                f_mid = zeta_at(mid);
            } catch (const std::runtime_error&) {
                break;  // labeling failed mid-bracket; report the bracket midpoint
            }
            if ((hi - lo) < tol_qc && std::abs(f_mid) < kZetaTol) break;
            if (f_lo * f_mid <= 0.0) {
                hi = mid;
            } else {
                lo = mid;
                f_lo = f_mid;
            }
            if ((hi - lo) < 1e-12 * mid) break;
        }
        out.crossings.push_back(mid);
    }
    return out;
}

CouplerCurves parse_coupler_curves(const std::string& csv_text) {
    std::istringstream stream(csv_text);
    std::string line;
    int line_no = 0;
    if (!std::getline(stream, line)) throw ParseError("J-curve CSV: empty file");
    ++line_no;
    std::vector<double> qc, j1, j2;
    {
        std::string h = line;
        h.erase(std::remove_if(h.begin(), h.end(), ::isspace), h.end());
        if (h != "q_c_GHz,J1c_MHz,J2c_MHz")
            throw ParseError("J-curve CSV line 1: expected header q_c_GHz,J1c_MHz,J2c_MHz");
    }
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double a, b, c;
        if (!(ls >> a >> b >> c))
            throw ParseError("J-curve CSV line " + std::to_string(line_no) + ": expected 3 numbers");
        std::string rest;
        if (ls >> rest)
            throw ParseError("J-curve CSV line " + std::to_string(line_no) + ": trailing data");
        qc.push_back(ghz_to_rad_s(a));
        j1.push_back(b * 1e6 * constants::h);
        j2.push_back(c * 1e6 * constants::h);
    }
    if (qc.size() < 2) throw ParseError("J-curve CSV: need at least two rows");
    CouplerCurves out;
    out.coupler_freq = Eigen::Map<Eigen::VectorXd>(qc.data(), static_cast<Eigen::Index>(qc.size()));
    out.j1c = Eigen::Map<Eigen::VectorXd>(j1.data(), static_cast<Eigen::Index>(j1.size()));
    out.j2c = Eigen::Map<Eigen::VectorXd>(j2.data(), static_cast<Eigen::Index>(j2.size()));
    for (Eigen::Index k = 0; k + 1 < out.coupler_freq.size(); ++k) {
        if (!(out.coupler_freq[k] < out.coupler_freq[k + 1]))
            throw ParseError("J-curve CSV: q_c values must be strictly increasing");
    }
    return out;
}

std::string write_zz_csv(const ZZCurve& curve) {
    std::ostringstream out;
    out << "q_c_GHz,zz_kHz,label_quality\n";
    char buf[128];
    for (Eigen::Index k = 0; k < curve.coupler_freq.size(); ++k) {
        const bool failed =
            std::find(curve.failed_points.begin(), curve.failed_points.end(), static_cast<int>(k)) !=
            curve.failed_points.end();
        if (failed) {
            std::snprintf(buf, sizeof(buf), "%.9g,nan,0\n", rad_s_to_ghz(curve.coupler_freq[k]));
        } else {
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.6f\n", rad_s_to_ghz(curve.coupler_freq[k]),
                          curve.zeta[k] / (2.0 * constants::pi * 1e3),
                          curve.label_quality[static_cast<std::size_t>(k)]);
        }
        out << buf;
    }
    return out.str();
}

} // namespace jex
