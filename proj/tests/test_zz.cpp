#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jex/network.hpp"
#include "jex/quantities.hpp"
#include "jex/zz.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace jex;

namespace {

DuffingSystem reference_system() {
    DuffingSystem s;
    s.qubit1 = {ghz_to_rad_s(5.0), ghz_to_rad_s(0.3)};
    s.qubit2 = {ghz_to_rad_s(5.5), ghz_to_rad_s(0.3)};
    s.coupler = {ghz_to_rad_s(7.5), ghz_to_rad_s(0.3)};
    s.j12 = cyclic_to_energy(10e6);
    s.j1c = 0.0;
    s.j2c = 0.0;
    s.truncation = 5;
    return s;
}

} // namespace

TEST_CASE("duffing hamiltonian") {
    SUBCASE("decoupled ladder eigenvalues") {
        DuffingSystem s = reference_system();
        s.j12 = 0.0;
        s.truncation = 3;
        const Eigen::MatrixXd h = build_duffing_hamiltonian(s);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        std::vector<double> expect;
        const std::array<DuffingMode, 3> m{s.qubit1, s.qubit2, s.coupler};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 3; ++c) {
                    auto term = [&](const DuffingMode& mode, int n) {
                        return mode.frequency * n - 0.5 * mode.anharmonicity * n * (n - 1);
                    };
                    expect.push_back(term(m[0], a) + term(m[1], b) + term(m[2], c));
                }
        std::sort(expect.begin(), expect.end());
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
            CHECK(es.eigenvalues()[k] ==
                  doctest::Approx(expect[static_cast<std::size_t>(k)]).epsilon(1e-12));
    }
    SUBCASE("harmonic normal-mode splitting at degeneracy") {
        DuffingSystem s = reference_system();
        s.qubit2.frequency = s.qubit1.frequency;
        s.qubit1.anharmonicity = s.qubit2.anharmonicity = s.coupler.anharmonicity = 0.0;
        s.coupler.frequency = ghz_to_rad_s(20.0);  // parked far away
        s.truncation = 7;
        const Eigen::MatrixXd h = build_duffing_hamiltonian(s);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        const double j = s.j12 / constants::hbar;
        // Single-excitation doublet at q +- J.
        const double lo = s.qubit1.frequency - j, hi = s.qubit1.frequency + j;
        int found_lo = 0, found_hi = 0;
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            if (std::abs(es.eigenvalues()[k] - lo) < 1e-6 * lo) ++found_lo;
            if (std::abs(es.eigenvalues()[k] - hi) < 1e-6 * hi) ++found_hi;
        }
        CHECK(found_lo == 1);
        CHECK(found_hi == 1);
    }
    SUBCASE("hermitian, dimension guard") {
        const Eigen::MatrixXd h = build_duffing_hamiltonian(reference_system());
        CHECK((h - h.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * h.cwiseAbs().maxCoeff());
        DuffingSystem s = reference_system();
        s.truncation = 17;
        CHECK_THROWS_AS(build_duffing_hamiltonian(s), std::invalid_argument);
    }
}

TEST_CASE("label_states") {
    SUBCASE("decoupled system labels itself") {
        DuffingSystem s = reference_system();
        s.j12 = 0.0;
        const Eigen::MatrixXd h = build_duffing_hamiltonian(s);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        const StateAssignment a = label_states(es.eigenvectors(), s);
        CHECK(a.quality == doctest::Approx(1.0).epsilon(1e-12));
        // Injective by construction.
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) CHECK(a.dressed_index[i] != a.dressed_index[j]);
    }
    SUBCASE("perturbative couplings keep overlaps high") {
        DuffingSystem s = reference_system();
        s.j1c = s.j2c = cyclic_to_energy(30e6);
        const Eigen::MatrixXd h = build_duffing_hamiltonian(s);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        const StateAssignment a = label_states(es.eigenvectors(), s);
        CHECK(a.quality > 0.99);
    }
    SUBCASE("resonant coupler defeats labeling") {
        DuffingSystem s = reference_system();
        s.coupler.frequency = s.qubit1.frequency;
        s.qubit2.frequency = s.qubit1.frequency;
        s.j1c = cyclic_to_energy(150e6);
        s.j2c = cyclic_to_energy(150e6);
        const Eigen::MatrixXd h = build_duffing_hamiltonian(s);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        CHECK_THROWS_AS(label_states(es.eigenvectors(), s), std::runtime_error);
    }
}

TEST_CASE("zz_rate") {
    SUBCASE("all J zero means zero ZZ exactly") {
        DuffingSystem s = reference_system();
        s.j12 = 0.0;
        CHECK(zz_rate(s) == 0.0);
    }
    SUBCASE("pinned regression value, d=4 vs d=8 stable to 1 kHz") {
        DuffingSystem s = reference_system();
        s.truncation = 4;
        const double zeta4 = zz_rate(s);  // internally also checks d+2 = 6
        s.truncation = 8;
        const double zeta8 = zz_rate(s);
        CHECK(std::abs(zeta8 - zeta4) < 2.0 * constants::pi * 1e3);
        // Perturbative estimate: 2J^2 [1/(a1 - D) + 1/(a2 + D)], D = q1-q2.
        const double j = s.j12 / constants::hbar;
        const double d12 = s.qubit1.frequency - s.qubit2.frequency;
        const double approx =
            2.0 * j * j *
            (1.0 / (s.qubit1.anharmonicity - d12) + 1.0 / (s.qubit2.anharmonicity + d12));
        CHECK(zeta8 == doctest::Approx(approx).epsilon(0.05));
        // Frozen after first computation; catches silent regressions.
        CHECK(zeta8 / (2.0 * constants::pi) == doctest::Approx(-746050.25).epsilon(1e-4));
    }
    SUBCASE("quadratic scaling in J12") {
        DuffingSystem s = reference_system();
        const double z1 = zz_rate(s);
        s.j12 = 0.25 * s.j12;
        const double z2 = zz_rate(s);
        CHECK(std::abs(z1 / z2 - 16.0) < 1.6);
    }
    SUBCASE("invariant under global shift and qubit swap") {
        DuffingSystem s = reference_system();
        s.j1c = cyclic_to_energy(25e6);
        s.j2c = cyclic_to_energy(40e6);
        const double z = zz_rate(s);
        DuffingSystem swapped = s;
        std::swap(swapped.qubit1, swapped.qubit2);
        std::swap(swapped.j1c, swapped.j2c);
        const double z_swapped = zz_rate(swapped);
        CHECK(z == doctest::Approx(z_swapped).epsilon(1e-10));

        // Global energy shift: same eigenvectors, shifted eigenvalues cancel
        // in the double difference.
        auto zeta_of = [&](const Eigen::MatrixXd& h) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
            const StateAssignment a = label_states(es.eigenvectors(), s);
            return es.eigenvalues()[a.dressed_index[3]] - es.eigenvalues()[a.dressed_index[1]] -
                   es.eigenvalues()[a.dressed_index[2]] + es.eigenvalues()[a.dressed_index[0]];
        };
        const Eigen::MatrixXd h = build_duffing_hamiltonian(s);
        const double z_plain = zeta_of(h);
        const Eigen::MatrixXd shifted =
            h + ghz_to_rad_s(3.0) * Eigen::MatrixXd::Identity(h.rows(), h.cols());
        CHECK(std::abs(zeta_of(shifted) - z_plain) <= 1e-12 * std::abs(z_plain) + 1e-3);
    }
    SUBCASE("truncation convergence is monotone on the reference fixture") {
        DuffingSystem s = reference_system();
        s.j1c = cyclic_to_energy(30e6);
        s.j2c = cyclic_to_energy(35e6);
        auto zeta_at = [&](int d) {
            DuffingSystem sd = s;
            sd.truncation = d;
            const Eigen::MatrixXd h = build_duffing_hamiltonian(sd);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
            const StateAssignment a = label_states(es.eigenvectors(), sd);
            return es.eigenvalues()[a.dressed_index[3]] - es.eigenvalues()[a.dressed_index[1]] -
                   es.eigenvalues()[a.dressed_index[2]] + es.eigenvalues()[a.dressed_index[0]];
        };
        const double d4 = zeta_at(4), d6 = zeta_at(6), d8 = zeta_at(8);
        CHECK(std::abs(d6 - d4) > std::abs(d8 - d6));
    }
}

TEST_CASE("sweep_coupler") {
    SUBCASE("no crossings on a single-signed curve") {
        DuffingSystem s = reference_system();
        CouplerCurves curves;
        const int n = 9;
        curves.coupler_freq.resize(n);
        curves.j1c.resize(n);
        curves.j2c.resize(n);
        for (int i = 0; i < n; ++i) {
            curves.coupler_freq[i] = ghz_to_rad_s(7.0 + 0.1 * i);
            curves.j1c[i] = curves.j2c[i] = cyclic_to_energy(1e6);
        }
        const ZZCurve curve = sweep_coupler(s, curves);
        CHECK(curve.crossings.empty());
        CHECK(curve.failed_points.empty());
        // Single-signed curve throughout.
        for (Eigen::Index k = 0; k < curve.zeta.size(); ++k)
            CHECK(curve.zeta[k] * curve.zeta[0] > 0.0);
    }
    SUBCASE("parallel sweep matches serial") {
        DuffingSystem s = reference_system();
        s.truncation = 3;
        CouplerCurves curves;
        const int n = 7;
        curves.coupler_freq.resize(n);
        curves.j1c.resize(n);
        curves.j2c.resize(n);
        for (int i = 0; i < n; ++i) {
            curves.coupler_freq[i] = ghz_to_rad_s(6.5 + 0.1 * i);
            curves.j1c[i] = cyclic_to_energy(20e6);
            curves.j2c[i] = cyclic_to_energy(25e6);
        }
        const ZZCurve serial = sweep_coupler(s, curves, 1);
        const ZZCurve parallel = sweep_coupler(s, curves, 4);
        for (Eigen::Index k = 0; k < serial.zeta.size(); ++k)
            CHECK(serial.zeta[k] == parallel.zeta[k]);
    }
}

TEST_CASE("coupler curve csv") {
    SUBCASE("round trip through the documented schema") {
        const std::string text = "q_c_GHz,J1c_MHz,J2c_MHz\n3.0,20.0,22.0\n3.5,30.0,33.0\n";
        const CouplerCurves c = parse_coupler_curves(text);
        REQUIRE(c.coupler_freq.size() == 2);
        CHECK(rad_s_to_ghz(c.coupler_freq[1]) == doctest::Approx(3.5));
        CHECK(c.j1c[0] / constants::h == doctest::Approx(20e6));
    }
    SUBCASE("malformed rows name the line") {
        try {
            parse_coupler_curves("q_c_GHz,J1c_MHz,J2c_MHz\n3.0,20.0\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
        CHECK_THROWS_AS(parse_coupler_curves("wrong,header\n1,2,3\n"), ParseError);
    }
}
