#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jex/exchange.hpp"
#include "jex/oracle.hpp"
#include "jex/quantities.hpp"

#include <cmath>
#include <set>

using namespace jex;

namespace {

Eigen::VectorXd linear_grid(double f_lo_ghz, double f_hi_ghz, int points) {
    Eigen::VectorXd g(points);
    for (int k = 0; k < points; ++k)
        g[k] = ghz_to_rad_s(f_lo_ghz + (f_hi_ghz - f_lo_ghz) * k / (points - 1.0));
    return g;
}

TransmonSpectrum spectrum_at(double c_total, double ej_over_ec) {
    const double ec = constants::e * constants::e / (2.0 * c_total);
    return solve_spectrum({ec, ej_over_ec * ec, 0.0, 30}, 4);
}

ModeSet single_mode(double omega, std::complex<double> g1, std::complex<double> g2) {
    ModeSet m;
    m.omega = Eigen::VectorXd::Constant(1, omega);
    m.g.resize(1, 2);
    m.g(0, 0) = g1;
    m.g(0, 1) = g2;
    return m;
}

} // namespace

TEST_CASE("j_impedance on the pi-capacitive oracle") {
    const double cq = 80e-15, cc = 0.2e-15;
    const Netlist net = fixtures::pi_network(cq, cq, cc);
    const ImpedanceTable table = evaluate_z(net, linear_grid(3.5, 6.5, 241));
    const double delta = (cq + cc) * (cq + cc) - cc * cc;

    SUBCASE("equal-frequency J is the closed form, frequency independent") {
        double j_prev = 0.0;
        for (double ratio : {55.0, 75.0, 95.0}) {
            const TransmonSpectrum s = spectrum_at(cq + cc, ratio);
            REQUIRE(s.transitions[0] > table.omega_min());
            REQUIRE(s.transitions[0] < table.omega_max());
            const ExchangeResult r = j_impedance(s, s, table);
            const double n01 = s.charge_matrix(0, 1);
            const double closed = -4.0 * constants::e * constants::e * n01 * n01 * cc / delta;
            CHECK(std::abs(r.j - closed) <= 1e-6 * std::abs(closed));
            CHECK(r.term1 == doctest::Approx(r.term2).epsilon(1e-9));
            CHECK(r.j < 0.0);
            // q Im Z12(q) is constant for the pure-capacitive network, so J
            // only moves through n01^2.
            if (j_prev != 0.0) CHECK(std::abs(r.j) > std::abs(j_prev));
            j_prev = r.j;
        }
    }
    SUBCASE("no coupling means no exchange") {
        const Netlist decoupled = fixtures::pi_network(cq, cq, 1e-30);
        // Cc = 0 exactly is not a legal element; drop the bridge instead.
        Netlist none;
        none.elements = {decoupled.elements[0], decoupled.elements[1]};
        none.ports = decoupled.ports;
        const ImpedanceTable t0 = evaluate_z(none, linear_grid(3.5, 6.5, 41));
        const TransmonSpectrum s = spectrum_at(cq, 70.0);
        const ExchangeResult r = j_impedance(s, s, t0);
        CHECK(std::abs(r.j) < 1e-15);
    }
    SUBCASE("transition outside the grid") {
        const TransmonSpectrum s = spectrum_at(cq + cc, 70.0);
        const ImpedanceTable narrow = evaluate_z(net, linear_grid(1.0, 2.0, 41));
        CHECK_THROWS_AS(j_impedance(s, s, narrow), std::domain_error);
    }
    SUBCASE("swapping qubit labels leaves J invariant (reciprocal table)") {
        const TransmonSpectrum s1 = spectrum_at(cq + cc, 60.0);
        const TransmonSpectrum s2 = spectrum_at(cq + cc, 90.0);
        const ExchangeResult a = j_impedance(s1, s2, table);
        const ExchangeResult b = j_impedance(s2, s1, table);
        CHECK(a.j == doctest::Approx(b.j).epsilon(1e-12));
    }
    SUBCASE("higher transitions use the matching elements and frequencies") {
        // The 1-2 rate on the capacitive network repeats the closed form with
        // n12 in place of n01 (and is q-independent), so J11/J00 = (n12/n01)^2.
        const TransmonSpectrum s = spectrum_at(cq + cc, 70.0);
        REQUIRE(s.transitions[1] > table.omega_min());
        const ExchangeResult j00 = j_impedance(s, s, table, 0, 0);
        const ExchangeResult j11 = j_impedance(s, s, table, 1, 1);
        const double ratio = std::pow(s.charge_matrix(1, 2) / s.charge_matrix(0, 1), 2.0);
        CHECK(j11.j / j00.j == doctest::Approx(ratio).epsilon(1e-6));
        CHECK_THROWS_AS(j_impedance(s, s, table, 3, 0), std::invalid_argument);
    }
}

TEST_CASE("j_impedance matches j_capacitive in the transmon limit") {
    const double cq = 80e-15, cc = 0.2e-15;
    const Netlist net = fixtures::pi_network(cq, cq, cc);
    const ImpedanceTable table = evaluate_z(net, linear_grid(3.5, 6.8, 241));
    const double c_ext =
        extract_capacitance(table, 0, table.omega_min(), table.omega_max()).capacitance;
    const TransmonSpectrum s = spectrum_at(c_ext, 80.0);
    const ExchangeResult imp = j_impedance(s, s, table);
    const ExchangeResult cap = j_capacitive(c_ext, c_ext, cc, s.transitions[0], s.transitions[0]);
    CHECK(std::abs(std::abs(imp.j) - cap.j) / cap.j < 0.05);
}

TEST_CASE("sign structure across an isolated pole") {
    const double f0 = ghz_to_rad_s(7.55);
    const Netlist net = fixtures::lc_coupler(4e-15, f0, 500e-15);
    const ImpedanceTable table = evaluate_z(net, linear_grid(4.0, 11.0, 1401));

    // The sign of J is not asserted in absolute terms; the sign CHANGE
    // across the pole is, with |J| decreasing away from it on both sides.
    std::vector<double> q_list, j_list;
    for (int i = 0; i < 41; ++i) {
        const double q = f0 * (0.7 + 0.6 * i / 40.0);
        if (std::abs(q - f0) < 0.02 * f0) continue;
        const double ec = constants::e * constants::e / (2.0 * 85e-15);
        const TransmonSpectrum s = solve_spectrum({ec, calibrate_ej(q, ec), 0.0, 30}, 4);
        const ExchangeResult r = j_impedance(s, s, table);
        q_list.push_back(q);
        j_list.push_back(r.j);
    }
    int sign_changes = 0;
    for (std::size_t k = 0; k + 1 < j_list.size(); ++k)
        if (j_list[k] * j_list[k + 1] < 0.0) ++sign_changes;
    CHECK(sign_changes == 1);
    // |J| decreases moving away from the pole on each side.
    for (std::size_t k = 0; k + 1 < j_list.size(); ++k) {
        if (q_list[k + 1] < f0) CHECK(std::abs(j_list[k]) < std::abs(j_list[k + 1]));
        if (q_list[k] > f0) CHECK(std::abs(j_list[k]) > std::abs(j_list[k + 1]));
    }
}

TEST_CASE("lossy tables are used with the loss discarded and recorded") {
    const double f0 = ghz_to_rad_s(7.55);
    const Netlist lossy = add_series_loss(fixtures::lc_coupler(4e-15, f0, 500e-15), 50.0);
    const ImpedanceTable table = evaluate_z(lossy, linear_grid(4.0, 6.5, 201));
    REQUIRE(table.discarded_loss > 1e-6);
    const double ec = constants::e * constants::e / (2.0 * 85e-15);
    const TransmonSpectrum s = solve_spectrum({ec, calibrate_ej(ghz_to_rad_s(5.0), ec), 0.0, 30}, 4);
    const ExchangeResult r = j_impedance(s, s, table);
    bool noted = false;
    for (const auto& w : r.warnings) noted |= w.find("discarded loss") != std::string::npos;
    CHECK(noted);
    CHECK(std::isfinite(r.j));  // J stays real, built from Im Z only
}

TEST_CASE("pole-adjacent evaluations are marked, not refused") {
    const double f0 = ghz_to_rad_s(7.55);
    const Netlist net = fixtures::lc_coupler(4e-15, f0, 500e-15);
    const ImpedanceTable table = evaluate_z(net, linear_grid(4.0, 11.0, 301));
    const double ec = constants::e * constants::e / (2.0 * 85e-15);
    const TransmonSpectrum s = solve_spectrum({ec, calibrate_ej(0.995 * f0, ec), 0.0, 30}, 4);
    const ExchangeResult r = j_impedance(s, s, table);
    CHECK(r.unreliable);
    CHECK(!r.warnings.empty());
    CHECK(std::isfinite(r.j));
}

TEST_CASE("j_mode_sum") {
    const double q = ghz_to_rad_s(5.0);
    SUBCASE("single-mode textbook value") {
        const double g = mhz_to_rad_s(100.0);
        const ModeSet m = single_mode(ghz_to_rad_s(6.0), g, g);
        const ExchangeResult r = j_mode_sum(m, q, q);
        CHECK(r.j_over_h_mhz == doctest::Approx(-10.0).epsilon(1e-10));
    }
    SUBCASE("empty mode set") {
        ModeSet m;
        m.g.resize(0, 2);
        CHECK(j_mode_sum(m, q, q).j == 0.0);
    }
    SUBCASE("antisymmetric cancellation") {
        const double g = mhz_to_rad_s(50.0);
        const double d = ghz_to_rad_s(1.0);
        ModeSet m;
        m.omega.resize(2);
        m.omega << q - d, q + d;
        m.g.resize(2, 2);
        m.g.setConstant(g);
        const ExchangeResult r = j_mode_sum(m, q, q);
        CHECK(std::abs(r.j) <= 1e-12 * constants::hbar * g * g / d * 2.0);
    }
    SUBCASE("linear in g1 g2, odd under detuning flip") {
        const double g = mhz_to_rad_s(80.0);
        const double d = ghz_to_rad_s(1.3);
        const ExchangeResult plus = j_mode_sum(single_mode(q + d, g, g), q, q);
        const ExchangeResult minus = j_mode_sum(single_mode(q - d, g, g), q, q);
        CHECK(plus.j == doctest::Approx(-minus.j).epsilon(1e-12));
        const ExchangeResult scaled = j_mode_sum(single_mode(q + d, 2.0 * g, g), q, q);
        CHECK(scaled.j == doctest::Approx(2.0 * plus.j).epsilon(1e-12));
    }
    SUBCASE("exact resonance is an error, near-resonance warns") {
        const double g = mhz_to_rad_s(100.0);
        CHECK_THROWS_AS(j_mode_sum(single_mode(q, g, g), q, q), std::runtime_error);
        const ExchangeResult r = j_mode_sum(single_mode(q + 5.0 * g, g, g), q, q);
        CHECK(!r.warnings.empty());  // |g/(q-w)| = 0.2 strains the dispersive assumption
        CHECK(j_mode_sum(single_mode(q + 20.0 * g, g, g), q, q).warnings.empty());
    }
}

TEST_CASE("j_capacitive and fit_cc") {
    const double c1 = 81.94e-15, c2 = 81.93e-15;
    const double q = ghz_to_rad_s(4.52);
    SUBCASE("device anchor") {
        const ExchangeResult r = j_capacitive(c1, c2, 0.216e-15, q, q);
        CHECK(std::abs(r.j_over_h_mhz - 5.96) < 0.05);
    }
    SUBCASE("linear in Cc, zero at zero") {
        const ExchangeResult a = j_capacitive(c1, c2, 0.216e-15, q, q);
        const ExchangeResult b = j_capacitive(c1, c2, 0.432e-15, q, q);
        CHECK(b.j == doctest::Approx(2.0 * a.j).epsilon(1e-15));
        CHECK(j_capacitive(c1, c2, 0.0, q, q).j == 0.0);
    }
    SUBCASE("fit_cc inverts the formula") {
        const double cc = fit_cc(cyclic_to_energy(5.77e6), c1, c2, q, q);
        CHECK(cc * 1e15 == doctest::Approx(0.209).epsilon(0.01));
        for (double cc_true : {0.1e-15, 0.216e-15, 0.5e-15}) {
            const double j = j_capacitive(c1, c2, cc_true, q, q).j;
            CHECK(std::abs(fit_cc(j, c1, c2, q, q) - cc_true) <= 1e-12 * cc_true);
        }
        CHECK(fit_cc(0.0, c1, c2, q, q) == 0.0);
    }
}

TEST_CASE("pv_integral_check") {
    const double omega0 = ghz_to_rad_s(7.55);
    const double q = 0.8 * omega0;
    const Netlist lossless = fixtures::inductive_bridge(100e-15, 100e-15, omega0);

    auto table_at = [&](double quality) {
        const Netlist lossy = add_series_loss(lossless, quality);
        std::set<double> pts;
        auto add = [&](const Eigen::VectorXd& g) {
            for (Eigen::Index k = 0; k < g.size(); ++k) pts.insert(g[k]);
        };
        const double width = omega0 / quality;
        add(fixtures::log_grid_with_zoom(q / 20.0, 20.0 * q, 1200,
                                         {{omega0, 0.1}, {q, 0.05}}, 1000));
        add(fixtures::log_grid_with_zoom(omega0 - 300.0 * width, omega0 + 300.0 * width, 2,
                                         {{omega0, 300.0 * width / omega0}}, 6000));
        Eigen::VectorXd grid(static_cast<Eigen::Index>(pts.size()));
        Eigen::Index k = 0;
        for (double p : pts) grid[k++] = p;
        return evaluate_z(lossy, grid);
    };

    SUBCASE("identity holds at Q = 1e4 and tightens ~10x at 1e5") {
        const PvCheckResult r4 = pv_integral_check(table_at(1e4), q);
        CHECK(r4.applicable);
        CHECK(r4.relative_gap < 1e-2);
        // Both sides from the closed-form lossless Z12 as an external anchor:
        // q Im Z12(q) = -w0^2 / ((C1+C2)(w0^2-q^2)).
        const double closed =
            -omega0 * omega0 / (200e-15 * (omega0 * omega0 - q * q));
        CHECK(r4.reference == doctest::Approx(closed).epsilon(1e-3));
        const PvCheckResult r5 = pv_integral_check(table_at(1e5), q);
        CHECK(r5.relative_gap < r4.relative_gap / 4.0);
    }
    SUBCASE("lossless input flagged, gap pinned to 1") {
        const ImpedanceTable t = evaluate_z(lossless, linear_grid(2.0, 20.0, 801));
        const PvCheckResult r = pv_integral_check(t, q);
        CHECK(!r.applicable);
        CHECK(r.pv_value == 0.0);
        CHECK(r.relative_gap == 1.0);
        REQUIRE(!r.warnings.empty());
        CHECK(r.warnings.front().find("lossless") != std::string::npos);
    }
    SUBCASE("insufficient band coverage is an error") {
        const Netlist lossy = add_series_loss(lossless, 1e4);
        // Band stops below the resonance peak: nearly all Re Z mass outside.
        const ImpedanceTable t = evaluate_z(lossy, linear_grid(4.0, 6.0, 801));
        CHECK_THROWS_AS(pv_integral_check(t, ghz_to_rad_s(5.0)), std::runtime_error);
    }
}
