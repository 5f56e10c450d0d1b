// Command-line front end: spectra, calibration, exchange-rate sweeps, ZZ
// analysis, netlist evaluation, the Plemelj identity check, and the built-in
// oracle suite.
//
// Exit codes: 0 success, 1 computation failure, 2 usage/config error.

#include "jex/dispersive.hpp"
#include "jex/exchange.hpp"
#include "jex/netlist.hpp"
#include "jex/network.hpp"
#include "jex/oracle.hpp"
#include "jex/quantities.hpp"
#include "jex/transmon.hpp"
#include "jex/zz.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// quantities with explicit unit suffixes ("250 MHz", "57.24 fF", "-8.82MHz")

double parse_with_units(const std::string& text,
                        const std::vector<std::pair<std::string, double>>& units,
                        const char* kind) {
    std::string s = text;
    s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
    for (const auto& [suffix, scale] : units) {
        if (s.size() > suffix.size() &&
            s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
            const std::string num = s.substr(0, s.size() - suffix.size());
            try {
                std::size_t pos = 0;
                const double v = std::stod(num, &pos);
                if (pos != num.size()) break;
                return v * scale;
            } catch (const std::exception&) {
                break;
            }
        }
    }
    throw UsageError(std::string("could not parse ") + kind + " '" + text +
                     "' (explicit unit suffix required)");
}

/// Cyclic frequency with unit -> Hz. Longest suffixes first so "MHz" does not
/// match the trailing "Hz".
double parse_frequency_hz(const std::string& text) {
    return parse_with_units(text,
                            {{"GHz", 1e9}, {"MHz", 1e6}, {"kHz", 1e3}, {"Hz", 1.0}},
                            "frequency");
}

double parse_frequency_rad_s(const std::string& text) {
    return jex::to_angular(parse_frequency_hz(text));
}

/// Energy given as a cyclic frequency (E/h) -> joules.
double parse_energy_j(const std::string& text) {
    return jex::cyclic_to_energy(parse_frequency_hz(text));
}

double parse_capacitance_f(const std::string& text) {
    return parse_with_units(text,
                            {{"fF", 1e-15}, {"pF", 1e-12}, {"nF", 1e-9}, {"uF", 1e-6}, {"F", 1.0}},
                            "capacitance");
}

// ---------------------------------------------------------------------------
// i/o helpers

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file '" + path.string() + "'");
    out << content;
}

struct Output {
    fs::path dir = ".";
    bool json_mode = false;
    bool gnuplot = false;

    fs::path resolve(const std::string& name) const { return dir / name; }
    void prepare() const {
        if (!fs::exists(dir)) fs::create_directories(dir);
    }
    /// Timestamps live only here, never in data files.
    void sidecar_log(const std::string& command, const std::string& note) const {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char stamp[64];
        std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        std::ofstream log(resolve(command + ".log"), std::ios::app);
        log << stamp << ' ' << note << '\n';
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

std::string join_warnings(const std::vector<std::string>& warnings) {
    std::string out;
    for (const auto& w : warnings) {
        std::string clean = w;
        std::replace(clean.begin(), clean.end(), ',', ';');
        if (!out.empty()) out += " | ";
        out += clean;
    }
    return out.empty() ? "-" : out;
}

jex::ImpedanceTable load_table(const std::string& touchstone_path, const std::string& csv_path) {
    if (!touchstone_path.empty()) {
        int hint = 0;
        const auto ext = fs::path(touchstone_path).extension().string();
        if (ext.size() > 3 && (ext[1] == 's' || ext[1] == 'S') && (ext.back() == 'p' || ext.back() == 'P')) {
            try {
                hint = std::stoi(ext.substr(2, ext.size() - 3));
            } catch (const std::exception&) {
                hint = 0;
            }
        }
        return jex::to_impedance_table(jex::parse_touchstone(read_file(touchstone_path), hint));
    }
    return jex::parse_impedance_csv(read_file(csv_path));
}

/// 2-port view picking two ports out of a larger table.
jex::ImpedanceTable subtable(const jex::ImpedanceTable& t, int a, int b) {
    if (a == 0 && b == 1 && t.ports == 2) return t;
    if (a < 0 || b < 0 || a >= t.ports || b >= t.ports || a == b)
        throw UsageError("port selection out of range");
    std::vector<Eigen::MatrixXcd> z;
    z.reserve(t.z.size());
    for (const auto& m : t.z) {
        Eigen::MatrixXcd s(2, 2);
        s << m(a, a), m(a, b), m(b, a), m(b, b);
        z.push_back(std::move(s));
    }
    jex::ImpedanceTable out =
        jex::make_impedance_table(t.omega, std::move(z), t.reference_impedance, t.source);
    out.flagged_poles = t.flagged_poles;
    return out;
}

// ---------------------------------------------------------------------------
// subcommand state

struct SpectrumArgs {
    std::string ec, ctotal, ej, f01, prefix = "spectrum";
    double ng = 0.0;
    int levels = 5;
};

struct JrateArgs {
    std::string touchstone, csv;
    std::string ec1, ec2, c1, c2;
    std::string mode = "equal";
    std::string fmin, fmax, fixed_f;
    int points = 41;
    int port1 = 1, port2 = 2;
    int levels = 4;
    std::string prefix = "jrate";
};

struct ZzArgs {
    std::string q1, q2, a1, a2, ac, j12;
    std::string jcurve, qc, j1c, j2c;
    int trunc = 5;
    std::string prefix = "zz";
};

struct NetlistZArgs {
    std::string netlist, fmin, fmax, out = "table.s2p";
    int points = 201;
    bool log_grid = false;
    bool find_poles_flag = false;
    std::string format = "touchstone";
};

struct PvArgs {
    std::string netlist, touchstone, csv, q;
    double loss_q = 1e4;
};

// ---------------------------------------------------------------------------

jex::TransmonSpec qubit_spec(const std::string& ec, const std::string& cap,
                             const std::string& label, double target_q01) {
    double charging;
    if (!ec.empty()) {
        charging = parse_energy_j(ec);
    } else if (!cap.empty()) {
        charging = jex::constants::e * jex::constants::e / (2.0 * parse_capacitance_f(cap));
    } else {
        throw UsageError("qubit " + label + ": give --ec or --c (charging energy or capacitance)");
    }
    jex::TransmonSpec spec;
    spec.charging_energy = charging;
    spec.josephson_energy = jex::calibrate_ej(target_q01, charging);
    return spec;
}

int cmd_spectrum(const SpectrumArgs& a, const Output& out) {
    if (a.ec.empty() == a.ctotal.empty())
        throw UsageError("spectrum: give exactly one of --ec / --ctotal");
    if (a.ej.empty() && a.f01.empty())
        throw UsageError("spectrum: give --ej or a target --f01");

    jex::TransmonSpec spec;
    spec.offset_charge = a.ng;
    spec.charging_energy = a.ec.empty()
                               ? jex::constants::e * jex::constants::e /
                                     (2.0 * parse_capacitance_f(a.ctotal))
                               : parse_energy_j(a.ec);
    spec.josephson_energy = a.ej.empty()
                                ? jex::calibrate_ej(parse_frequency_rad_s(a.f01),
                                                    spec.charging_energy, a.ng)
                                : parse_energy_j(a.ej);

    const jex::TransmonSpectrum s = jex::solve_spectrum(spec, a.levels);

    std::ostringstream levels_csv;
    levels_csv << "level,energy_GHz\n";
    for (Eigen::Index j = 0; j < s.level_energies.size(); ++j)
        levels_csv << j << ',' << fmt("%.9f", jex::rad_s_to_ghz(s.level_energies[j])) << '\n';
    std::ostringstream nmat_csv;
    for (Eigen::Index i = 0; i < s.charge_matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < s.charge_matrix.cols(); ++j)
            nmat_csv << (j ? "," : "") << fmt("%.12g", s.charge_matrix(i, j));
        nmat_csv << '\n';
    }
    out.prepare();
    write_file(out.resolve(a.prefix + "_levels.csv"), levels_csv.str());
    write_file(out.resolve(a.prefix + "_nmatrix.csv"), nmat_csv.str());
    out.sidecar_log("spectrum", "wrote " + a.prefix + "_levels.csv, " + a.prefix + "_nmatrix.csv");

    if (out.json_mode) {
        json doc;
        doc["q01_GHz"] = jex::rad_s_to_ghz(s.transitions[0]);
        doc["alpha_MHz"] = jex::rad_s_to_mhz(s.anharmonicity);
        doc["EJ_over_EC"] = spec.josephson_energy / spec.charging_energy;
        doc["levels_GHz"] = json::array();
        for (Eigen::Index j = 0; j < s.level_energies.size(); ++j)
            doc["levels_GHz"].push_back(jex::rad_s_to_ghz(s.level_energies[j]));
        doc["n_matrix"] = json::array();
        for (Eigen::Index i = 0; i < s.charge_matrix.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < s.charge_matrix.cols(); ++j)
                row.push_back(s.charge_matrix(i, j));
            doc["n_matrix"].push_back(row);
        }
        doc["converged"] = s.converged;
        doc["charge_cutoff"] = s.cutoff_used;
        doc["warnings"] = s.warnings;
        std::cout << doc.dump(2) << '\n';
        return 0;
    }

    std::cout << "q01_GHz   = " << fmt("%.6f", jex::rad_s_to_ghz(s.transitions[0])) << '\n';
    std::cout << "alpha_MHz = " << fmt("%.3f", jex::rad_s_to_mhz(s.anharmonicity)) << '\n';
    std::cout << "EJ_over_EC = " << fmt("%.3f", spec.josephson_energy / spec.charging_energy)
              << '\n';
    std::cout << "converged = " << (s.converged ? "true" : "false")
              << " (charge cutoff " << s.cutoff_used << ")\n";
    std::cout << "n01 = " << fmt("%.6f", s.charge_matrix(0, 1)) << '\n';
    for (const auto& w : s.warnings) std::cout << "warning: " << w << '\n';
    return 0;
}

int cmd_calibrate(const std::string& ec, const std::string& f01, double ng, const Output& out) {
    const double charging = parse_energy_j(ec);
    const double ej = jex::calibrate_ej(parse_frequency_rad_s(f01), charging, ng);
    if (out.json_mode) {
        json doc;
        doc["EJ_GHz"] = jex::energy_to_cyclic(ej) / 1e9;
        doc["EJ_over_EC"] = ej / charging;
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "EJ_GHz = " << fmt("%.6f", jex::energy_to_cyclic(ej) / 1e9) << '\n';
        std::cout << "EJ_over_EC = " << fmt("%.3f", ej / charging) << '\n';
    }
    return 0;
}

int cmd_jrate(const JrateArgs& a, const Output& out, int jobs) {
    if (a.touchstone.empty() == a.csv.empty())
        throw UsageError("jrate: give exactly one of --touchstone / --csv");
    if (a.fmin.empty() || a.fmax.empty()) throw UsageError("jrate: --fmin and --fmax required");
    if (a.mode != "equal" && a.mode != "fixed")
        throw UsageError("jrate: --mode must be equal or fixed");
    if (a.mode == "fixed" && a.fixed_f.empty())
        throw UsageError("jrate: fixed mode needs --fixed-f");
    if (a.points < 1) throw UsageError("jrate: --points must be >= 1");

    const jex::ImpedanceTable table =
        subtable(load_table(a.touchstone, a.csv), a.port1 - 1, a.port2 - 1);

    const double lo = parse_frequency_rad_s(a.fmin);
    const double hi = parse_frequency_rad_s(a.fmax);
    const double fixed = a.mode == "fixed" ? parse_frequency_rad_s(a.fixed_f) : 0.0;

    struct Row {
        double q1 = 0.0, q2 = 0.0;
        jex::ExchangeResult r;
        std::string error;
    };
    std::vector<Row> rows(static_cast<std::size_t>(a.points));

    auto run_point = [&](int i) {
        Row& row = rows[static_cast<std::size_t>(i)];
        const double swept =
            a.points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (a.points - 1);
        row.q1 = a.mode == "equal" ? swept : fixed;
        row.q2 = swept;
        try {
            const jex::TransmonSpec spec1 = qubit_spec(a.ec1, a.c1, "1", row.q1);
            const jex::TransmonSpec spec2 = qubit_spec(a.ec2, a.c2, "2", row.q2);
            const jex::TransmonSpectrum s1 = jex::solve_spectrum(spec1, a.levels);
            const jex::TransmonSpectrum s2 = jex::solve_spectrum(spec2, a.levels);
            row.r = jex::j_impedance(s1, s2, table);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };

    if (jobs <= 1) {
        for (int i = 0; i < a.points; ++i) run_point(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < a.points; i = next.fetch_add(1)) run_point(i);
            });
        for (auto& th : pool) th.join();
    }

    std::ostringstream csv;
    csv << "q1_GHz,q2_GHz,J_MHz,term1_MHz,term2_MHz,warnings\n";
    for (const auto& row : rows) {
        csv << fmt("%.9g", jex::rad_s_to_ghz(row.q1)) << ',' << fmt("%.9g", jex::rad_s_to_ghz(row.q2));
        if (!row.error.empty()) {
            std::string clean = row.error;
            std::replace(clean.begin(), clean.end(), ',', ';');
            csv << ",nan,nan,nan," << clean << '\n';
            continue;
        }
        csv << ',' << fmt("%.9g", row.r.j_over_h_mhz) << ','
            << fmt("%.9g", row.r.term1 / (jex::constants::h * 1e6)) << ','
            << fmt("%.9g", row.r.term2 / (jex::constants::h * 1e6)) << ','
            << join_warnings(row.r.warnings) << '\n';
    }
    out.prepare();
    write_file(out.resolve(a.prefix + "_curve.csv"), csv.str());
    out.sidecar_log("jrate", "wrote " + a.prefix + "_curve.csv");
    if (out.gnuplot) {
        std::ostringstream gp;
        gp << "set datafile separator ','\n"
           << "set xlabel 'qubit frequency (GHz)'\nset ylabel 'J/h (MHz)'\n"
           << "plot '" << a.prefix << "_curve.csv' using 2:3 every ::1 with lines title 'J'\n";
        write_file(out.resolve(a.prefix + "_curve.gp"), gp.str());
    }

    int failed = 0;
    for (const auto& row : rows) failed += row.error.empty() ? 0 : 1;

    if (out.json_mode) {
        json doc;
        doc["points"] = json::array();
        for (const auto& row : rows) {
            json p;
            p["q1_GHz"] = jex::rad_s_to_ghz(row.q1);
            p["q2_GHz"] = jex::rad_s_to_ghz(row.q2);
            if (row.error.empty()) {
                p["J_MHz"] = row.r.j_over_h_mhz;
                p["term1_MHz"] = row.r.term1 / (jex::constants::h * 1e6);
                p["term2_MHz"] = row.r.term2 / (jex::constants::h * 1e6);
                p["unreliable"] = row.r.unreliable;
                p["warnings"] = row.r.warnings;
            } else {
                p["error"] = row.error;
            }
            doc["points"].push_back(p);
        }
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "wrote " << (out.dir / (a.prefix + "_curve.csv")).string() << " ("
                  << a.points << " points)\n";
        int marked = 0;
        for (const auto& row : rows) marked += row.error.empty() && row.r.unreliable ? 1 : 0;
        if (marked > 0) std::cout << marked << " point(s) marked pole-adjacent\n";
        if (failed > 0) std::cout << failed << " point(s) failed\n";
    }
    return failed == a.points ? 1 : 0;  // whole sweep unusable
}

int cmd_jcap(const std::string& c1, const std::string& c2, const std::string& cc,
             const std::string& f1, const std::string& f2, const Output& out) {
    const jex::ExchangeResult r =
        jex::j_capacitive(parse_capacitance_f(c1), parse_capacitance_f(c2),
                          parse_capacitance_f(cc), parse_frequency_rad_s(f1),
                          parse_frequency_rad_s(f2));
    if (out.json_mode) {
        json doc;
        doc["J_MHz"] = r.j_over_h_mhz;
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "J_MHz = " << fmt("%.6f", r.j_over_h_mhz) << '\n';
    }
    return 0;
}

int cmd_fitcc(const std::string& j, const std::string& c1, const std::string& c2,
              const std::string& f1, const std::string& f2, const Output& out) {
    const double cc = jex::fit_cc(parse_energy_j(j), parse_capacitance_f(c1),
                                  parse_capacitance_f(c2), parse_frequency_rad_s(f1),
                                  parse_frequency_rad_s(f2));
    if (out.json_mode) {
        json doc;
        doc["Cc_fF"] = cc * 1e15;
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "Cc_fF = " << fmt("%.6f", cc * 1e15) << '\n';
    }
    return 0;
}

int cmd_zz(const ZzArgs& a, const Output& out, int jobs) {
    jex::DuffingSystem sys;
    sys.qubit1 = {parse_frequency_rad_s(a.q1), parse_frequency_rad_s(a.a1)};
    sys.qubit2 = {parse_frequency_rad_s(a.q2), parse_frequency_rad_s(a.a2)};
    sys.coupler.anharmonicity = parse_frequency_rad_s(a.ac);
    sys.j12 = parse_energy_j(a.j12);
    sys.truncation = a.trunc;

    if (a.jcurve.empty()) {
        if (a.qc.empty() || a.j1c.empty() || a.j2c.empty())
            throw UsageError("zz: give --jcurve FILE or all of --qc --j1c --j2c");
        sys.coupler.frequency = parse_frequency_rad_s(a.qc);
        sys.j1c = parse_energy_j(a.j1c);
        sys.j2c = parse_energy_j(a.j2c);
        const double zeta = jex::zz_rate(sys);
        if (out.json_mode) {
            json doc;
            doc["zz_kHz"] = zeta / (2.0 * jex::constants::pi * 1e3);
            std::cout << doc.dump(2) << '\n';
        } else {
            std::cout << "zz_kHz = " << fmt("%.6f", zeta / (2.0 * jex::constants::pi * 1e3))
                      << '\n';
        }
        return 0;
    }

    sys.coupler.frequency = 1.0;  // placeholder, swept below
    const jex::CouplerCurves curves = jex::parse_coupler_curves(read_file(a.jcurve));
    const jex::ZZCurve curve = jex::sweep_coupler(sys, curves, jobs);

    out.prepare();
    write_file(out.resolve(a.prefix + "_curve.csv"), jex::write_zz_csv(curve));
    std::ostringstream crossings;
    crossings << "q_c_GHz\n";
    for (double w : curve.crossings) crossings << fmt("%.6f", jex::rad_s_to_ghz(w)) << '\n';
    write_file(out.resolve(a.prefix + "_crossings.csv"), crossings.str());
    out.sidecar_log("zz", "wrote " + a.prefix + "_curve.csv, " + a.prefix + "_crossings.csv");
    if (out.gnuplot) {
        std::ostringstream gp;
        gp << "set datafile separator ','\n"
           << "set xlabel 'coupler frequency (GHz)'\nset ylabel 'ZZ (kHz)'\n"
           << "plot '" << a.prefix << "_curve.csv' using 1:2 every ::1 with lines title 'ZZ'\n";
        write_file(out.resolve(a.prefix + "_curve.gp"), gp.str());
    }

    if (out.json_mode) {
        json doc;
        doc["crossings_GHz"] = json::array();
        for (double w : curve.crossings) doc["crossings_GHz"].push_back(jex::rad_s_to_ghz(w));
        doc["failed_points"] = curve.failed_points;
        doc["points"] = curve.coupler_freq.size();
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "wrote " << (out.dir / (a.prefix + "_curve.csv")).string() << '\n';
        std::cout << "zero crossings: " << curve.crossings.size() << '\n';
        for (double w : curve.crossings)
            std::cout << "  q_c = " << fmt("%.6f", jex::rad_s_to_ghz(w)) << " GHz\n";
    }
    return 0;
}

int cmd_netlist_z(const NetlistZArgs& a, const Output& out) {
    const jex::Netlist net = jex::parse_netlist(read_file(a.netlist));
    const double lo = parse_frequency_rad_s(a.fmin);
    const double hi = parse_frequency_rad_s(a.fmax);
    if (!(lo < hi) || a.points < 2) throw UsageError("netlist-z: need fmin < fmax, points >= 2");

    Eigen::VectorXd grid(a.points);
    for (int i = 0; i < a.points; ++i) {
        const double t = static_cast<double>(i) / (a.points - 1);
        grid[i] = a.log_grid ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    }
    const jex::ImpedanceTable table = jex::evaluate_z(net, grid);

    out.prepare();
    if (a.format == "touchstone") {
        write_file(out.resolve(a.out), jex::write_touchstone(table, jex::ParamKind::S));
    } else if (a.format == "csv") {
        write_file(out.resolve(a.out), jex::write_impedance_csv(table));
    } else {
        throw UsageError("netlist-z: --format must be touchstone or csv");
    }
    out.sidecar_log("netlist-z", "wrote " + a.out);

    json doc;
    doc["points_kept"] = table.omega.size();
    doc["points_skipped"] = table.flagged_poles.size();
    if (a.find_poles_flag) {
        const auto poles = jex::find_poles(table, table.omega_min(), table.omega_max(), &net);
        doc["poles_GHz"] = json::array();
        for (double p : poles) doc["poles_GHz"].push_back(jex::rad_s_to_ghz(p));
    }
    if (out.json_mode) {
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "wrote " << (out.dir / a.out).string() << " (" << table.omega.size()
                  << " points";
        if (!table.flagged_poles.empty())
            std::cout << ", " << table.flagged_poles.size() << " singular points skipped";
        std::cout << ")\n";
        if (a.find_poles_flag)
            for (const auto& p : doc["poles_GHz"])
                std::cout << "pole at " << fmt("%.6f", p.get<double>()) << " GHz\n";
    }
    return 0;
}

int cmd_pv_check(const PvArgs& a, const Output& out) {
    if (a.q.empty()) throw UsageError("pv-check: --q required");
    const double q = parse_frequency_rad_s(a.q);

    jex::ImpedanceTable table;
    if (!a.netlist.empty()) {
        const jex::Netlist lossless = jex::parse_netlist(read_file(a.netlist));
        const jex::Netlist lossy = jex::add_series_loss(lossless, a.loss_q);
        // Find the first resonance to place the dense zoom.
        Eigen::VectorXd scan(2001);
        for (int i = 0; i < 2001; ++i)
            scan[i] = q / 20.0 * std::pow(400.0, static_cast<double>(i) / 2000.0);
        const auto poles =
            jex::find_poles(jex::evaluate_z(lossless, scan), scan[0], scan[2000], &lossless);
        std::vector<std::pair<double, double>> zooms{{q, 0.05}};
        for (double p : poles) {
            zooms.emplace_back(p, 200.0 / a.loss_q);
            zooms.emplace_back(p, 0.1);
        }
        const Eigen::VectorXd grid =
            jex::fixtures::log_grid_with_zoom(q / 20.0, 20.0 * q, 700, zooms, 1200);
        table = jex::evaluate_z(lossy, grid);
    } else if (!a.touchstone.empty() || !a.csv.empty()) {
        table = load_table(a.touchstone, a.csv);
    } else {
        throw UsageError("pv-check: give --netlist or --touchstone/--csv");
    }

    const jex::PvCheckResult r = jex::pv_integral_check(table, q);
    if (out.json_mode) {
        json doc;
        doc["pv_value_rad_s_ohm"] = r.pv_value;
        doc["reference_rad_s_ohm"] = r.reference;
        doc["relative_gap"] = r.relative_gap;
        doc["applicable"] = r.applicable;
        doc["warnings"] = r.warnings;
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "pv_value  = " << fmt("%.9g", r.pv_value) << " rad/s*ohm\n";
        std::cout << "reference = " << fmt("%.9g", r.reference) << " rad/s*ohm (q Im Z12(q))\n";
        std::cout << "relative_gap = " << fmt("%.3g", r.relative_gap) << '\n';
        for (const auto& w : r.warnings) std::cout << "note: " << w << '\n';
    }
    return 0;
}

int cmd_oracle(const std::string& selector, const Output& out) {
    const auto checks = jex::run_oracle_checks(selector);
    bool all = true;
    if (out.json_mode) {
        json doc = json::array();
        for (const auto& c : checks) {
            doc.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
            all &= c.passed;
        }
        std::cout << doc.dump(2) << '\n';
    } else {
        for (const auto& c : checks) {
            std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << '\n';
            all &= c.passed;
        }
    }
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exchange-coupling toolkit: transmon spectra and qubit-qubit J rates from "
                 "microwave impedance data"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key/value config file (flags win)");

    Output out;
    int jobs = 1;
    app.add_option("--output", out.dir, "Output directory for data files")->capture_default_str();
    app.add_flag("--json", out.json_mode, "Machine-readable JSON on stdout");
    app.add_flag("--gnuplot", out.gnuplot, "Also emit a gnuplot script next to curve CSVs");
    app.add_option("--jobs", jobs, "Worker pool size for sweeps")->capture_default_str();

    SpectrumArgs sa;
    auto* spectrum = app.add_subcommand("spectrum", "Transmon levels, anharmonicity, charge matrix");
    spectrum->add_option("--ec", sa.ec, "Charging energy as E_C/h, e.g. '250 MHz'");
    spectrum->add_option("--ctotal", sa.ctotal, "Total qubit capacitance, e.g. '57.24 fF'");
    spectrum->add_option("--ej", sa.ej, "Josephson energy as E_J/h, e.g. '12.5 GHz'");
    spectrum->add_option("--f01", sa.f01, "Target 0-1 frequency to calibrate E_J");
    spectrum->add_option("--ng", sa.ng, "Offset charge")->capture_default_str();
    spectrum->add_option("--levels", sa.levels, "Levels kept")->capture_default_str();
    spectrum->add_option("--prefix", sa.prefix, "Output file prefix")->capture_default_str();

    std::string cal_ec, cal_f01;
    double cal_ng = 0.0;
    auto* calibrate = app.add_subcommand("calibrate", "Invert q01 -> E_J at fixed E_C");
    calibrate->add_option("--ec", cal_ec, "Charging energy as E_C/h")->required();
    calibrate->add_option("--f01", cal_f01, "Target 0-1 frequency")->required();
    calibrate->add_option("--ng", cal_ng, "Offset charge")->capture_default_str();

    JrateArgs ja;
    auto* jrate = app.add_subcommand("jrate", "Exchange rate J from an impedance table");
    jrate->add_option("--touchstone", ja.touchstone, "Touchstone .sNp file");
    jrate->add_option("--csv", ja.csv, "Impedance CSV file");
    jrate->add_option("--ec1", ja.ec1, "Qubit 1 charging energy as E_C/h");
    jrate->add_option("--ec2", ja.ec2, "Qubit 2 charging energy as E_C/h");
    jrate->add_option("--c1", ja.c1, "Qubit 1 capacitance (alternative to --ec1)");
    jrate->add_option("--c2", ja.c2, "Qubit 2 capacitance (alternative to --ec2)");
    jrate->add_option("--mode", ja.mode, "Sweep mode: equal | fixed")->capture_default_str();
    jrate->add_option("--fmin", ja.fmin, "Sweep start frequency");
    jrate->add_option("--fmax", ja.fmax, "Sweep end frequency");
    jrate->add_option("--points", ja.points, "Sweep points")->capture_default_str();
    jrate->add_option("--fixed-f", ja.fixed_f, "Fixed qubit-1 frequency (fixed mode)");
    jrate->add_option("--port1", ja.port1, "Table port of qubit 1 (1-based)")->capture_default_str();
    jrate->add_option("--port2", ja.port2, "Table port of qubit 2 (1-based)")->capture_default_str();
    jrate->add_option("--levels", ja.levels, "Transmon levels kept")->capture_default_str();
    jrate->add_option("--prefix", ja.prefix, "Output file prefix")->capture_default_str();

    std::string jc_c1, jc_c2, jc_cc, jc_f1, jc_f2;
    auto* jcap = app.add_subcommand("jcap", "Analytic capacitive-coupling J");
    jcap->add_option("--c1", jc_c1, "Qubit 1 capacitance")->required();
    jcap->add_option("--c2", jc_c2, "Qubit 2 capacitance")->required();
    jcap->add_option("--cc", jc_cc, "Coupling capacitance")->required();
    jcap->add_option("--f1", jc_f1, "Qubit 1 frequency")->required();
    jcap->add_option("--f2", jc_f2, "Qubit 2 frequency")->required();

    std::string fc_j, fc_c1, fc_c2, fc_f1, fc_f2;
    auto* fitcc = app.add_subcommand("fitcc", "Coupling capacitance fitting a target J");
    fitcc->add_option("--j", fc_j, "Target J as J/h, e.g. '5.77 MHz'")->required();
    fitcc->add_option("--c1", fc_c1, "Qubit 1 capacitance")->required();
    fitcc->add_option("--c2", fc_c2, "Qubit 2 capacitance")->required();
    fitcc->add_option("--f1", fc_f1, "Qubit 1 frequency")->required();
    fitcc->add_option("--f2", fc_f2, "Qubit 2 frequency")->required();

    ZzArgs za;
    auto* zz = app.add_subcommand("zz", "ZZ crosstalk of the two-qubit + coupler Duffing model");
    zz->add_option("--q1", za.q1, "Qubit 1 frequency")->required();
    zz->add_option("--q2", za.q2, "Qubit 2 frequency")->required();
    zz->add_option("--alpha1", za.a1, "Qubit 1 anharmonicity (positive)")->required();
    zz->add_option("--alpha2", za.a2, "Qubit 2 anharmonicity (positive)")->required();
    zz->add_option("--alphac", za.ac, "Coupler anharmonicity (positive)")->required();
    zz->add_option("--j12", za.j12, "Fixed qubit-qubit J as J/h (signed)")->required();
    zz->add_option("--jcurve", za.jcurve, "CSV q_c_GHz,J1c_MHz,J2c_MHz for a coupler sweep");
    zz->add_option("--qc", za.qc, "Coupler frequency (single-point mode)");
    zz->add_option("--j1c", za.j1c, "J_1c as J/h (single-point mode)");
    zz->add_option("--j2c", za.j2c, "J_2c as J/h (single-point mode)");
    zz->add_option("--trunc", za.trunc, "Per-mode truncation")->capture_default_str();
    zz->add_option("--prefix", za.prefix, "Output file prefix")->capture_default_str();

    NetlistZArgs na;
    auto* netlist_z = app.add_subcommand("netlist-z", "Evaluate exact Z(omega) of a netlist");
    netlist_z->add_option("--netlist", na.netlist, "Netlist file")->required();
    netlist_z->add_option("--fmin", na.fmin, "Grid start frequency")->required();
    netlist_z->add_option("--fmax", na.fmax, "Grid end frequency")->required();
    netlist_z->add_option("--points", na.points, "Grid points")->capture_default_str();
    netlist_z->add_flag("--log", na.log_grid, "Logarithmic grid");
    netlist_z->add_option("--format", na.format, "touchstone | csv")->capture_default_str();
    netlist_z->add_option("--out", na.out, "Output file name")->capture_default_str();
    netlist_z->add_flag("--find-poles", na.find_poles_flag, "Report Z12 poles in the band");

    PvArgs pa;
    auto* pv = app.add_subcommand("pv-check", "Plemelj / Hilbert identity check on lossy data");
    pv->add_option("--netlist", pa.netlist, "Lossless netlist; series loss is inserted");
    pv->add_option("--loss-q", pa.loss_q, "Quality factor for inserted loss")->capture_default_str();
    pv->add_option("--touchstone", pa.touchstone, "Lossy Touchstone table");
    pv->add_option("--csv", pa.csv, "Lossy impedance CSV");
    pv->add_option("--q", pa.q, "Evaluation frequency")->required();

    std::string selector = "all";
    auto* oracle = app.add_subcommand("oracle", "Built-in cross-validation suite");
    oracle->add_option("selector", selector, "all | capacitive | pv | splitting | foster")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*spectrum) return cmd_spectrum(sa, out);
        if (*calibrate) return cmd_calibrate(cal_ec, cal_f01, cal_ng, out);
        if (*jrate) return cmd_jrate(ja, out, jobs);
        if (*jcap) return cmd_jcap(jc_c1, jc_c2, jc_cc, jc_f1, jc_f2, out);
        if (*fitcc) return cmd_fitcc(fc_j, fc_c1, fc_c2, fc_f1, fc_f2, out);
        if (*zz) return cmd_zz(za, out, jobs);
        if (*netlist_z) return cmd_netlist_z(na, out);
        if (*pv) return cmd_pv_check(pa, out);
        if (*oracle) return cmd_oracle(selector, out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const jex::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
