#pragma once

#include "jex/interpolate.hpp"

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jex {

/// Malformed input text (Touchstone, CSV, netlist). The CLI maps this to a
/// usage/config exit code.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ParamKind { S, Y, Z };
enum class NumberFormat { real_imag, magnitude_angle, db_angle };
enum class FrequencyUnit { hz, khz, mhz, ghz };
enum class TableSource { touchstone, csv, netlist };

/// Raw contents of a Touchstone v1 file: frequencies in Hz, one PxP complex
/// matrix per frequency, values as written (S dimensionless, Z/Y in ohms /
/// siemens).
struct NetworkFile {
    ParamKind kind = ParamKind::S;
    NumberFormat format = NumberFormat::real_imag;
    FrequencyUnit unit = FrequencyUnit::ghz;
    double reference_impedance = 50.0;
    int ports = 0;
    std::vector<double> frequencies_hz;
    std::vector<Eigen::MatrixXcd> data;
};

/// Frequency-gridded multi-port impedance data, strictly increasing angular
/// frequencies, all positive. Immutable after construction.
struct ImpedanceTable {
    int ports = 0;
    Eigen::VectorXd omega;               // rad/s, strictly increasing
    std::vector<Eigen::MatrixXcd> z;     // ohms, one PxP matrix per frequency
    double reference_impedance = 50.0;   // provenance metadata
    TableSource source = TableSource::touchstone;
    double reciprocity_error = 0.0;      // max |Z_ij - Z_ji| over the grid
    double discarded_loss = 0.0;         // max |Re Z| / |Z| over the grid
    std::vector<double> flagged_poles;   // rad/s, grid points skipped by the evaluator
    std::vector<std::string> warnings;

    double omega_min() const { return omega[0]; }
    double omega_max() const { return omega[omega.size() - 1]; }
};

ImpedanceTable make_impedance_table(Eigen::VectorXd omega, std::vector<Eigen::MatrixXcd> z,
                                    double z0, TableSource source);

/// Touchstone v1 (.sNp). Option line parsed case-insensitively; `!` comments;
/// 2-port data in the S11 S21 S12 S22 column order; P >= 3 row-major with
/// line wrapping. Touchstone v2 markers are rejected. `ports_hint` (e.g. from
/// the file extension) resolves the port count; 0 infers it from the layout.
NetworkFile parse_touchstone(std::string_view text, int ports_hint = 0);

/// Serialize a table as Hz / Z or S / RI Touchstone text, bit-faithful
/// (17 significant digits).
std::string write_touchstone(const ImpedanceTable& table, ParamKind kind = ParamKind::S);

ImpedanceTable to_impedance_table(const NetworkFile& file);

/// Z = Z0 (I + S)(I - S)^-1 for a uniform real reference impedance.
/// Throws when (I - S) is singular below conditioning threshold 1e-12.
Eigen::MatrixXcd s_to_z(const Eigen::MatrixXcd& s, double z0);

/// Inverse of s_to_z, provided for round-trip testing.
Eigen::MatrixXcd z_to_s(const Eigen::MatrixXcd& z, double z0);

/// Result of one interpolation query.
struct InterpolatedZ {
    std::complex<double> value;
    std::vector<std::string> warnings;   // pole-proximity notes
};

/// Prepared monotone-cubic interpolant of one Z entry (real and imaginary
/// parts fitted separately). Build once, query many times.
class ZInterpolant {
public:
    ZInterpolant(const ImpedanceTable& table, int port_i, int port_j);

    InterpolatedZ at(double omega) const;
    std::complex<double> value(double omega) const { return {re_(omega), im_(omega)}; }
    const PchipCurve& real_part() const { return re_; }
    const PchipCurve& imag_part() const { return im_; }

private:
    PchipCurve re_, im_;
    Eigen::VectorXd im_samples_;
};

/// One-shot convenience wrapper around ZInterpolant.
InterpolatedZ interpolate_z(const ImpedanceTable& table, int port_i, int port_j, double omega);

struct CapacitanceFit {
    double capacitance = 0.0;  // farads
    double residual = 0.0;     // rms relative misfit of Im Z vs -1/(omega C)
    int samples = 0;
};

/// Fit Im Z_ii = -1/(omega C) over [omega_lo, omega_hi]; C is the mean of
/// -1/(omega Im Z_ii). The band must be capacitive throughout (Im Z < 0, no
/// sign change).
CapacitanceFit extract_capacitance(const ImpedanceTable& table, int port,
                                   double omega_lo, double omega_hi);

/// CSV schema: `freq_hz,re_Z11,...,im_Z11,...` row-major port pairs, UTF-8,
/// `.` decimal separator.
std::string write_impedance_csv(const ImpedanceTable& table);
ImpedanceTable parse_impedance_csv(std::string_view text);

} // namespace jex
