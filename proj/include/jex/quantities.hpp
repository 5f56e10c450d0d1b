#pragma once

#include <cmath>
#include <numbers>

namespace jex {

namespace constants {

inline constexpr double pi = std::numbers::pi;

// 2019 SI defining constants (exact) and CODATA 2018 derived values.
inline constexpr double e = 1.602176634e-19;          // elementary charge, C
inline constexpr double h = 6.62607015e-34;           // Planck constant, J s
inline constexpr double hbar = h / (2.0 * pi);        // reduced Planck constant, J s
inline constexpr double c0 = 299792458.0;             // speed of light, m/s
inline constexpr double eps0 = 8.8541878128e-12;      // vacuum permittivity, F/m
inline constexpr double mu0 = 1.25663706212e-6;       // vacuum permeability, H/m

} // namespace constants

/// Bundle of the constants used throughout; all strict SI.
struct PhysicalConstants {
    double elementary_charge = constants::e;
    double reduced_planck = constants::hbar;
    double planck = constants::h;
    double vacuum_permittivity = constants::eps0;
    double vacuum_permeability = constants::mu0;
};

enum class FrequencyConvention { angular, cyclic };

/// A frequency tagged with its convention. Internally the library works in
/// angular rad/s; user-facing reports are cyclic (GHz/MHz).
struct Frequency {
    double value = 0.0;
    FrequencyConvention convention = FrequencyConvention::cyclic;

    static Frequency angular(double rad_s) { return {rad_s, FrequencyConvention::angular}; }
    static Frequency cyclic(double hz) { return {hz, FrequencyConvention::cyclic}; }

    double rad_s() const {
        return convention == FrequencyConvention::angular ? value : 2.0 * constants::pi * value;
    }
    double hz() const {
        return convention == FrequencyConvention::cyclic ? value : value / (2.0 * constants::pi);
    }
};

inline double to_angular(double f_hz) { return 2.0 * constants::pi * f_hz; }
inline double to_cyclic(double omega_rad_s) { return omega_rad_s / (2.0 * constants::pi); }

inline double energy_to_cyclic(double energy_j) { return energy_j / constants::h; }
inline double cyclic_to_energy(double f_hz) { return constants::h * f_hz; }
inline double energy_to_angular(double energy_j) { return energy_j / constants::hbar; }
inline double angular_to_energy(double omega_rad_s) { return constants::hbar * omega_rad_s; }

// Report helpers.
inline double rad_s_to_ghz(double omega) { return to_cyclic(omega) / 1e9; }
inline double rad_s_to_mhz(double omega) { return to_cyclic(omega) / 1e6; }
inline double ghz_to_rad_s(double f_ghz) { return to_angular(f_ghz * 1e9); }
inline double mhz_to_rad_s(double f_mhz) { return to_angular(f_mhz * 1e6); }

} // namespace jex
