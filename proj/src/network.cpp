#include "jex/network.hpp"

#include "jex/quantities.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace jex {

namespace {

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream iss{std::string(line)};
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& tok, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("invalid number for ") + what + ": '" + tok + "'");
    }
}

double unit_scale(FrequencyUnit u) {
    switch (u) {
        case FrequencyUnit::hz: return 1.0;
        case FrequencyUnit::khz: return 1e3;
        case FrequencyUnit::mhz: return 1e6;
        case FrequencyUnit::ghz: return 1e9;
    }
    return 1.0;
}

std::complex<double> decode_pair(double a, double b, NumberFormat fmt) {
    switch (fmt) {
        case NumberFormat::real_imag:
            return {a, b};
        case NumberFormat::magnitude_angle:
            return std::polar(a, b * constants::pi / 180.0);
        case NumberFormat::db_angle:
            return std::polar(std::pow(10.0, a / 20.0), b * constants::pi / 180.0);
    }
    return {};
}

void compute_metrics(ImpedanceTable& t) {
    double recip = 0.0, maxabs = 0.0, loss = 0.0;
    for (const auto& m : t.z) {
        for (int i = 0; i < t.ports; ++i) {
            for (int j = 0; j < t.ports; ++j) {
                const double a = std::abs(m(i, j));
                maxabs = std::max(maxabs, a);
                if (a > 0.0) loss = std::max(loss, std::abs(m(i, j).real()) / a);
                if (j > i) recip = std::max(recip, std::abs(m(i, j) - m(j, i)));
            }
        }
    }
    t.reciprocity_error = recip;
    t.discarded_loss = loss;
    if (maxabs > 0.0 && recip > 1e-6 * maxabs)
        t.warnings.push_back("reciprocity violated beyond 1e-6 of max |Z|");
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

ImpedanceTable make_impedance_table(Eigen::VectorXd omega, std::vector<Eigen::MatrixXcd> z,
                                    double z0, TableSource source) {
    ImpedanceTable t;
    if (omega.size() == 0 || static_cast<std::size_t>(omega.size()) != z.size())
        throw std::invalid_argument("impedance table: grid/data size mismatch");
    t.ports = static_cast<int>(z.front().rows());
    for (const auto& m : z) {
        if (m.rows() != t.ports || m.cols() != t.ports)
            throw std::invalid_argument("impedance table: inconsistent matrix sizes");
    }
    for (Eigen::Index k = 0; k < omega.size(); ++k) {
        if (!(omega[k] > 0.0)) throw std::invalid_argument("impedance table: frequencies must be > 0");
        if (k > 0 && !(omega[k] > omega[k - 1]))
            throw std::invalid_argument("impedance table: frequencies must be strictly increasing");
    }
    t.omega = std::move(omega);
    t.z = std::move(z);
    t.reference_impedance = z0;
    t.source = source;
    compute_metrics(t);
    return t;
}

NetworkFile parse_touchstone(std::string_view text, int ports_hint) {
    NetworkFile f;
    bool option_seen = false;
    std::vector<double> numbers;

    std::istringstream stream{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (const auto bang = line.find('!'); bang != std::string::npos) line.erase(bang);
        const auto toks = split_ws(line);
        if (toks.empty()) continue;

        if (toks[0][0] == '[')
            throw ParseError("Touchstone v2 keyword '" + toks[0] + "' at line " +
                             std::to_string(line_no) + "; only Touchstone v1 is supported");

        if (toks[0][0] == '#') {
            if (option_seen) throw ParseError("duplicate option line at line " + std::to_string(line_no));
            option_seen = true;
            std::vector<std::string> opts;
            if (toks[0].size() > 1) opts.push_back(toks[0].substr(1));
            opts.insert(opts.end(), toks.begin() + 1, toks.end());
            for (std::size_t i = 0; i < opts.size(); ++i) {
                const std::string u = upper(opts[i]);
                if (u == "HZ") f.unit = FrequencyUnit::hz;
                else if (u == "KHZ") f.unit = FrequencyUnit::khz;
                else if (u == "MHZ") f.unit = FrequencyUnit::mhz;
                else if (u == "GHZ") f.unit = FrequencyUnit::ghz;
                else if (u == "S") f.kind = ParamKind::S;
                else if (u == "Y") f.kind = ParamKind::Y;
                else if (u == "Z") f.kind = ParamKind::Z;
                else if (u == "RI") f.format = NumberFormat::real_imag;
                else if (u == "MA") f.format = NumberFormat::magnitude_angle;
                else if (u == "DB") f.format = NumberFormat::db_angle;
                else if (u == "R") {
                    if (i + 1 >= opts.size()) throw ParseError("option line: R without a value");
                    f.reference_impedance = parse_double(opts[++i], "reference impedance");
                } else {
                    throw ParseError("option line: unknown token '" + opts[i] + "'");
                }
            }
            continue;
        }

        if (!option_seen)
            throw ParseError("data before option line at line " + std::to_string(line_no) +
                             " (missing '#' option line?)");
        for (const auto& tok : toks) numbers.push_back(parse_double(tok, "network data"));
    }

    if (!option_seen) throw ParseError("missing Touchstone option line");
    if (numbers.empty()) throw ParseError("Touchstone file contains no data");

    auto record_len = [](int p) { return 1 + 2 * p * p; };
    auto monotone_for = [&](int p) {
        const int len = record_len(p);
        double prev = -1.0;
        for (std::size_t k = 0; k < numbers.size(); k += len) {
            if (numbers[k] <= prev) return false;
            prev = numbers[k];
        }
        return true;
    };

    int ports = 0;
    if (ports_hint > 0) {
        if (numbers.size() % record_len(ports_hint) != 0)
            throw ParseError("inconsistent column count for a " + std::to_string(ports_hint) +
                             "-port file");
        ports = ports_hint;
    } else {
        for (int p = 1; p <= 32; ++p) {
            if (numbers.size() % record_len(p) == 0 && monotone_for(p)) {
                ports = p;
                break;
            }
        }
        if (ports == 0) throw ParseError("could not infer port count from data layout");
    }

    const int len = record_len(ports);
    const std::size_t records = numbers.size() / len;
    const double scale = unit_scale(f.unit);
    f.ports = ports;
    double prev_f = -1.0;
    for (std::size_t r = 0; r < records; ++r) {
        const double* rec = numbers.data() + r * len;
        const double freq_hz = rec[0] * scale;
        if (freq_hz <= prev_f)
            throw ParseError("non-monotone frequencies in Touchstone data");
        prev_f = freq_hz;
        Eigen::MatrixXcd m(ports, ports);
        for (int k = 0; k < ports * ports; ++k) {
            const std::complex<double> v = decode_pair(rec[1 + 2 * k], rec[2 + 2 * k], f.format);
            int i, j;
            if (ports == 2) {
                // Touchstone v1 two-port order: S11 S21 S12 S22.
                static constexpr int row[4] = {0, 1, 0, 1};
                static constexpr int col[4] = {0, 0, 1, 1};
                i = row[k];
                j = col[k];
            } else {
                i = k / ports;
                j = k % ports;
            }
            m(i, j) = v;
        }
        f.frequencies_hz.push_back(freq_hz);
        f.data.push_back(std::move(m));
    }
    return f;
}

std::string write_touchstone(const ImpedanceTable& table, ParamKind kind) {
    std::ostringstream out;
    out << "! " << table.ports << "-port network data\n";
    out << "# Hz " << (kind == ParamKind::S ? "S" : "Z") << " RI R " << fmt17(table.reference_impedance)
        << "\n";
    for (Eigen::Index k = 0; k < table.omega.size(); ++k) {
        const double f_hz = to_cyclic(table.omega[k]);
        Eigen::MatrixXcd m = table.z[k];
        if (kind == ParamKind::S) m = z_to_s(m, table.reference_impedance);
        out << fmt17(f_hz);
        int written = 0;
        auto emit = [&](std::complex<double> v) {
            out << ' ' << fmt17(v.real()) << ' ' << fmt17(v.imag());
            if (table.ports > 2 && ++written % 4 == 0 && written < table.ports * table.ports)
                out << "\n ";
        };
        if (table.ports == 2) {
            emit(m(0, 0));
            emit(m(1, 0));
            emit(m(0, 1));
            emit(m(1, 1));
        } else {
            for (int i = 0; i < table.ports; ++i)
                for (int j = 0; j < table.ports; ++j) emit(m(i, j));
        }
        out << '\n';
    }
    return out.str();
}

ImpedanceTable to_impedance_table(const NetworkFile& file) {
    const std::size_t n = file.frequencies_hz.size();
    Eigen::VectorXd omega(n);
    std::vector<Eigen::MatrixXcd> z;
    z.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        omega[static_cast<Eigen::Index>(k)] = to_angular(file.frequencies_hz[k]);
        switch (file.kind) {
            case ParamKind::S:
                z.push_back(s_to_z(file.data[k], file.reference_impedance));
                break;
            case ParamKind::Z:
                z.push_back(file.data[k]);
                break;
            case ParamKind::Y: {
                Eigen::FullPivLU<Eigen::MatrixXcd> lu(file.data[k]);
                if (!lu.isInvertible()) throw std::runtime_error("Y matrix not invertible");
                z.push_back(lu.inverse());
                break;
            }
        }
    }
    return make_impedance_table(std::move(omega), std::move(z), file.reference_impedance,
                                TableSource::touchstone);
}

Eigen::MatrixXcd s_to_z(const Eigen::MatrixXcd& s, double z0) {
    const auto n = s.rows();
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(eye - s);
    const Eigen::MatrixXcd& lum = lu.matrixLU();
    double max_piv = 0.0, min_piv = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double p = std::abs(lum(i, i));
        max_piv = std::max(max_piv, p);
        min_piv = std::min(min_piv, p);
    }
    if (!(min_piv > 1e-12 * std::max(1.0, max_piv)))
        throw std::runtime_error("s_to_z: (I - S) singular (port at a reflection pole)");
    return z0 * (eye + s) * lu.inverse();
}

Eigen::MatrixXcd z_to_s(const Eigen::MatrixXcd& z, double z0) {
    const auto n = z.rows();
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(z + z0 * eye);
    if (!lu.isInvertible()) throw std::runtime_error("z_to_s: (Z + Z0 I) singular");
    return (z - z0 * eye) * lu.inverse();
}

ZInterpolant::ZInterpolant(const ImpedanceTable& table, int port_i, int port_j) {
    if (port_i < 0 || port_j < 0 || port_i >= table.ports || port_j >= table.ports)
        throw std::invalid_argument("interpolate_z: port index out of range");
    const auto n = table.omega.size();
    Eigen::VectorXd re(n), im(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        re[k] = table.z[static_cast<std::size_t>(k)](port_i, port_j).real();
        im[k] = table.z[static_cast<std::size_t>(k)](port_i, port_j).imag();
    }
    re_ = PchipCurve(table.omega, re);
    im_ = PchipCurve(table.omega, im);
    im_samples_ = im;
}

InterpolatedZ ZInterpolant::at(double omega) const {
    InterpolatedZ out;
    out.value = {re_(omega), im_(omega)};
    const Eigen::Index k = im_.locate(omega);
    const double a = im_samples_[k], b = im_samples_[k + 1];
    const double denom = std::max({std::abs(a), std::abs(b), 1e-300});
    if (std::abs(b - a) / denom > 0.5)
        out.warnings.push_back("pole proximity: Im Z changes by >50% between neighboring samples");
    if (std::abs(out.value.imag()) > 1e4)
        out.warnings.push_back("pole proximity: |Im Z| exceeds 1e4 ohm");
    return out;
}

InterpolatedZ interpolate_z(const ImpedanceTable& table, int port_i, int port_j, double omega) {
    return ZInterpolant(table, port_i, port_j).at(omega);
}

CapacitanceFit extract_capacitance(const ImpedanceTable& table, int port,
                                   double omega_lo, double omega_hi) {
    if (port < 0 || port >= table.ports)
        throw std::invalid_argument("extract_capacitance: port index out of range");
    if (!(omega_lo < omega_hi)) throw std::invalid_argument("extract_capacitance: empty band");
    if (omega_lo < table.omega_min() || omega_hi > table.omega_max())
        throw std::domain_error("extract_capacitance: band outside tabulated grid");

    std::vector<double> c_samples;
    double prev_im = 0.0;
    bool first = true;
    Eigen::Index used = 0;
    std::vector<double> im_in_band, omega_in_band;
    for (Eigen::Index k = 0; k < table.omega.size(); ++k) {
        const double w = table.omega[k];
        if (w < omega_lo || w > omega_hi) continue;
        const double im = table.z[static_cast<std::size_t>(k)](port, port).imag();
        if (im >= 0.0)
            throw std::runtime_error("extract_capacitance: Im Z_ii >= 0 in band (not capacitive)");
        if (!first && im * prev_im < 0.0)
            throw std::runtime_error("extract_capacitance: Im Z_ii changes sign in band (resonance)");
        first = false;
        prev_im = im;
        c_samples.push_back(-1.0 / (w * im));
        im_in_band.push_back(im);
        omega_in_band.push_back(w);
        ++used;
    }
    if (c_samples.size() < 2)
        throw std::runtime_error("extract_capacitance: fewer than two grid samples in band");

    CapacitanceFit fit;
    double sum = 0.0;
    for (double c : c_samples) sum += c;
    fit.capacitance = sum / static_cast<double>(c_samples.size());
    double ss = 0.0;
    for (std::size_t k = 0; k < im_in_band.size(); ++k) {
        const double model = -1.0 / (omega_in_band[k] * fit.capacitance);
        const double rel = (model - im_in_band[k]) / im_in_band[k];
        ss += rel * rel;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(im_in_band.size()));
    fit.samples = static_cast<int>(used);
    return fit;
}

std::string write_impedance_csv(const ImpedanceTable& table) {
    if (table.ports > 9) throw std::invalid_argument("impedance CSV limited to 9 ports");
    std::ostringstream out;
    out << "freq_hz";
    for (int i = 1; i <= table.ports; ++i)
        for (int j = 1; j <= table.ports; ++j) out << ",re_Z" << i << j;
    for (int i = 1; i <= table.ports; ++i)
        for (int j = 1; j <= table.ports; ++j) out << ",im_Z" << i << j;
    out << '\n';
    for (Eigen::Index k = 0; k < table.omega.size(); ++k) {
        out << fmt17(to_cyclic(table.omega[k]));
        const auto& m = table.z[static_cast<std::size_t>(k)];
        for (int i = 0; i < table.ports; ++i)
            for (int j = 0; j < table.ports; ++j) out << ',' << fmt17(m(i, j).real());
        for (int i = 0; i < table.ports; ++i)
            for (int j = 0; j < table.ports; ++j) out << ',' << fmt17(m(i, j).imag());
        out << '\n';
    }
    return out.str();
}

ImpedanceTable parse_impedance_csv(std::string_view text) {
    std::istringstream stream{std::string(text)};
    std::string line;
    int line_no = 0;

    auto split_csv = [](const std::string& l) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream ss(l);
        while (std::getline(ss, cur, ',')) {
            // trim
            const auto b = cur.find_first_not_of(" \t\r");
            const auto e = cur.find_last_not_of(" \t\r");
            out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
        }
        return out;
    };

    if (!std::getline(stream, line)) throw ParseError("impedance CSV: empty file");
    ++line_no;
    const auto header = split_csv(line);
    if (header.empty() || header[0] != "freq_hz")
        throw ParseError("impedance CSV: first header column must be freq_hz");
    const std::size_t pair_cols = header.size() - 1;
    if (pair_cols == 0 || pair_cols % 2 != 0)
        throw ParseError("impedance CSV: expected matching re/im column blocks");
    const auto p2 = pair_cols / 2;
    const int ports = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p2))));
    if (static_cast<std::size_t>(ports) * static_cast<std::size_t>(ports) != p2)
        throw ParseError("impedance CSV: column count is not 1 + 2 P^2");

    std::vector<double> freqs;
    std::vector<Eigen::MatrixXcd> z;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw ParseError("impedance CSV line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " columns, got " +
                             std::to_string(cells.size()));
        std::vector<double> vals(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            try {
                vals[c] = std::stod(cells[c]);
            } catch (const std::exception&) {
                throw ParseError("impedance CSV line " + std::to_string(line_no) +
                                 ": invalid number '" + cells[c] + "'");
            }
        }
        freqs.push_back(vals[0]);
        Eigen::MatrixXcd m(ports, ports);
        for (int i = 0; i < ports; ++i)
            for (int j = 0; j < ports; ++j)
                m(i, j) = {vals[1 + i * ports + j],
                           vals[1 + static_cast<std::size_t>(ports) * ports + i * ports + j]};
        z.push_back(std::move(m));
    }
    if (freqs.empty()) throw ParseError("impedance CSV: no data rows");
    Eigen::VectorXd omega(static_cast<Eigen::Index>(freqs.size()));
    for (std::size_t k = 0; k < freqs.size(); ++k)
        omega[static_cast<Eigen::Index>(k)] = to_angular(freqs[k]);
    return make_impedance_table(std::move(omega), std::move(z), 50.0, TableSource::csv);
}

} // namespace jex
