#include "jex/netlist.hpp"

#include "jex/quantities.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace jex {

namespace {

using Complex = std::complex<double>;
constexpr Complex kImag{0.0, 1.0};

bool is_ground(const std::string& node) { return node == "0" || node == "gnd" || node == "GND"; }

/// Node name -> MNA index map, ground = -1. std::map keeps the node ordering
/// deterministic across runs.
class NodeMap {
public:
    explicit NodeMap(const Netlist& n) {
        for (const auto& e : n.elements) {
            add(e.node_a);
            add(e.node_b);
        }
        for (const auto& p : n.ports) {
            add(p.node_pos);
            add(p.node_neg);
        }
        int idx = 0;
        for (auto& [name, i] : map_) i = idx++;
    }
    int index(const std::string& node) const {
        if (is_ground(node)) return -1;
        return map_.at(node);
    }
    int size() const { return static_cast<int>(map_.size()); }

private:
    void add(const std::string& node) {
        if (!is_ground(node)) map_.emplace(node, 0);
    }
    std::map<std::string, int> map_;
};

struct Stamp {
    int a, b;          // node indices, -1 = ground
    Complex yaa, yab, yba, ybb;
};

Stamp element_stamp(const NetlistElement& e, double omega, const NodeMap& nodes, bool* singular) {
    Stamp s{nodes.index(e.node_a), nodes.index(e.node_b), {}, {}, {}, {}};
    switch (e.kind) {
        case ElementKind::capacitor: {
            const Complex y = kImag * omega * e.value;
            s.yaa = s.ybb = y;
            s.yab = s.yba = -y;
            break;
        }
        case ElementKind::inductor: {
            const Complex y = 1.0 / (kImag * omega * e.value);
            s.yaa = s.ybb = y;
            s.yab = s.yba = -y;
            break;
        }
        case ElementKind::resistor: {
            const Complex y = 1.0 / e.value;
            s.yaa = s.ybb = y;
            s.yab = s.yba = -y;
            break;
        }
        case ElementKind::tline: {
            // Ideal lossless line as a frequency-domain two-port between the
            // terminal nodes, both referenced to ground.
            const double z0 = e.value;
            const double theta = omega * e.value2;
            const double sn = std::sin(theta);
            const double cs = std::cos(theta);
            if (std::abs(sn) < 1e-12) {
                *singular = true;
                break;
            }
            s.yaa = s.ybb = cs / (kImag * z0 * sn);
            s.yab = s.yba = -1.0 / (kImag * z0 * sn);
            break;
        }
    }
    return s;
}

void accumulate(Eigen::MatrixXcd& y, const Stamp& s) {
    if (s.a >= 0) y(s.a, s.a) += s.yaa;
    if (s.b >= 0) y(s.b, s.b) += s.ybb;
    if (s.a >= 0 && s.b >= 0) {
        y(s.a, s.b) += s.yab;
        y(s.b, s.a) += s.yba;
    }
}

Eigen::MatrixXcd solve_ports(const Netlist& netlist, const NodeMap& nodes, double omega,
                             bool* singular) {
    const int n = nodes.size();
    const int p = static_cast<int>(netlist.ports.size());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& e : netlist.elements) {
        bool elem_singular = false;
        const Stamp s = element_stamp(e, omega, nodes, &elem_singular);
        if (elem_singular) {
            *singular = true;
            return {};
        }
        accumulate(y, s);
    }
    if (!y.allFinite()) {
        *singular = true;
        return {};
    }

    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n, p);
    for (int q = 0; q < p; ++q) {
        const int ip = nodes.index(netlist.ports[q].node_pos);
        const int in = nodes.index(netlist.ports[q].node_neg);
        if (ip >= 0) rhs(ip, q) += 1.0;
        if (in >= 0) rhs(in, q) -= 1.0;
    }

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(y);
    const Eigen::MatrixXcd& lum = lu.matrixLU();
    double max_piv = 0.0, min_piv = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double piv = std::abs(lum(i, i));
        max_piv = std::max(max_piv, piv);
        min_piv = std::min(min_piv, piv);
    }
    if (!(max_piv > 0.0) || min_piv < 1e-13 * max_piv) {
        *singular = true;
        return {};
    }

    const Eigen::MatrixXcd v = lu.solve(rhs);
    Eigen::MatrixXcd z(p, p);
    for (int q = 0; q < p; ++q) {
        const int ip = nodes.index(netlist.ports[q].node_pos);
        const int in = nodes.index(netlist.ports[q].node_neg);
        for (int r = 0; r < p; ++r) {
            Complex vq = 0.0;
            if (ip >= 0) vq += v(ip, r);
            if (in >= 0) vq -= v(in, r);
            z(q, r) = vq;
        }
    }
    if (!z.allFinite()) {
        *singular = true;
        return {};
    }
    return z;
}

const char* kind_letter(ElementKind k) {
    switch (k) {
        case ElementKind::capacitor: return "C";
        case ElementKind::inductor: return "L";
        case ElementKind::resistor: return "R";
        case ElementKind::tline: return "T";
    }
    return "?";
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void ModeSet::validate() const {
    if (g.rows() != omega.size() || (omega.size() > 0 && g.cols() != 2))
        throw std::invalid_argument("mode set: g must be modes x 2");
    for (Eigen::Index k = 0; k < omega.size(); ++k) {
        if (!(omega[k] > 0.0)) throw std::invalid_argument("mode set: mode frequencies must be > 0");
        if (k > 0 && !(omega[k] > omega[k - 1]))
            throw std::invalid_argument("mode set: mode frequencies must be strictly increasing");
    }
}

void Netlist::validate() const {
    if (ports.empty()) throw std::invalid_argument("netlist: no ports defined");
    std::set<std::string> nodes;
    bool touches_ground = false;
    for (const auto& e : elements) {
        if (!(e.value > 0.0)) throw std::invalid_argument("netlist: element values must be > 0");
        if (e.kind == ElementKind::tline) {
            if (!(e.value2 > 0.0))
                throw std::invalid_argument("netlist: transmission line delay must be > 0");
            touches_ground = true;  // the line's return path is ground
        }
        if (e.node_a == e.node_b) throw std::invalid_argument("netlist: element shorted to itself");
        for (const auto& node : {e.node_a, e.node_b}) {
            if (is_ground(node)) touches_ground = true;
            else nodes.insert(node);
        }
    }
    if (!touches_ground) throw std::invalid_argument("netlist: no element touches ground");
    for (const auto& p : ports) {
        for (const auto& node : {p.node_pos, p.node_neg}) {
            if (!is_ground(node) && nodes.find(node) == nodes.end())
                throw std::invalid_argument("netlist: port node '" + node + "' not in circuit");
        }
    }

    // Connectivity after grounding: union-find over named nodes plus ground.
    std::map<std::string, std::string> parent;
    std::function<std::string(const std::string&)> find = [&](const std::string& x) {
        auto it = parent.find(x);
        if (it == parent.end() || it->second == x) return x;
        return it->second = find(it->second);
    };
    auto unite = [&](const std::string& a, const std::string& b) {
        const std::string ra = find(a), rb = find(b);
        if (ra != rb) parent[ra] = rb;
    };
    parent.emplace("0", "0");
    for (const auto& e : elements) {
        const std::string a = is_ground(e.node_a) ? "0" : e.node_a;
        const std::string b = is_ground(e.node_b) ? "0" : e.node_b;
        parent.emplace(a, a);
        parent.emplace(b, b);
        unite(a, b);
        if (e.kind == ElementKind::tline) unite(a, "0");
    }
    const std::string ground_root = find("0");
    for (const auto& node : nodes) {
        if (find(node) != ground_root)
            throw std::invalid_argument("netlist: node '" + node + "' disconnected from ground");
    }
}

Netlist parse_netlist(std::string_view text) {
    Netlist out;
    std::map<int, NetlistPort> ports;
    std::istringstream stream{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (const auto bang = line.find('!'); bang != std::string::npos) line.erase(bang);
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string tok;
        while (ls >> tok) toks.push_back(tok);
        if (toks.empty()) continue;

        auto want = [&](std::size_t n) {
            if (toks.size() != n)
                throw ParseError("netlist line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(n) + " tokens, got " + std::to_string(toks.size()));
        };
        auto num = [&](const std::string& t) {
            try {
                return std::stod(t);
            } catch (const std::exception&) {
                throw ParseError("netlist line " + std::to_string(line_no) + ": bad number '" + t +
                                 "'");
            }
        };

        std::string head = toks[0];
        std::transform(head.begin(), head.end(), head.begin(), ::toupper);
        if (head == "C" || head == "L" || head == "R") {
            want(4);
            NetlistElement e;
            e.kind = head == "C"   ? ElementKind::capacitor
                     : head == "L" ? ElementKind::inductor
                                   : ElementKind::resistor;
            e.node_a = toks[1];
            e.node_b = toks[2];
            e.value = num(toks[3]);
            out.elements.push_back(e);
        } else if (head == "T") {
            want(5);
            NetlistElement e;
            e.kind = ElementKind::tline;
            e.node_a = toks[1];
            e.node_b = toks[2];
            e.value = num(toks[3]);
            e.value2 = num(toks[4]);
            out.elements.push_back(e);
        } else if (head == "PORT") {
            want(4);
            const int idx = static_cast<int>(num(toks[1]));
            if (ports.count(idx))
                throw ParseError("netlist line " + std::to_string(line_no) + ": duplicate port " +
                                 std::to_string(idx));
            ports[idx] = NetlistPort{toks[2], toks[3]};
        } else {
            throw ParseError("netlist line " + std::to_string(line_no) + ": unknown element '" +
                             toks[0] + "'");
        }
    }
    int expect = 1;
    for (const auto& [idx, port] : ports) {
        if (idx != expect++)
            throw ParseError("netlist: port numbers must be contiguous starting at 1");
        out.ports.push_back(port);
    }
    out.validate();
    return out;
}

std::string serialize_netlist(const Netlist& netlist) {
    std::ostringstream out;
    for (const auto& e : netlist.elements) {
        out << kind_letter(e.kind) << ' ' << e.node_a << ' ' << e.node_b << ' ' << fmt17(e.value);
        if (e.kind == ElementKind::tline) out << ' ' << fmt17(e.value2);
        out << '\n';
    }
    for (std::size_t q = 0; q < netlist.ports.size(); ++q)
        out << "PORT " << q + 1 << ' ' << netlist.ports[q].node_pos << ' '
            << netlist.ports[q].node_neg << '\n';
    return out.str();
}

ImpedanceTable evaluate_z(const Netlist& netlist, const Eigen::VectorXd& omega_grid) {
    netlist.validate();
    NodeMap nodes(netlist);

    std::vector<double> kept_omega;
    std::vector<Eigen::MatrixXcd> z;
    std::vector<double> flagged;
    for (Eigen::Index k = 0; k < omega_grid.size(); ++k) {
        bool singular = false;
        Eigen::MatrixXcd zk = solve_ports(netlist, nodes, omega_grid[k], &singular);
        if (singular) {
            flagged.push_back(omega_grid[k]);
            continue;
        }
        kept_omega.push_back(omega_grid[k]);
        z.push_back(std::move(zk));
    }
    if (kept_omega.empty()) throw std::runtime_error("evaluate_z: every grid point was singular");

    Eigen::VectorXd omega(static_cast<Eigen::Index>(kept_omega.size()));
    for (std::size_t k = 0; k < kept_omega.size(); ++k)
        omega[static_cast<Eigen::Index>(k)] = kept_omega[k];
    ImpedanceTable t = make_impedance_table(std::move(omega), std::move(z), 50.0,
                                            TableSource::netlist);
    t.flagged_poles = std::move(flagged);
    for (double w : t.flagged_poles) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "singular admittance at %.6g GHz (skipped)",
                      rad_s_to_ghz(w));
        t.warnings.emplace_back(buf);
    }
    return t;
}

Eigen::MatrixXcd evaluate_z_at(const Netlist& netlist, double omega) {
    NodeMap nodes(netlist);
    bool singular = false;
    Eigen::MatrixXcd z = solve_ports(netlist, nodes, omega, &singular);
    if (singular) throw std::runtime_error("evaluate_z_at: singular admittance (exact pole hit)");
    return z;
}

Netlist add_series_loss(const Netlist& netlist, double q_target) {
    if (std::isinf(q_target)) return netlist;
    if (!(q_target > 0.0)) throw std::invalid_argument("add_series_loss: Q must be > 0");

    bool has_inductor = false, has_tline = false;
    for (const auto& e : netlist.elements) {
        has_inductor |= e.kind == ElementKind::inductor;
        has_tline |= e.kind == ElementKind::tline;
    }
    if (!has_inductor) {
        if (has_tline)
            throw std::runtime_error(
                "add_series_loss: only lumped inductors can carry series loss, netlist has none");
        throw std::runtime_error("add_series_loss: no resonant branch found");
    }

    // Locate the first resonance on a broad logarithmic scan of the lossless
    // response, then size each series R as omega_1 L / Q.
    const int scan_points = 3000;
    Eigen::VectorXd scan(scan_points);
    const double lo = std::log(2.0 * constants::pi * 1e7);
    const double hi = std::log(2.0 * constants::pi * 1e12);
    for (int i = 0; i < scan_points; ++i)
        scan[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / (scan_points - 1));
    const ImpedanceTable table = evaluate_z(netlist, scan);
    const auto poles = find_poles(table, table.omega_min(), table.omega_max(), &netlist);
    if (poles.empty()) throw std::runtime_error("add_series_loss: no resonant branch found");
    const double omega1 = poles.front();

    Netlist out;
    out.ports = netlist.ports;
    int internal = 0;
    for (const auto& e : netlist.elements) {
        if (e.kind != ElementKind::inductor) {
            out.elements.push_back(e);
            continue;
        }
        const std::string mid = "_loss" + std::to_string(internal++);
        NetlistElement l = e;
        l.node_b = mid;
        NetlistElement r;
        r.kind = ElementKind::resistor;
        r.node_a = mid;
        r.node_b = e.node_b;
        r.value = omega1 * e.value / q_target;
        out.elements.push_back(l);
        out.elements.push_back(r);
    }
    out.validate();
    return out;
}

std::vector<double> find_poles(const ImpedanceTable& table, double omega_lo, double omega_hi,
                               const Netlist* refine_with) {
    const int i = 0;
    const int j = table.ports >= 2 ? 1 : 0;

    std::vector<double> im, w;
    for (Eigen::Index k = 0; k < table.omega.size(); ++k) {
        if (table.omega[k] < omega_lo || table.omega[k] > omega_hi) continue;
        w.push_back(table.omega[k]);
        im.push_back(table.z[static_cast<std::size_t>(k)](i, j).imag());
    }
    if (im.size() < 4) return {};

    std::vector<double> mags;
    for (double v : im) mags.push_back(std::abs(v));
    std::vector<double> sorted = mags;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double big = std::max(10.0 * median, 1e-12);

    std::vector<double> poles;
    for (std::size_t k = 0; k + 1 < im.size(); ++k) {
        if (im[k] == 0.0 || im[k + 1] == 0.0) continue;
        if (im[k] * im[k + 1] > 0.0) continue;
        // A pole, not a zero: both flanks large and falling away from the gap.
        if (std::abs(im[k]) < big || std::abs(im[k + 1]) < big) continue;
        const bool left_rising = k == 0 || std::abs(im[k - 1]) <= std::abs(im[k]);
        const bool right_falling = k + 2 >= im.size() || std::abs(im[k + 2]) <= std::abs(im[k + 1]);
        if (!left_rising || !right_falling) continue;

        double a = w[k], b = w[k + 1];
        if (refine_with != nullptr) {
            auto inv_im = [&](double omega) {
                const Eigen::MatrixXcd z = evaluate_z_at(*refine_with, omega);
                const double v = z(i, j).imag();
                return v == 0.0 ? 0.0 : 1.0 / v;
            };
            double fa = inv_im(a);
            for (int it = 0; it < 200 && (b - a) > 1e-9 * b; ++it) {
                const double m = 0.5 * (a + b);
                double fm;
                try {
                    fm = inv_im(m);
                } catch (const std::runtime_error&) {
                    // Exact pole hit: done.
                    a = b = m;
                    break;
                }
                if (fa * fm <= 0.0) {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
        }
        poles.push_back(0.5 * (a + b));
    }
    return poles;
}

} // namespace jex
