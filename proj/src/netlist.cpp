#include "nhssh/netlist.hpp"

#include <fmt/format.h>

#include <set>
#include <sstream>

namespace nhssh {

std::string spice_node(int node) {
    return fmt::format("n{}_{}", node / 2 + 1, node % 2 == 0 ? 'A' : 'B');
}

std::string write_netlist(const TransientSetup& setup) {
    const auto& p = setup.params;
    const auto branches = rc_branches(p);
    std::string out;
    auto line = [&out](const std::string& s) {
        out += s;
        out += '\n';
    };

    line(fmt::format("* resistive SSH chain, {} cells, {} boundary", p.n_cells, to_string(p.boundary)));
    line(fmt::format("* r1={:.12g} r2={:.12g} c1={:.12g} c2={:.12g} l={:.12g}", p.r1, p.r2, p.c1, p.c2, p.l));
    for (std::size_t e = 0; e < branches.size(); ++e) {
        const auto& br = branches[e];
        const int cell = static_cast<int>(e) / 2 + 1;
        const int kind = static_cast<int>(e) % 2 + 1;  // 1 intracell, 2 intercell
        const std::string mid = fmt::format("m{}_{}", cell, kind);
        line(fmt::format("R{}_{} {} {} {:.12g}", kind, cell, spice_node(br.a), mid, br.r));
        line(fmt::format("C{}_{} {} {} {:.12g}", kind, cell, mid, spice_node(br.b), br.c));
    }
    for (int j = 0; j < p.n_nodes(); ++j) {
        line(fmt::format("L{}_{} {} 0 {:.12g}", j % 2 == 0 ? 'A' : 'B', j / 2 + 1, spice_node(j), p.l));
    }
    if (!setup.source_nodes.empty()) {
        const double f = setup.drive_frequency / kTwoPi;
        // Switches are closed while ctl = 1 and open when it falls at the release time.
        const double edge = setup.dt > 0.0 ? setup.dt : 1e-9;
        line(fmt::format("VCTL ctl 0 PWL(0 1 {:.12g} 1 {:.12g} 0)", setup.switch_open_time,
                         setup.switch_open_time + edge));
        for (std::size_t s = 0; s < setup.source_nodes.size(); ++s) {
            line(fmt::format("V{} s{} 0 SIN(0 {:.12g} {:.12g})", s + 1, s + 1, setup.source_amplitude, f));
            line(fmt::format("S{} s{} {} ctl 0 SWIDEAL", s + 1, s + 1, spice_node(setup.source_nodes[s])));
        }
        line(".model SWIDEAL SW(Ron=1e-6 Roff=1e12 Vt=0.5 Vh=0)");
    }
    if (setup.t_end > 0.0) line(fmt::format(".tran {:.12g} {:.12g}", setup.dt, setup.t_end));
    line(".end");
    return out;
}

NetlistStats netlist_stats(std::string_view text) {
    NetlistStats st;
    std::set<std::string> nodes;
    std::set<std::string> chain;
    std::istringstream in{std::string(text)};
    std::string line;
    const auto add_node = [&](const std::string& n) {
        if (n == "0") return;
        nodes.insert(n);
        if (n.size() > 3 && n[0] == 'n' && (n.back() == 'A' || n.back() == 'B') && n[n.size() - 2] == '_') {
            chain.insert(n);
        }
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '*' || line[0] == '.') continue;
        std::istringstream fields(line);
        std::string name;
        std::string a;
        std::string b;
        fields >> name >> a >> b;
        switch (name[0]) {
            case 'R': ++st.resistors; break;
            case 'C': ++st.capacitors; break;
            case 'L': ++st.inductors; break;
            case 'S': ++st.switches; break;
            case 'V':
                if (line.find("PWL(") != std::string::npos) {
                    ++st.control_sources;
                } else {
                    ++st.sources;
                }
                break;
            default: continue;
        }
        add_node(a);
        add_node(b);
    }
    st.nodes = static_cast<int>(nodes.size());
    st.chain_nodes = static_cast<int>(chain.size());
    return st;
}

}  // namespace nhssh
