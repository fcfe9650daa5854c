#include "nhssh/netlist.hpp"

#include <doctest.h>

#include <string>

using namespace nhssh;

TEST_CASE("two-cell golden netlist") {
    CircuitParams p{0.5, 1.5, 0.2, 0.7, 1.1, 2, Boundary::Open};
    auto s = make_transient_setup(p, Complex(2.0, 0.1));
    const std::string text = write_netlist(s);
    const auto st = netlist_stats(text);
    CHECK(st.resistors == 3);
    CHECK(st.capacitors == 3);
    CHECK(st.inductors == 4);
    CHECK(st.control_sources == 1);
    CHECK(st.element_cards() == 11);
    CHECK(st.sources == 2);
    CHECK(st.switches == 2);
    CHECK(st.chain_nodes == 4);
    CHECK(text.find("R1_1 n1_A m1_1 0.5\n") != std::string::npos);
    CHECK(text.find("C1_1 m1_1 n1_B 0.2\n") != std::string::npos);
    CHECK(text.find("R2_1 n1_B m1_2 1.5\n") != std::string::npos);
    CHECK(text.find("C2_1 m1_2 n2_A 0.7\n") != std::string::npos);
    CHECK(text.find("LB_2 n2_B 0 1.1\n") != std::string::npos);
    CHECK(text.find("S1 s1 n1_B ctl 0 SWIDEAL") != std::string::npos);  // node 1 of 4
    CHECK(text.find("S2 s2 n2_A ctl 0 SWIDEAL") != std::string::npos);
    CHECK(text.rfind(".end\n") == text.size() - 5);
}

TEST_CASE("periodic ring adds the closing branch") {
    CircuitParams p{0.5, 1.5, 0.2, 0.7, 1.1, 2, Boundary::Periodic};
    auto s = make_transient_setup(p, Complex(2.0, 0.1));
    const auto st = netlist_stats(write_netlist(s));
    CHECK(st.resistors == 4);
    CHECK(st.capacitors == 4);
    CHECK(write_netlist(s).find("C2_2 m2_2 n1_A") != std::string::npos);
}

TEST_CASE("re-import of a long chain keeps the node count") {
    CircuitParams p{0.05, 1.41, 0.03, 1.34, 1.17, 260, Boundary::Open};
    const auto st = netlist_stats(write_netlist(make_transient_setup(p, Complex(5.3, 0.33))));
    CHECK(st.chain_nodes == 520);
    CHECK(st.nodes == 520 + 519 + 2 + 1);  // chain, RC midpoints, source nodes, control
    CHECK(spice_node(519) == "n260_B");
}
