#pragma once

// SPICE export of the simulated circuit, for cross-checking against an
// external simulator.

#include "nhssh/transient.hpp"

#include <string>
#include <string_view>

namespace nhssh {

/// Node name of chain node j: n<cell>_<A|B> with 1-based cells.
[[nodiscard]] std::string spice_node(int node);

/// Series RC branches become an R and a C card through an internal node,
/// every chain node gets an L to ground, each source is a SIN voltage source
/// behind a voltage-controlled switch driven by one shared PWL control
/// source that drops at the release time.
[[nodiscard]] std::string write_netlist(const TransientSetup& setup);

struct NetlistStats {
    int resistors = 0;
    int capacitors = 0;
    int inductors = 0;
    int sources = 0;          // SIN sources
    int control_sources = 0;  // PWL switch control
    int switches = 0;
    int chain_nodes = 0;      // distinct n<cell>_<A|B> names
    int nodes = 0;            // all distinct non-ground nodes

    [[nodiscard]] int element_cards() const noexcept { return resistors + capacitors + inductors + control_sources; }
};

/// Re-import: counts cards and nodes of a netlist produced by write_netlist.
[[nodiscard]] NetlistStats netlist_stats(std::string_view text);

}  // namespace nhssh
