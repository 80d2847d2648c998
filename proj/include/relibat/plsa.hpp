#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relibat/network.hpp"

namespace relibat {

/// Layers L_1, L_2, ... built by the layered search; L_1 is {source}.
struct LayerTrace
{
    std::vector<std::vector<std::uint32_t>> layers;
    bool connected = false;
};

/**
 * Layered search from node 1: L_i holds the unvisited nodes joined by a working arc to
 * some node of L_{i-1}. Stops with "connected" as soon as the sink enters a layer and with
 * "disconnected" when a layer comes out empty.
 */
bool plsa_is_connected(const Network& net, std::span<const std::uint8_t> states);
bool plsa_is_connected(const Network& net, const StateVector& x);

/// Same search, recording each layer with nodes sorted by id. A disconnected trace ends
/// with the empty layer that stopped the search.
LayerTrace plsa_trace(const Network& net, const StateVector& x);

}  // namespace relibat
