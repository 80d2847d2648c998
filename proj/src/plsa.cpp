#include "relibat/plsa.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace relibat {

namespace {

void check_length(const Network& net, std::size_t length)
{
    if (length != net.arc_count())
    {
        throw std::invalid_argument("state vector length " + std::to_string(length) +
                                    " does not match arc count " + std::to_string(net.arc_count()));
    }
}

template <class OnLayer>
bool layered_search(const Network& net, std::span<const std::uint8_t> states, OnLayer&& on_layer)
{
    const std::uint32_t sink = net.sink();
    // scratch reused across calls on the same thread; the hot loops call this millions of times
    thread_local std::vector<std::uint8_t> visited;
    thread_local std::vector<std::uint32_t> previous;
    thread_local std::vector<std::uint32_t> layer;
    visited.assign(net.node_count() + 1, 0);
    previous.assign(1, net.source());
    visited[net.source()] = 1;
    on_layer(previous);

    while (true)
    {
        layer.clear();
        for (std::uint32_t node : previous)
        {
            for (const auto& [other, arc] : net.incident(node))
            {
                if (states[arc] != 0 && visited[other] == 0)
                {
                    visited[other] = 1;
                    layer.push_back(other);
                }
            }
        }
        on_layer(layer);
        if (layer.empty())
        {
            return false;
        }
        if (visited[sink] != 0)
        {
            return true;
        }
        std::swap(previous, layer);
    }
}

}  // namespace

bool plsa_is_connected(const Network& net, std::span<const std::uint8_t> states)
{
    check_length(net, states.size());
    return layered_search(net, states, [](const std::vector<std::uint32_t>&) {});
}

bool plsa_is_connected(const Network& net, const StateVector& x)
{
    return plsa_is_connected(net, x.bits());
}

LayerTrace plsa_trace(const Network& net, const StateVector& x)
{
    check_length(net, x.size());
    LayerTrace trace;
    trace.connected = layered_search(net, x.bits(), [&trace](const std::vector<std::uint32_t>& layer) {
        auto& sorted = trace.layers.emplace_back(layer);
        std::sort(sorted.begin(), sorted.end());
    });
    return trace;
}

}  // namespace relibat
