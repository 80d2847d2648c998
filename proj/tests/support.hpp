#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "relibat/network.hpp"

namespace testing_support {

inline relibat::Network bridge()
{
    return relibat::parse_network("4 5\n1 2\n1 3\n2 3\n2 4\n3 4\n");
}

inline const std::vector<double>& bridge_probs()
{
    static const std::vector<double> p = {0.9, 0.8, 0.7, 0.6, 0.5};
    return p;
}

inline oracle::Graph bridge_graph()
{
    return {4, {{1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 4}}};
}

inline relibat::Network to_network(const oracle::Graph& g)
{
    std::vector<relibat::Arc> arcs;
    for (auto [u, v] : g.arcs)
    {
        arcs.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)});
    }
    return relibat::Network(static_cast<std::uint32_t>(g.n), std::move(arcs));
}

inline relibat::StateVector from_mask(std::uint64_t mask, std::size_t m)
{
    relibat::StateVector x(m);
    for (std::size_t i = 0; i < m; ++i)
    {
        x.set(i, ((mask >> i) & 1U) != 0);
    }
    return x;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("relibat-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing_support
