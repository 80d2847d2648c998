#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "relibat/network.hpp"

namespace relibat {

/// Crude Monte Carlo settings. Trials are split into fixed blocks, each with its own
/// sub-stream of `seed`, so the result does not depend on `workers`.
struct McsConfig
{
    std::uint64_t n_sim = 1;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

struct McsResult
{
    std::uint64_t passes = 0;
    std::uint64_t trials = 0;

    double estimate() const noexcept
    {
        return trials == 0 ? 0.0 : static_cast<double>(passes) / static_cast<double>(trials);
    }
};

/// Trials per random sub-stream in mcs_estimate.
inline constexpr std::uint64_t kTrialsPerBlock = 4096;

/// Draws coordinates [from, m) of `states`: arc i works iff draw() < probs[i].
/// Consumes exactly m - from draws, in arc order.
template <class Uniform>
void sample_coordinates(std::span<std::uint8_t> states, std::span<const double> probs,
                        std::size_t from, Uniform&& draw)
{
    for (std::size_t i = from; i < probs.size(); ++i)
    {
        states[i] = draw() < probs[i] ? 1 : 0;
    }
}

/// One random state vector; `draw` returns uniforms on [0, 1).
template <class Uniform>
StateVector sample_state(std::span<const double> probs, Uniform&& draw)
{
    std::vector<std::uint8_t> bits(probs.size(), 0);
    sample_coordinates(std::span<std::uint8_t>(bits), probs, 0, draw);
    return StateVector(std::span<const std::uint8_t>(bits));
}

/// N_pass / N_sim over cfg.n_sim independent trials, connectivity decided by PLSA.
McsResult mcs_estimate(const Network& net, std::span<const double> probs, const McsConfig& cfg);

/// Smallest N_sim with Z^2 / (4 eps^2) <= N_sim.
std::uint64_t required_simulations(double relative_error, double z);

/// Mean and sample standard deviation of a set of per-run estimates (sigma is 0 for one run).
struct RunStatistics
{
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> values;
};

RunStatistics summarize_runs(std::vector<double> values);

/// N_run independent MCS runs; run r uses the sub-stream seed derive_seed(cfg.seed, r).
RunStatistics mcs_multi_run(const Network& net, std::span<const double> probs,
                            const McsConfig& cfg, std::uint64_t n_run);

}  // namespace relibat
