#include "relibat/monte_carlo.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "relibat/parallel.hpp"
#include "relibat/plsa.hpp"
#include "relibat/rng.hpp"

namespace relibat {

namespace {

void check_probs(const Network& net, std::span<const double> probs)
{
    if (probs.size() != net.arc_count())
    {
        throw std::invalid_argument("probability row has " + std::to_string(probs.size()) +
                                    " entries, network has " + std::to_string(net.arc_count()) + " arcs");
    }
    for (double p : probs)
    {
        if (!(p >= 0.0 && p <= 1.0))
        {
            throw std::invalid_argument("arc probability outside [0, 1]");
        }
    }
}

}  // namespace

McsResult mcs_estimate(const Network& net, std::span<const double> probs, const McsConfig& cfg)
{
    check_probs(net, probs);
    if (cfg.n_sim == 0)
    {
        throw std::invalid_argument("n_sim must be at least 1");
    }

    const std::uint64_t blocks = (cfg.n_sim + kTrialsPerBlock - 1) / kTrialsPerBlock;
    std::vector<std::uint64_t> passes(blocks, 0);
    parallel_for(blocks, cfg.workers, [&](std::size_t block) {
        auto rng = Xoshiro256::stream(cfg.seed, block);
        const std::uint64_t begin = block * kTrialsPerBlock;
        const std::uint64_t end = std::min(cfg.n_sim, begin + kTrialsPerBlock);
        std::vector<std::uint8_t> states(probs.size(), 0);
        std::uint64_t count = 0;
        for (std::uint64_t trial = begin; trial < end; ++trial)
        {
            sample_coordinates(std::span<std::uint8_t>(states), probs, 0, [&rng] { return rng.uniform(); });
            if (plsa_is_connected(net, states))
            {
                ++count;
            }
        }
        passes[block] = count;
    });

    McsResult result;
    result.trials = cfg.n_sim;
    result.passes = std::accumulate(passes.begin(), passes.end(), std::uint64_t{0});
    return result;
}

std::uint64_t required_simulations(double relative_error, double z)
{
    if (!(relative_error > 0.0) || !(z > 0.0))
    {
        throw std::invalid_argument("relative error and Z must be positive");
    }
    const double bound = z * z / (4.0 * relative_error * relative_error);
    if (!std::isfinite(bound) || bound > 9.0e18)
    {
        throw std::invalid_argument("required simulation count overflows");
    }
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(bound)));
}

RunStatistics summarize_runs(std::vector<double> values)
{
    RunStatistics stats;
    stats.values = std::move(values);
    if (stats.values.empty())
    {
        return stats;
    }
    const double n = static_cast<double>(stats.values.size());
    stats.mean = std::accumulate(stats.values.begin(), stats.values.end(), 0.0) / n;
    if (stats.values.size() > 1)
    {
        double ss = 0.0;
        for (double v : stats.values)
        {
            ss += (v - stats.mean) * (v - stats.mean);
        }
        stats.stddev = std::sqrt(ss / (n - 1.0));
    }
    return stats;
}

RunStatistics mcs_multi_run(const Network& net, std::span<const double> probs,
                            const McsConfig& cfg, std::uint64_t n_run)
{
    if (n_run == 0)
    {
        throw std::invalid_argument("n_run must be at least 1");
    }
    std::vector<double> values;
    values.reserve(n_run);
    for (std::uint64_t run = 0; run < n_run; ++run)
    {
        McsConfig run_cfg = cfg;
        run_cfg.seed = derive_seed(cfg.seed, run);
        values.push_back(mcs_estimate(net, probs, run_cfg).estimate());
    }
    return summarize_runs(std::move(values));
}

}  // namespace relibat
