#include "relibat/bat_mcs.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "relibat/bat.hpp"
#include "relibat/parallel.hpp"
#include "relibat/plsa.hpp"
#include "relibat/rng.hpp"

namespace relibat {

std::string_view to_string(StratumStatus status) noexcept
{
    switch (status)
    {
        case StratumStatus::DecidedConnected: return "decided-connected";
        case StratumStatus::DecidedDisconnected: return "decided-disconnected";
        case StratumStatus::Simulated: return "simulated";
        case StratumStatus::ZeroMass: return "zero-mass";
    }
    return "unknown";
}

Supervector StratumReport::supervector() const
{
    Supervector s(delta);
    for (std::uint32_t i = 0; i < delta; ++i)
    {
        s.set(i, ((index >> i) & 1U) != 0);
    }
    return s;
}

double StratumReport::contribution() const noexcept
{
    switch (status)
    {
        case StratumStatus::DecidedConnected: return probability;
        case StratumStatus::Simulated:
            return allocation == 0 ? 0.0
                                   : probability * static_cast<double>(passes) / static_cast<double>(allocation);
        default: return 0.0;
    }
}

namespace {

StateVector extend(const Supervector& s, std::size_t m, bool fill)
{
    if (s.size() > m)
    {
        throw std::invalid_argument("supervector width " + std::to_string(s.size()) +
                                    " exceeds arc count " + std::to_string(m));
    }
    StateVector x(m);
    for (std::size_t i = 0; i < m; ++i)
    {
        x.set(i, i < s.size() ? s[i] : fill);
    }
    return x;
}

void check_inputs(const Network& net, std::span<const double> probs, std::size_t delta)
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
    if (delta < 1 || delta > net.arc_count())
    {
        throw std::invalid_argument("delta must be in 1.." + std::to_string(net.arc_count()) + ", got " +
                                    std::to_string(delta));
    }
    if (delta > kMaxDelta)
    {
        throw std::invalid_argument("delta above " + std::to_string(kMaxDelta) + " is not supported");
    }
}

}  // namespace

StateVector lower_extension(const Supervector& s, std::size_t m) { return extend(s, m, false); }

StateVector upper_extension(const Supervector& s, std::size_t m) { return extend(s, m, true); }

std::vector<std::uint64_t> allocate_simulations(std::span<const double> stratum_probs, std::uint64_t n_sim)
{
    double total = 0.0;
    for (double p : stratum_probs)
    {
        if (!(p > 0.0))
        {
            throw std::invalid_argument("every allocated stratum needs positive probability");
        }
        total += p;
    }
    std::vector<std::uint64_t> allocation;
    allocation.reserve(stratum_probs.size());
    for (double p : stratum_probs)
    {
        const auto share = static_cast<std::uint64_t>(std::floor(static_cast<double>(n_sim) * p / total));
        allocation.push_back(std::max<std::uint64_t>(share, 1));
    }
    return allocation;
}

std::vector<StratumReport> plan_strata(const Network& net, std::span<const double> probs,
                                       std::size_t delta, std::uint64_t n_sim)
{
    check_inputs(net, probs, delta);
    if (n_sim == 0)
    {
        throw std::invalid_argument("simulation budget must be at least 1");
    }

    const std::size_t m = net.arc_count();
    std::vector<StratumReport> strata;
    strata.reserve(std::size_t{1} << delta);

    std::vector<std::uint8_t> lower(m, 0);
    std::vector<std::uint8_t> upper(m, 1);
    BatCursor cursor(delta);
    do
    {
        const auto bits = cursor.current();
        StratumReport report;
        report.index = cursor.index();
        report.delta = static_cast<std::uint32_t>(delta);

        double p = 1.0;
        for (std::size_t i = 0; i < delta; ++i)
        {
            p *= bits[i] ? probs[i] : 1.0 - probs[i];
            lower[i] = bits[i];
            upper[i] = bits[i];
        }
        report.probability = p;

        if (plsa_is_connected(net, lower))
        {
            report.status = StratumStatus::DecidedConnected;
        }
        else if (!plsa_is_connected(net, upper))
        {
            report.status = StratumStatus::DecidedDisconnected;
        }
        else
        {
            report.status = p > 0.0 ? StratumStatus::Simulated : StratumStatus::ZeroMass;
        }
        strata.push_back(report);
    } while (cursor.advance());

    std::vector<double> mass;
    for (const auto& s : strata)
    {
        if (s.status == StratumStatus::Simulated)
        {
            mass.push_back(s.probability);
        }
    }
    const auto allocation = allocate_simulations(mass, n_sim);
    std::size_t k = 0;
    for (auto& s : strata)
    {
        if (s.status == StratumStatus::Simulated)
        {
            s.allocation = allocation[k++];
        }
    }
    return strata;
}

void simulate_strata(const Network& net, std::span<const double> probs, std::span<StratumReport> strata,
                     std::uint64_t seed, unsigned workers)
{
    const std::size_t m = net.arc_count();
    parallel_for(strata.size(), workers, [&](std::size_t i) {
        StratumReport& stratum = strata[i];
        if (stratum.status != StratumStatus::Simulated)
        {
            return;
        }
        auto rng = Xoshiro256::stream(seed, stratum.index);
        std::vector<std::uint8_t> states(m, 0);
        for (std::uint32_t c = 0; c < stratum.delta; ++c)
        {
            states[c] = static_cast<std::uint8_t>((stratum.index >> c) & 1U);
        }
        std::uint64_t passes = 0;
        for (std::uint64_t trial = 0; trial < stratum.allocation; ++trial)
        {
            sample_coordinates(std::span<std::uint8_t>(states), probs, stratum.delta,
                               [&rng] { return rng.uniform(); });
            if (plsa_is_connected(net, states))
            {
                ++passes;
            }
        }
        stratum.passes = passes;
    });
}

double combine_strata(std::span<const StratumReport> strata)
{
    double estimate = 0.0;
    for (const auto& s : strata)
    {
        if (s.status == StratumStatus::DecidedConnected)
        {
            estimate += s.probability;
        }
    }
    for (const auto& s : strata)
    {
        if (s.status == StratumStatus::Simulated)
        {
            estimate += s.contribution();
        }
    }
    return estimate;
}

BatMcsResult bat_mcs_estimate(const Network& net, std::span<const double> probs, const BatMcsConfig& cfg)
{
    BatMcsResult result;
    result.strata = plan_strata(net, probs, cfg.delta, cfg.n_sim);
    simulate_strata(net, probs, result.strata, cfg.seed, cfg.workers);
    result.estimate = combine_strata(result.strata);
    return result;
}

double exact_reliability(const Network& net, std::span<const double> probs)
{
    if (net.arc_count() > kExactArcLimit)
    {
        throw std::invalid_argument("exact enumeration is limited to " + std::to_string(kExactArcLimit) +
                                    " arcs; this network has " + std::to_string(net.arc_count()));
    }
    check_inputs(net, probs, net.arc_count());

    double reliability = 0.0;
    BatCursor cursor(net.arc_count());
    do
    {
        const auto bits = cursor.current();
        if (plsa_is_connected(net, bits))
        {
            double p = 1.0;
            for (std::size_t i = 0; i < bits.size(); ++i)
            {
                p *= bits[i] ? probs[i] : 1.0 - probs[i];
            }
            reliability += p;
        }
    } while (cursor.advance());
    return reliability;
}

std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run) noexcept { return derive_seed(seed, run); }

RunStatistics multi_run_average(const Network& net, std::span<const double> probs, const BatMcsConfig& cfg)
{
    if (cfg.n_run == 0)
    {
        throw std::invalid_argument("n_run must be at least 1");
    }
    // the plan (decisions and allocations) is identical for every run
    const auto plan = plan_strata(net, probs, cfg.delta, cfg.n_sim);
    std::vector<double> values;
    values.reserve(cfg.n_run);
    for (std::uint64_t run = 0; run < cfg.n_run; ++run)
    {
        auto strata = plan;
        simulate_strata(net, probs, strata, run_seed(cfg.seed, run), cfg.workers);
        values.push_back(combine_strata(strata));
    }
    return summarize_runs(std::move(values));
}

}  // namespace relibat
