#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "relibat/monte_carlo.hpp"
#include "relibat/network.hpp"

namespace relibat {

enum class StratumStatus
{
    DecidedConnected,     ///< L(S) is connected: whole stratum mass counts
    DecidedDisconnected,  ///< U(S) is disconnected: contributes nothing
    Simulated,            ///< undecided, sampled on coordinates delta+1..m
    ZeroMass,             ///< undecided but Pr(S) = 0, so it cannot be allocated a share
};

std::string_view to_string(StratumStatus status) noexcept;

/// One supervector S of the first `delta` arcs. `index` is its BAT emission number, which
/// is also S read as a binary number with arc a_1 as the least significant bit.
struct StratumReport
{
    std::uint64_t index = 0;
    std::uint32_t delta = 0;
    double probability = 0.0;
    StratumStatus status = StratumStatus::DecidedDisconnected;
    std::uint64_t allocation = 0;
    std::uint64_t passes = 0;

    Supervector supervector() const;
    double contribution() const noexcept;
};

struct BatMcsConfig
{
    std::size_t delta = 1;
    std::uint64_t n_sim = 1;
    std::uint64_t n_run = 1;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

/// Largest supervector width a stratum plan will materialize.
inline constexpr std::size_t kMaxDelta = 30;
/// Largest arc count exact_reliability accepts.
inline constexpr std::size_t kExactArcLimit = 30;

/// S padded with zeros to width m.
StateVector lower_extension(const Supervector& s, std::size_t m);
/// S padded with ones to width m.
StateVector upper_extension(const Supervector& s, std::size_t m);

/**
 * Proportional budget split: floor(n_sim * Pr(S) / sum Pr), raised to 1 where the floor
 * is 0. Every probability must be positive.
 */
std::vector<std::uint64_t> allocate_simulations(std::span<const double> stratum_probs,
                                                std::uint64_t n_sim);

/// Enumerates the 2^delta strata, decides what L(S)/U(S) settle, and allocates the
/// budget over the rest. Nothing is simulated yet (passes are all 0).
std::vector<StratumReport> plan_strata(const Network& net, std::span<const double> probs,
                                       std::size_t delta, std::uint64_t n_sim);

/// Samples every Simulated stratum; stratum i draws from Xoshiro256::stream(seed, i).
void simulate_strata(const Network& net, std::span<const double> probs,
                     std::span<StratumReport> strata, std::uint64_t seed, unsigned workers);

/// Decided-connected mass plus the simulated contributions, each summed in stratum order.
double combine_strata(std::span<const StratumReport> strata);

struct BatMcsResult
{
    double estimate = 0.0;
    std::vector<StratumReport> strata;
};

/// One BAT-MCS run with seed cfg.seed (cfg.n_run is ignored here).
BatMcsResult bat_mcs_estimate(const Network& net, std::span<const double> probs,
                              const BatMcsConfig& cfg);

/// Sum of Pr(X) over all connected X, enumerated by BAT and checked with PLSA.
double exact_reliability(const Network& net, std::span<const double> probs);

/// Seed used by run r of multi_run_average.
std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run) noexcept;

/// cfg.n_run independent BAT-MCS runs; mean, sample sigma and per-run values.
RunStatistics multi_run_average(const Network& net, std::span<const double> probs,
                                const BatMcsConfig& cfg);

}  // namespace relibat
