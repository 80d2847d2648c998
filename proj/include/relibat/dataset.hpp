#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relibat/bat_mcs.hpp"
#include "relibat/block.hpp"
#include "relibat/network.hpp"

namespace relibat {

// ---------------------------------------------------------------------------
// Decay laws
// ---------------------------------------------------------------------------

enum class DecayKind
{
    Linear,       ///< p0 - c t (zero-order)
    Exponential,  ///< p0 exp(-lambda t) (first-order)
    SecondOrder,  ///< p0 / (1 + t p0)
};

/// Accepts "linear", "exp" and "second" (plus the long forms "exponential", "second-order").
DecayKind parse_decay_kind(std::string_view name);
std::string_view to_string(DecayKind kind) noexcept;

struct DecaySpec
{
    DecayKind kind = DecayKind::Linear;
    double step = 1.0 / 512.0;  ///< c, linear law
    double rate = 1.0 / 100.0;  ///< lambda, exponential law
    std::size_t horizon = 256;  ///< N_term
};

/// Smallest horizon that still yields one rolling-window block.
inline constexpr std::size_t kMinHorizon = 7;

double decay_linear(double p0, double t, double step);
double decay_exponential(double p0, double t, double rate);
double decay_second_order(double p0, double t);
double apply_decay(const DecaySpec& spec, double p0, double t);

/// Pr(a, 0) drawn uniformly from [lo, hi) with a sub-stream of `seed`.
std::vector<double> sample_initial_reliability(std::size_t arcs, std::uint64_t seed, double lo = 0.9,
                                               double hi = 1.0);

/// Row 0 = p0, row t = decay(p0, t) for t = 1..horizon. Requires horizon >= kMinHorizon.
TimeDistribution build_distribution(std::span<const double> p0, const DecaySpec& spec);

// ---------------------------------------------------------------------------
// Reliability dataset
// ---------------------------------------------------------------------------

/// Records P_t = (Pr(t, a_1), ..., Pr(t, a_m), R*(t)), one row per time step, in time order.
class ReliabilityDataset
{
  public:
    ReliabilityDataset() = default;
    explicit ReliabilityDataset(std::size_t arcs) : arcs_(arcs) {}

    std::size_t arc_count() const noexcept { return arcs_; }
    std::size_t feature_count() const noexcept { return arcs_ + 1; }
    std::size_t rows() const noexcept { return times_.size(); }

    void append(std::size_t time, std::span<const double> arc_probs, double reliability);
    void append_row(std::size_t time, std::span<const double> features);

    std::size_t time(std::size_t row) const { return times_.at(row); }
    std::span<const double> row(std::size_t r) const;
    double reliability(std::size_t r) const { return row(r)[arcs_]; }
    std::vector<double> column(std::size_t c) const;
    void set_column(std::size_t c, std::span<const double> values);

  private:
    std::size_t arcs_ = 0;
    std::vector<std::size_t> times_;
    std::vector<double> values_;
};

/// Labels rows t = 1..horizon of `dist` with the multi-run BAT-MCS mean. Every time step
/// reuses cfg.seed, so consecutive labels share random numbers. Steps run on cfg.workers
/// threads; output is ordered by t.
ReliabilityDataset label_dataset(const Network& net, const TimeDistribution& dist, const BatMcsConfig& cfg);

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

struct ColumnStats
{
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

ColumnStats column_stats(std::span<const double> column);
/// (x - mean) / (max - min); a constant column maps to 0.
double normalize_value(double x, const ColumnStats& stats) noexcept;
double denormalize_value(double x, const ColumnStats& stats) noexcept;

/// Mean normalization of a whole column with its own statistics.
std::vector<double> mean_normalize(std::span<const double> column);

struct NormalizedDataset
{
    ReliabilityDataset data;
    std::vector<ColumnStats> stats;  ///< one per feature column
};

/// Statistics over all rows, then every column normalized with them.
NormalizedDataset normalize_dataset(const ReliabilityDataset& raw);
/// Normalizes with given statistics (e.g. the ones stored in a model).
NormalizedDataset apply_normalization(const ReliabilityDataset& raw, std::vector<ColumnStats> stats);

// ---------------------------------------------------------------------------
// Rolling windows
// ---------------------------------------------------------------------------

/// Blocks k = 0..rows-window-2: rows k..k+window-1 as input, R* of row k+window as target.
std::vector<SequenceBlock> make_blocks(const ReliabilityDataset& ds, std::size_t window = 5);

struct WindowSplit
{
    std::vector<SequenceBlock> train;
    std::vector<SequenceBlock> test;
};

/// Number of blocks that go to training: floor(fraction * blocks), at least 1.
std::size_t train_block_count(std::size_t blocks, double train_fraction);

/// First train_block_count blocks (time order, no shuffling) train, the rest test.
WindowSplit window_split(const ReliabilityDataset& ds, std::size_t window = 5, double train_fraction = 0.9);

// ---------------------------------------------------------------------------
// CSV files
// ---------------------------------------------------------------------------

/// Header "t,pr_a1,...,pr_am,r_star", then one row per time step.
void write_dataset_csv(std::ostream& out, const ReliabilityDataset& ds);
ReliabilityDataset read_dataset_csv(std::istream& in);

/// Normalized values preceded by "# mean,...", "# min,...", "# max,..." lines.
void write_normalized_csv(std::ostream& out, const NormalizedDataset& ds);
NormalizedDataset read_normalized_csv(std::istream& in);

ReliabilityDataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const std::string& path, const ReliabilityDataset& ds);

}  // namespace relibat
