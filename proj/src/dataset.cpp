#include "relibat/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "relibat/parallel.hpp"
#include "relibat/rng.hpp"
#include "relibat/text.hpp"

namespace relibat {

namespace {

// sub-stream index reserved for initial arc reliabilities
constexpr std::uint64_t kInitialReliabilityStream = 0x7030'0000'0000'0000ULL;

std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true)
    {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos)
        {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    {
        s.remove_suffix(1);
    }
    return s;
}

void write_header(std::ostream& out, std::size_t arcs)
{
    out << 't';
    for (std::size_t i = 1; i <= arcs; ++i)
    {
        out << ",pr_a" << i;
    }
    out << ",r_star\n";
}

std::size_t parse_header(std::string_view line, std::size_t line_no)
{
    const auto fields = split_csv(line);
    if (fields.size() < 3 || trim(fields.front()) != "t" || trim(fields.back()) != "r_star")
    {
        throw std::runtime_error("dataset line " + std::to_string(line_no) +
                                 ": expected header \"t,pr_a1,...,r_star\"");
    }
    for (std::size_t i = 1; i + 1 < fields.size(); ++i)
    {
        if (trim(fields[i]) != "pr_a" + std::to_string(i))
        {
            throw std::runtime_error("dataset line " + std::to_string(line_no) + ": unexpected column \"" +
                                     std::string(trim(fields[i])) + "\"");
        }
    }
    return fields.size() - 2;
}

void parse_row(std::string_view line, std::size_t line_no, ReliabilityDataset& ds, std::vector<double>& scratch)
{
    const auto fields = split_csv(line);
    if (fields.size() != ds.feature_count() + 1)
    {
        throw std::runtime_error("dataset line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(ds.feature_count() + 1) + " fields, found " +
                                 std::to_string(fields.size()));
    }
    try
    {
        const double t = parse_double(fields[0]);
        if (t < 0.0 || t != std::floor(t))
        {
            throw std::invalid_argument("time index must be a non-negative integer");
        }
        scratch.clear();
        for (std::size_t i = 1; i < fields.size(); ++i)
        {
            scratch.push_back(parse_double(fields[i]));
        }
        ds.append_row(static_cast<std::size_t>(t), scratch);
    }
    catch (const std::invalid_argument& e)
    {
        throw std::runtime_error("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
}

void write_rows(std::ostream& out, const ReliabilityDataset& ds)
{
    for (std::size_t r = 0; r < ds.rows(); ++r)
    {
        out << ds.time(r);
        for (double v : ds.row(r))
        {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

}  // namespace

DecayKind parse_decay_kind(std::string_view name)
{
    if (name == "linear")
    {
        return DecayKind::Linear;
    }
    if (name == "exp" || name == "exponential")
    {
        return DecayKind::Exponential;
    }
    if (name == "second" || name == "second-order")
    {
        return DecayKind::SecondOrder;
    }
    throw std::invalid_argument("unknown decay law \"" + std::string(name) + "\" (linear, exp, second)");
}

std::string_view to_string(DecayKind kind) noexcept
{
    switch (kind)
    {
        case DecayKind::Linear: return "linear";
        case DecayKind::Exponential: return "exp";
        case DecayKind::SecondOrder: return "second";
    }
    return "unknown";
}

double decay_linear(double p0, double t, double step) { return std::max(p0 - t * step, 0.0); }

double decay_exponential(double p0, double t, double rate) { return p0 * std::exp(-rate * t); }

double decay_second_order(double p0, double t) { return p0 / (1.0 + t * p0); }

double apply_decay(const DecaySpec& spec, double p0, double t)
{
    double p = 0.0;
    switch (spec.kind)
    {
        case DecayKind::Linear: p = decay_linear(p0, t, spec.step); break;
        case DecayKind::Exponential: p = decay_exponential(p0, t, spec.rate); break;
        case DecayKind::SecondOrder: p = decay_second_order(p0, t); break;
    }
    return std::clamp(p, 0.0, 1.0);
}

std::vector<double> sample_initial_reliability(std::size_t arcs, std::uint64_t seed, double lo, double hi)
{
    if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi))
    {
        throw std::invalid_argument("initial reliability range must lie in [0, 1]");
    }
    auto rng = Xoshiro256::stream(seed, kInitialReliabilityStream);
    std::vector<double> p0(arcs);
    for (auto& p : p0)
    {
        p = lo + (hi - lo) * rng.uniform();
    }
    return p0;
}

TimeDistribution build_distribution(std::span<const double> p0, const DecaySpec& spec)
{
    if (spec.horizon < kMinHorizon)
    {
        throw std::invalid_argument("horizon " + std::to_string(spec.horizon) + " is below the minimum of " +
                                    std::to_string(kMinHorizon) + " time steps");
    }
    if (p0.empty())
    {
        throw std::invalid_argument("no arcs to decay");
    }
    for (double p : p0)
    {
        if (!(p >= 0.0 && p <= 1.0))
        {
            throw std::invalid_argument("initial reliability outside [0, 1]");
        }
    }
    if (spec.kind == DecayKind::Linear && !(spec.step >= 0.0))
    {
        throw std::invalid_argument("linear decay step must be non-negative");
    }
    if (spec.kind == DecayKind::Exponential && !(spec.rate >= 0.0))
    {
        throw std::invalid_argument("exponential decay rate must be non-negative");
    }

    TimeDistribution dist(spec.horizon, p0.size());
    std::copy(p0.begin(), p0.end(), dist.row(0).begin());
    for (std::size_t t = 1; t <= spec.horizon; ++t)
    {
        auto row = dist.row(t);
        for (std::size_t i = 0; i < p0.size(); ++i)
        {
            row[i] = apply_decay(spec, p0[i], static_cast<double>(t));
        }
    }
    return dist;
}

void ReliabilityDataset::append(std::size_t time, std::span<const double> arc_probs, double reliability)
{
    if (arc_probs.size() != arcs_)
    {
        throw std::invalid_argument("record has " + std::to_string(arc_probs.size()) + " arc values, expected " +
                                    std::to_string(arcs_));
    }
    times_.push_back(time);
    values_.insert(values_.end(), arc_probs.begin(), arc_probs.end());
    values_.push_back(reliability);
}

void ReliabilityDataset::append_row(std::size_t time, std::span<const double> features)
{
    if (features.size() != feature_count())
    {
        throw std::invalid_argument("record has " + std::to_string(features.size()) + " features, expected " +
                                    std::to_string(feature_count()));
    }
    times_.push_back(time);
    values_.insert(values_.end(), features.begin(), features.end());
}

std::span<const double> ReliabilityDataset::row(std::size_t r) const
{
    if (r >= rows())
    {
        throw std::out_of_range("dataset row out of range");
    }
    return std::span<const double>(values_).subspan(r * feature_count(), feature_count());
}

std::vector<double> ReliabilityDataset::column(std::size_t c) const
{
    if (c >= feature_count())
    {
        throw std::out_of_range("dataset column out of range");
    }
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r)
    {
        out[r] = values_[r * feature_count() + c];
    }
    return out;
}

void ReliabilityDataset::set_column(std::size_t c, std::span<const double> values)
{
    if (c >= feature_count() || values.size() != rows())
    {
        throw std::invalid_argument("column shape mismatch");
    }
    for (std::size_t r = 0; r < rows(); ++r)
    {
        values_[r * feature_count() + c] = values[r];
    }
}

ReliabilityDataset label_dataset(const Network& net, const TimeDistribution& dist, const BatMcsConfig& cfg)
{
    if (dist.arc_count() != net.arc_count())
    {
        throw std::invalid_argument("time distribution has " + std::to_string(dist.arc_count()) +
                                    " arcs, network has " + std::to_string(net.arc_count()));
    }
    const std::size_t steps = dist.steps();
    std::vector<double> labels(steps, 0.0);
    BatMcsConfig inner = cfg;
    inner.workers = 1;
    parallel_for(steps, cfg.workers, [&](std::size_t k) {
        labels[k] = multi_run_average(net, dist.row(k + 1), inner).mean;
    });

    ReliabilityDataset ds(net.arc_count());
    for (std::size_t t = 1; t <= steps; ++t)
    {
        ds.append(t, dist.row(t), labels[t - 1]);
    }
    return ds;
}

ColumnStats column_stats(std::span<const double> column)
{
    if (column.empty())
    {
        throw std::invalid_argument("cannot take statistics of an empty column");
    }
    ColumnStats stats;
    stats.mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(column.size());
    const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
    stats.min = *lo;
    stats.max = *hi;
    return stats;
}

double normalize_value(double x, const ColumnStats& stats) noexcept
{
    const double range = stats.max - stats.min;
    if (!(range > 0.0))
    {
        return 0.0;
    }
    return (x - stats.mean) / range;
}

double denormalize_value(double x, const ColumnStats& stats) noexcept
{
    const double range = stats.max - stats.min;
    if (!(range > 0.0))
    {
        return stats.mean;
    }
    return x * range + stats.mean;
}

std::vector<double> mean_normalize(std::span<const double> column)
{
    const auto stats = column_stats(column);
    std::vector<double> out(column.size());
    std::transform(column.begin(), column.end(), out.begin(),
                   [&stats](double x) { return normalize_value(x, stats); });
    return out;
}

NormalizedDataset normalize_dataset(const ReliabilityDataset& raw)
{
    std::vector<ColumnStats> stats;
    stats.reserve(raw.feature_count());
    for (std::size_t c = 0; c < raw.feature_count(); ++c)
    {
        stats.push_back(column_stats(raw.column(c)));
    }
    return apply_normalization(raw, std::move(stats));
}

NormalizedDataset apply_normalization(const ReliabilityDataset& raw, std::vector<ColumnStats> stats)
{
    if (stats.size() != raw.feature_count())
    {
        throw std::invalid_argument("normalization has " + std::to_string(stats.size()) +
                                    " columns, dataset has " + std::to_string(raw.feature_count()));
    }
    NormalizedDataset out{raw, std::move(stats)};
    for (std::size_t c = 0; c < raw.feature_count(); ++c)
    {
        auto column = raw.column(c);
        for (auto& x : column)
        {
            x = normalize_value(x, out.stats[c]);
        }
        out.data.set_column(c, column);
    }
    return out;
}

std::vector<SequenceBlock> make_blocks(const ReliabilityDataset& ds, std::size_t window)
{
    if (window == 0)
    {
        throw std::invalid_argument("window must be at least 1");
    }
    if (ds.rows() < window + 2)
    {
        throw std::invalid_argument("dataset has " + std::to_string(ds.rows()) + " rows; a window of " +
                                    std::to_string(window) + " needs at least " + std::to_string(window + 2));
    }
    const std::size_t count = ds.rows() - window - 1;
    const std::size_t features = ds.feature_count();
    std::vector<SequenceBlock> blocks;
    blocks.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
    {
        SequenceBlock block;
        block.steps = window;
        block.features = features;
        block.inputs.reserve(window * features);
        for (std::size_t s = 0; s < window; ++s)
        {
            const auto r = ds.row(k + s);
            block.inputs.insert(block.inputs.end(), r.begin(), r.end());
        }
        block.target = ds.reliability(k + window);
        block.target_time = ds.time(k + window);
        blocks.push_back(std::move(block));
    }
    return blocks;
}

std::size_t train_block_count(std::size_t blocks, double train_fraction)
{
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    {
        throw std::invalid_argument("train fraction must be in (0, 1]");
    }
    // the small slack keeps 0.9 * 250 at 225 despite binary rounding
    auto count = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(blocks) + 1e-9));
    return std::clamp<std::size_t>(count, std::min<std::size_t>(1, blocks), blocks);
}

WindowSplit window_split(const ReliabilityDataset& ds, std::size_t window, double train_fraction)
{
    auto blocks = make_blocks(ds, window);
    const std::size_t n_train = train_block_count(blocks.size(), train_fraction);
    WindowSplit split;
    split.train.assign(std::make_move_iterator(blocks.begin()),
                       std::make_move_iterator(blocks.begin() + static_cast<std::ptrdiff_t>(n_train)));
    split.test.assign(std::make_move_iterator(blocks.begin() + static_cast<std::ptrdiff_t>(n_train)),
                      std::make_move_iterator(blocks.end()));
    return split;
}

void write_dataset_csv(std::ostream& out, const ReliabilityDataset& ds)
{
    write_header(out, ds.arc_count());
    write_rows(out, ds);
}

ReliabilityDataset read_dataset_csv(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    std::optional<ReliabilityDataset> ds;
    std::vector<double> scratch;
    while (std::getline(in, line))
    {
        ++line_no;
        const auto view = trim(line);
        if (view.empty() || view.front() == '#')
        {
            continue;
        }
        if (!ds)
        {
            ds.emplace(parse_header(view, line_no));
            continue;
        }
        parse_row(view, line_no, *ds, scratch);
    }
    if (!ds)
    {
        throw std::runtime_error("dataset has no header line");
    }
    return std::move(*ds);
}

void write_normalized_csv(std::ostream& out, const NormalizedDataset& ds)
{
    out << "# relibat normalized dataset v1\n";
    const char* names[] = {"mean", "min", "max"};
    for (int k = 0; k < 3; ++k)
    {
        out << "# " << names[k];
        for (const auto& s : ds.stats)
        {
            const double v = k == 0 ? s.mean : (k == 1 ? s.min : s.max);
            out << ',' << format_double(v);
        }
        out << '\n';
    }
    write_dataset_csv(out, ds.data);
}

NormalizedDataset read_normalized_csv(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> mean, min, max;
    std::optional<ReliabilityDataset> ds;
    std::vector<double> scratch;
    while (std::getline(in, line))
    {
        ++line_no;
        auto view = trim(line);
        if (view.empty())
        {
            continue;
        }
        if (view.front() == '#')
        {
            view = trim(view.substr(1));
            auto fields = split_csv(view);
            const auto key = trim(fields.front());
            std::vector<double>* target = key == "mean" ? &mean : key == "min" ? &min : key == "max" ? &max : nullptr;
            if (target != nullptr)
            {
                for (std::size_t i = 1; i < fields.size(); ++i)
                {
                    target->push_back(parse_double(fields[i]));
                }
            }
            continue;
        }
        if (!ds)
        {
            ds.emplace(parse_header(view, line_no));
            continue;
        }
        parse_row(view, line_no, *ds, scratch);
    }
    if (!ds)
    {
        throw std::runtime_error("normalized dataset has no header line");
    }
    if (mean.size() != ds->feature_count() || min.size() != mean.size() || max.size() != mean.size())
    {
        throw std::runtime_error("normalized dataset statistics do not match its columns");
    }
    NormalizedDataset out{std::move(*ds), {}};
    for (std::size_t c = 0; c < mean.size(); ++c)
    {
        out.stats.push_back({mean[c], min[c], max[c]});
    }
    return out;
}

ReliabilityDataset load_dataset_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open dataset " + path);
    }
    return read_dataset_csv(in);
}

void save_dataset_csv(const std::string& path, const ReliabilityDataset& ds)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write dataset " + path);
    }
    write_dataset_csv(out, ds);
}

}  // namespace relibat
