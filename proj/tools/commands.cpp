#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "relibat/bat_mcs.hpp"
#include "relibat/dataset.hpp"
#include "relibat/lstm.hpp"
#include "relibat/model_io.hpp"
#include "relibat/monte_carlo.hpp"
#include "relibat/network.hpp"
#include "relibat/text.hpp"

namespace relibat::cli {

namespace {

using json = nlohmann::json;

/// Bad flag values detected after parsing; reported with exit code 2.
class UsageError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

std::string format_significant(double value, int digits)
{
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*g", digits, value);
    return buffer;
}

std::vector<double> parse_prob_list(const std::string& text)
{
    std::vector<double> probs;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ','))
    {
        probs.push_back(parse_double(field));
    }
    return probs;
}

std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t value)
{
    if (flag->count() > 0)
    {
        return value;
    }
    if (const char* env = std::getenv("RELIBAT_SEED"); env != nullptr && *env != '\0')
    {
        char* end = nullptr;
        const unsigned long long parsed = std::strtoull(env, &end, 10);
        if (*end != '\0')
        {
            throw UsageError(std::string("RELIBAT_SEED is not an unsigned integer: ") + env);
        }
        return parsed;
    }
    return kDefaultSeed;
}

std::vector<double> resolve_probs(const Network& net, const std::string& flag)
{
    std::vector<double> probs;
    if (!flag.empty())
    {
        probs = parse_prob_list(flag);
    }
    else if (net.initial_reliability())
    {
        probs = *net.initial_reliability();
    }
    else
    {
        throw UsageError("network file has no arc reliabilities; pass --probs");
    }
    if (probs.size() != net.arc_count())
    {
        throw UsageError("--probs has " + std::to_string(probs.size()) + " values, network has " +
                         std::to_string(net.arc_count()) + " arcs");
    }
    for (double p : probs)
    {
        if (!(p >= 0.0 && p <= 1.0))
        {
            throw UsageError("arc probabilities must lie in [0, 1]");
        }
    }
    return probs;
}

/// Reorders arcs (and their probabilities) so that arc order[k] becomes coordinate k.
/// `order` holds 1-based arc ids, comma-separated, and must be a permutation.
Network permute_arcs(const Network& net, std::vector<double>& probs, const std::string& order)
{
    std::vector<std::size_t> ids;
    std::stringstream ss(order);
    std::string field;
    while (std::getline(ss, field, ','))
    {
        const double v = parse_double(field);
        if (v < 1 || v > static_cast<double>(net.arc_count()) || v != static_cast<double>(static_cast<std::size_t>(v)))
        {
            throw UsageError("--arc-order entry out of range: " + field);
        }
        ids.push_back(static_cast<std::size_t>(v) - 1);
    }
    std::vector<bool> seen(net.arc_count(), false);
    for (auto id : ids)
    {
        if (seen[id])
        {
            throw UsageError("--arc-order repeats arc " + std::to_string(id + 1));
        }
        seen[id] = true;
    }
    if (ids.size() != net.arc_count())
    {
        throw UsageError("--arc-order must list all " + std::to_string(net.arc_count()) + " arcs");
    }
    std::vector<Arc> arcs;
    std::vector<double> reordered;
    for (auto id : ids)
    {
        arcs.push_back(net.arc(id));
        reordered.push_back(probs[id]);
    }
    probs = std::move(reordered);
    return Network(net.node_count(), std::move(arcs));
}

std::string join_probs(std::span<const double> probs)
{
    std::string text;
    for (std::size_t i = 0; i < probs.size(); ++i)
    {
        text += (i == 0 ? "" : ",") + format_double(probs[i]);
    }
    return text;
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream file(path);
    if (!file)
    {
        throw std::runtime_error("cannot write " + path);
    }
    return file;
}

std::string strip_suffix(const std::string& path, const std::string& suffix)
{
    if (path.size() > suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
    {
        return path.substr(0, path.size() - suffix.size());
    }
    return path;
}

std::string normalized_path(const std::string& dataset_path)
{
    return strip_suffix(dataset_path, ".csv") + ".norm.csv";
}

std::string loss_history_path(const std::string& model_path)
{
    return strip_suffix(model_path, ".txt") + ".loss.csv";
}

class Stopwatch
{
  public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Record of one invocation: canonical arguments plus input digests.
struct Manifest
{
    std::string command;
    std::vector<std::string> args;
    json parameters = json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;

    void write(const std::string& path) const
    {
        json doc;
        doc["tool"] = "relibat";
        doc["version"] = kToolVersion;
        doc["command"] = command;
        doc["args"] = args;
        doc["parameters"] = parameters;
        doc["inputs"] = json::array();
        for (const auto& in : inputs)
        {
            doc["inputs"].push_back({{"path", in}, {"fnv1a64", file_digest(in)}});
        }
        doc["outputs"] = outputs;
        auto file = open_output(path);
        file << doc.dump(2) << '\n';
    }
};

std::string manifest_path(const std::string& flag, const std::string& out, const std::string& command)
{
    if (!flag.empty())
    {
        return flag;
    }
    if (!out.empty())
    {
        return out + ".manifest.json";
    }
    return "relibat-" + command + ".manifest.json";
}

// ---------------------------------------------------------------------------
// exact
// ---------------------------------------------------------------------------

struct ExactOptions
{
    std::string network;
    std::string probs;
    std::string out;
    std::string manifest;
};

int cmd_exact(const ExactOptions& opt, std::ostream& out, std::ostream& err)
{
    const Network net = load_network(opt.network);
    const auto probs = resolve_probs(net, opt.probs);
    if (net.arc_count() > kExactArcLimit)
    {
        err << "error: network has " << net.arc_count() << " arcs; exact enumeration is limited to "
            << kExactArcLimit << ". Use `relibat estimate --method batmcs` instead.\n";
        return kRuntimeFailure;
    }
    Stopwatch clock;
    const double r = exact_reliability(net, probs);
    const std::string text = format_significant(r, 12);
    out << text << '\n';
    if (!opt.out.empty())
    {
        open_output(opt.out) << text << '\n';
    }
    err << "elapsed_s " << clock.seconds() << '\n';

    Manifest m;
    m.command = "exact";
    m.args = {"exact", opt.network, "--probs", join_probs(probs)};
    if (!opt.out.empty())
    {
        m.args.insert(m.args.end(), {"--out", opt.out});
        m.outputs.push_back(opt.out);
    }
    const auto mpath = manifest_path(opt.manifest, opt.out, "exact");
    m.args.insert(m.args.end(), {"--manifest", mpath});
    m.parameters = {{"arcs", net.arc_count()}, {"reliability", format_double(r)}};
    m.inputs.push_back(opt.network);
    m.write(mpath);
    return kSuccess;
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct EstimateOptions
{
    std::string network;
    std::string method = "batmcs";
    std::size_t delta = 0;
    std::uint64_t nsim = std::uint64_t{1} << 20;
    std::uint64_t nrun = 30;
    std::uint64_t seed = kDefaultSeed;
    double epsilon = 0.0;
    double z = 1.96;
    unsigned workers = 0;
    std::string probs;
    std::string strata;
    std::string arc_order;
    std::string out;
    std::string manifest;
    const CLI::Option* seed_flag = nullptr;
    const CLI::Option* delta_flag = nullptr;
    const CLI::Option* nsim_flag = nullptr;
    const CLI::Option* epsilon_flag = nullptr;
};

void write_strata_csv(std::ostream& out, std::span<const StratumReport> strata)
{
    out << "supervector,probability,status,allocation,passes,contribution\n";
    for (const auto& s : strata)
    {
        out << s.supervector().to_string() << ',' << format_double(s.probability) << ',' << to_string(s.status)
            << ',' << s.allocation << ',' << s.passes << ',' << format_double(s.contribution()) << '\n';
    }
}

int cmd_estimate(EstimateOptions opt, std::ostream& out, std::ostream& err)
{
    const Network file_net = load_network(opt.network);
    auto probs = resolve_probs(file_net, opt.probs);
    const auto file_probs = probs;
    const Network net = opt.arc_order.empty() ? file_net : permute_arcs(file_net, probs, opt.arc_order);
    opt.seed = resolve_seed(opt.seed_flag, opt.seed);

    if (opt.epsilon_flag->count() > 0)
    {
        if (opt.nsim_flag->count() > 0)
        {
            throw UsageError("--nsim and --epsilon are mutually exclusive");
        }
        try
        {
            opt.nsim = required_simulations(opt.epsilon, opt.z);
        }
        catch (const std::invalid_argument& e)
        {
            throw UsageError(e.what());
        }
    }
    if (opt.nsim == 0)
    {
        throw UsageError("--nsim must be at least 1");
    }
    if (opt.nrun == 0)
    {
        throw UsageError("--nrun must be at least 1");
    }
    if (opt.delta_flag->count() == 0)
    {
        opt.delta = std::min<std::size_t>(2, net.arc_count());
    }
    if (opt.method == "batmcs" && (opt.delta < 1 || opt.delta > net.arc_count() || opt.delta > kMaxDelta))
    {
        throw UsageError("--delta must be in 1.." + std::to_string(std::min(net.arc_count(), kMaxDelta)));
    }

    Stopwatch clock;
    RunStatistics stats;
    std::vector<StratumReport> first_strata;
    if (opt.method == "mcs")
    {
        McsConfig cfg{opt.nsim, opt.seed, opt.workers};
        stats = mcs_multi_run(net, probs, cfg, opt.nrun);
    }
    else
    {
        BatMcsConfig cfg{opt.delta, opt.nsim, opt.nrun, opt.seed, opt.workers};
        stats = multi_run_average(net, probs, cfg);
        if (!opt.strata.empty())
        {
            BatMcsConfig first = cfg;
            first.seed = run_seed(cfg.seed, 0);
            first_strata = bat_mcs_estimate(net, probs, first).strata;
        }
    }

    out << "method " << opt.method << '\n';
    if (opt.method == "batmcs")
    {
        out << "delta " << opt.delta << '\n';
    }
    out << "nsim " << opt.nsim << '\n';
    out << "nrun " << opt.nrun << '\n';
    out << "seed " << opt.seed << '\n';
    out << "mean " << format_double(stats.mean) << '\n';
    out << "sigma " << format_double(stats.stddev) << '\n';
    for (std::size_t r = 0; r < stats.values.size(); ++r)
    {
        out << "run " << (r + 1) << ' ' << format_double(stats.values[r]) << '\n';
    }
    err << "elapsed_s " << clock.seconds() << '\n';

    Manifest m;
    m.command = "estimate";
    m.args = {"estimate", opt.network, "--method", opt.method, "--nsim", std::to_string(opt.nsim),
              "--nrun", std::to_string(opt.nrun), "--seed", std::to_string(opt.seed), "--probs", join_probs(file_probs),
              "--workers", std::to_string(opt.workers)};
    if (opt.method == "batmcs")
    {
        m.args.insert(m.args.end(), {"--delta", std::to_string(opt.delta)});
    }
    if (!opt.arc_order.empty())
    {
        m.args.insert(m.args.end(), {"--arc-order", opt.arc_order});
    }
    if (!opt.out.empty())
    {
        auto file = open_output(opt.out);
        file << "run,estimate\n";
        for (std::size_t r = 0; r < stats.values.size(); ++r)
        {
            file << (r + 1) << ',' << format_double(stats.values[r]) << '\n';
        }
        m.args.insert(m.args.end(), {"--out", opt.out});
        m.outputs.push_back(opt.out);
    }
    if (!opt.strata.empty() && opt.method == "batmcs")
    {
        auto file = open_output(opt.strata);
        write_strata_csv(file, first_strata);
        m.args.insert(m.args.end(), {"--strata", opt.strata});
        m.outputs.push_back(opt.strata);
    }
    const auto mpath = manifest_path(opt.manifest, opt.out, "estimate");
    m.args.insert(m.args.end(), {"--manifest", mpath});
    m.parameters = {{"method", opt.method},     {"delta", opt.delta},
                    {"n_sim", opt.nsim},        {"n_run", opt.nrun},
                    {"seed", opt.seed},         {"mean", format_double(stats.mean)},
                    {"sigma", format_double(stats.stddev)}};
    if (opt.epsilon_flag->count() > 0)
    {
        m.parameters["epsilon"] = opt.epsilon;
        m.parameters["z"] = opt.z;
    }
    m.inputs.push_back(opt.network);
    m.write(mpath);
    return kSuccess;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateOptions
{
    std::string network;
    std::string decay = "linear";
    double step = 1.0 / 512.0;
    double rate = 1.0 / 100.0;
    std::size_t nterm = 256;
    std::size_t delta = 0;
    std::uint64_t nsim = std::uint64_t{1} << 14;
    std::uint64_t nrun = 5;
    std::uint64_t seed = kDefaultSeed;
    unsigned workers = 0;
    std::string out;
    std::string manifest;
    const CLI::Option* seed_flag = nullptr;
    const CLI::Option* delta_flag = nullptr;
};

int cmd_generate(GenerateOptions opt, std::ostream& out, std::ostream& err)
{
    const Network net = load_network(opt.network);
    opt.seed = resolve_seed(opt.seed_flag, opt.seed);

    DecaySpec spec;
    try
    {
        spec.kind = parse_decay_kind(opt.decay);
    }
    catch (const std::invalid_argument& e)
    {
        throw UsageError(e.what());
    }
    spec.step = opt.step;
    spec.rate = opt.rate;
    spec.horizon = opt.nterm;
    if (opt.nterm < kMinHorizon)
    {
        throw UsageError("--nterm must be at least " + std::to_string(kMinHorizon) +
                         " to yield one rolling-window block");
    }
    if (opt.delta_flag->count() == 0)
    {
        opt.delta = std::min<std::size_t>({net.node_count(), net.arc_count(), 20});
    }
    if (opt.delta < 1 || opt.delta > net.arc_count() || opt.delta > kMaxDelta)
    {
        throw UsageError("--delta must be in 1.." + std::to_string(std::min(net.arc_count(), kMaxDelta)));
    }
    if (opt.nsim == 0 || opt.nrun == 0)
    {
        throw UsageError("--nsim and --nrun must be at least 1");
    }

    const bool sampled = !net.initial_reliability().has_value();
    const auto p0 = sampled ? sample_initial_reliability(net.arc_count(), opt.seed) : *net.initial_reliability();

    Stopwatch clock;
    const auto dist = build_distribution(p0, spec);
    const BatMcsConfig cfg{opt.delta, opt.nsim, opt.nrun, opt.seed, opt.workers};
    const auto raw = label_dataset(net, dist, cfg);
    const auto normalized = normalize_dataset(raw);

    const std::string norm_path = normalized_path(opt.out);
    {
        auto file = open_output(opt.out);
        write_dataset_csv(file, raw);
    }
    {
        auto file = open_output(norm_path);
        write_normalized_csv(file, normalized);
    }
    out << "rows " << raw.rows() << '\n';
    out << "features " << raw.feature_count() << '\n';
    out << "dataset " << opt.out << '\n';
    out << "normalized " << norm_path << '\n';
    err << "elapsed_s " << clock.seconds() << '\n';

    Manifest m;
    m.command = "generate";
    m.args = {"generate", opt.network,  "--decay", std::string(to_string(spec.kind)),
              "--step",   format_double(opt.step), "--rate", format_double(opt.rate),
              "--nterm",  std::to_string(opt.nterm), "--delta", std::to_string(opt.delta),
              "--nsim",   std::to_string(opt.nsim), "--nrun", std::to_string(opt.nrun),
              "--seed",   std::to_string(opt.seed), "--workers", std::to_string(opt.workers),
              "--out",    opt.out};
    const auto mpath = manifest_path(opt.manifest, opt.out, "generate");
    m.args.insert(m.args.end(), {"--manifest", mpath});
    m.parameters = {{"decay", std::string(to_string(spec.kind))},
                    {"step", opt.step},
                    {"rate", opt.rate},
                    {"n_term", opt.nterm},
                    {"delta", opt.delta},
                    {"n_sim", opt.nsim},
                    {"n_run", opt.nrun},
                    {"seed", opt.seed},
                    {"initial_reliability", sampled ? "sampled-uniform-0.9-1.0" : "network-file"}};
    m.inputs.push_back(opt.network);
    m.outputs = {opt.out, norm_path};
    m.write(mpath);
    return kSuccess;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOptions
{
    std::string dataset;
    std::size_t hidden = 10;
    std::size_t epochs = 500;
    std::size_t batch = 32;
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t window = 5;
    double train_frac = 0.9;
    std::size_t patience = 20;
    std::uint64_t seed = kDefaultSeed;
    unsigned workers = 0;
    std::string out;
    std::string manifest;
    const CLI::Option* seed_flag = nullptr;
};

int cmd_train(TrainOptions opt, std::ostream& out, std::ostream& err)
{
    opt.seed = resolve_seed(opt.seed_flag, opt.seed);
    if (opt.hidden == 0 || opt.batch == 0 || opt.window == 0)
    {
        throw UsageError("--hidden, --batch and --window must be at least 1");
    }
    if (!(opt.train_frac > 0.0 && opt.train_frac <= 1.0))
    {
        throw UsageError("--train-frac must be in (0, 1]");
    }

    const auto raw = load_dataset_csv(opt.dataset);
    if (raw.rows() < opt.window + 2)
    {
        throw std::runtime_error("dataset has " + std::to_string(raw.rows()) + " rows; at least " +
                                 std::to_string(opt.window + 2) + " are needed");
    }
    const auto normalized = normalize_dataset(raw);
    const auto split = window_split(normalized.data, opt.window, opt.train_frac);

    TrainConfig cfg;
    cfg.hidden_dim = opt.hidden;
    cfg.epochs = opt.epochs;
    cfg.batch_size = opt.batch;
    cfg.seed = opt.seed;
    cfg.adam = {opt.lr, opt.beta1, opt.beta2, opt.adam_eps};
    cfg.patience = opt.patience;
    cfg.workers = opt.workers;

    Stopwatch clock;
    const auto result = train(split.train, split.test, cfg);
    err << "elapsed_s " << clock.seconds() << '\n';

    LstmModel model;
    model.params = result.params;
    model.window = opt.window;
    model.adam = cfg.adam;
    model.normalization = normalized.stats;
    save_model(opt.out, model);

    const std::string history_path = loss_history_path(opt.out);
    {
        auto file = open_output(history_path);
        file << "epoch,train_loss,test_loss\n";
        for (const auto& e : result.history)
        {
            file << e.epoch << ',' << format_double(e.train) << ',' << (std::isnan(e.test) ? "" : format_double(e.test))
                 << '\n';
        }
    }

    out << "train_blocks " << split.train.size() << '\n';
    out << "test_blocks " << split.test.size() << '\n';
    out << "epochs_run " << result.history.size() << '\n';
    if (!result.history.empty())
    {
        out << "final_train_loss " << format_double(result.history.back().train) << '\n';
        if (!std::isnan(result.history.back().test))
        {
            out << "final_test_loss " << format_double(result.history.back().test) << '\n';
        }
    }
    out << "parameters " << result.params.size() << '\n';
    out << "model " << opt.out << '\n';

    Manifest m;
    m.command = "train";
    m.args = {"train",      opt.dataset,
              "--hidden",   std::to_string(opt.hidden),
              "--epochs",   std::to_string(opt.epochs),
              "--batch",    std::to_string(opt.batch),
              "--lr",       format_double(opt.lr),
              "--beta1",    format_double(opt.beta1),
              "--beta2",    format_double(opt.beta2),
              "--adam-eps", format_double(opt.adam_eps),
              "--window",   std::to_string(opt.window),
              "--train-frac", format_double(opt.train_frac),
              "--patience", std::to_string(opt.patience),
              "--seed",     std::to_string(opt.seed),
              "--workers",  std::to_string(opt.workers),
              "--out",      opt.out};
    const auto mpath = manifest_path(opt.manifest, opt.out, "train");
    m.args.insert(m.args.end(), {"--manifest", mpath});
    m.parameters = {{"hidden", opt.hidden},     {"epochs", opt.epochs},       {"batch", opt.batch},
                    {"lr", opt.lr},             {"beta1", opt.beta1},         {"beta2", opt.beta2},
                    {"adam_eps", opt.adam_eps}, {"window", opt.window},       {"train_frac", opt.train_frac},
                    {"seed", opt.seed},         {"epochs_run", result.history.size()}};
    m.inputs.push_back(opt.dataset);
    m.outputs = {opt.out, history_path};
    m.write(mpath);
    return kSuccess;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

struct PredictOptions
{
    std::string model;
    std::string dataset;
    bool compare = false;
    double train_frac = 0.9;
    std::string out;
    std::string manifest;
};

int cmd_predict(const PredictOptions& opt, std::ostream& out, std::ostream& err)
{
    const auto model = load_model(opt.model);
    const auto raw = load_dataset_csv(opt.dataset);
    if (raw.feature_count() != model.params.input_dim())
    {
        err << "error: dimension mismatch: model expects " << model.params.input_dim()
            << " features per row, dataset has " << raw.feature_count() << " (" << raw.arc_count()
            << " arcs + reliability)\n";
        return kRuntimeFailure;
    }
    const auto normalized = apply_normalization(raw, model.normalization);
    const auto blocks = make_blocks(normalized.data, model.window);
    const auto& target = model.target_stats();

    std::ostringstream csv;
    csv << "t,r_star,r_predict,abs_error\n";
    std::vector<double> predictions;
    predictions.reserve(blocks.size());
    for (const auto& b : blocks)
    {
        const double y = predict(model.params, b);
        predictions.push_back(y);
        const double r_star = denormalize_value(b.target, target);
        const double r_pred = denormalize_value(y, target);
        csv << b.target_time << ',' << format_double(r_star) << ',' << format_double(r_pred) << ','
            << format_double(std::abs(r_pred - r_star)) << '\n';
    }
    if (opt.out.empty())
    {
        out << csv.str();
    }
    else
    {
        open_output(opt.out) << csv.str();
    }

    if (opt.compare)
    {
        const std::size_t n_train = train_block_count(blocks.size(), opt.train_frac);
        const auto mse = [&](std::size_t begin, std::size_t end, bool raw_scale) {
            double sum = 0.0;
            for (std::size_t k = begin; k < end; ++k)
            {
                double e = predictions[k] - blocks[k].target;
                if (raw_scale)
                {
                    e = denormalize_value(predictions[k], target) - denormalize_value(blocks[k].target, target);
                }
                sum += e * e;
            }
            return end > begin ? sum / static_cast<double>(end - begin) : std::nan("");
        };
        std::ostream& summary = opt.out.empty() ? err : out;
        summary << "blocks " << blocks.size() << '\n';
        summary << "mse_train " << format_double(mse(0, n_train, false)) << '\n';
        if (n_train < blocks.size())
        {
            summary << "mse_test " << format_double(mse(n_train, blocks.size(), false)) << '\n';
        }
        summary << "mse_all " << format_double(mse(0, blocks.size(), false)) << '\n';
        summary << "mse_all_reliability_scale " << format_double(mse(0, blocks.size(), true)) << '\n';
    }

    Manifest m;
    m.command = "predict";
    m.args = {"predict", opt.model, opt.dataset, "--train-frac", format_double(opt.train_frac)};
    if (opt.compare)
    {
        m.args.push_back("--compare");
    }
    if (!opt.out.empty())
    {
        m.args.insert(m.args.end(), {"--out", opt.out});
        m.outputs.push_back(opt.out);
    }
    const auto mpath = manifest_path(opt.manifest, opt.out, "predict");
    m.args.insert(m.args.end(), {"--manifest", mpath});
    m.parameters = {{"window", model.window}, {"blocks", blocks.size()}};
    m.inputs = {opt.model, opt.dataset};
    m.write(mpath);
    return kSuccess;
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

int cmd_replay(const std::string& path, std::ostream& out, std::ostream& err)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open manifest " + path);
    }
    const json doc = json::parse(in);
    for (const auto& input : doc.at("inputs"))
    {
        const auto file = input.at("path").get<std::string>();
        const auto expected = input.at("fnv1a64").get<std::string>();
        if (file_digest(file) != expected)
        {
            err << "error: input " << file << " changed since the manifest was written\n";
            return kRuntimeFailure;
        }
    }
    const auto args = doc.at("args").get<std::vector<std::string>>();
    if (args.empty() || args.front() == "replay")
    {
        throw std::runtime_error("manifest has no command to replay");
    }
    return run(args, out, err);
}

}  // namespace

std::string file_digest(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw std::runtime_error("cannot read " + path);
    }
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    char buffer[1 << 14];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0)
    {
        for (std::streamsize i = 0; i < in.gcount(); ++i)
        {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 0x100000001B3ULL;
        }
    }
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << hash;
    return hex.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"relibat: time-dependent two-terminal network reliability"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    ExactOptions exact;
    auto* exact_cmd = app.add_subcommand("exact", "Exact reliability by full BAT enumeration (m <= 30)");
    exact_cmd->add_option("network", exact.network, "Network file")->required();
    exact_cmd->add_option("--probs", exact.probs, "Comma-separated arc reliabilities (default: file values)");
    exact_cmd->add_option("--out", exact.out, "Also write the value to this file");
    exact_cmd->add_option("--manifest", exact.manifest, "Manifest path");

    EstimateOptions est;
    auto* est_cmd = app.add_subcommand("estimate", "Approximate reliability by MCS or BAT-MCS");
    est_cmd->add_option("network", est.network, "Network file")->required();
    est_cmd->add_option("--method", est.method, "mcs or batmcs")->check(CLI::IsMember({"mcs", "batmcs"}));
    est.delta_flag = est_cmd->add_option("--delta", est.delta, "Supervector width (default min(2, m))");
    est.nsim_flag = est_cmd->add_option("--nsim", est.nsim, "Simulations per run");
    est_cmd->add_option("--nrun", est.nrun, "Independent runs");
    est.seed_flag = est_cmd->add_option("--seed", est.seed, "Random seed (fallback RELIBAT_SEED)");
    est.epsilon_flag = est_cmd->add_option("--epsilon", est.epsilon, "Relative error; sets --nsim from Z^2/(4 eps^2)");
    est_cmd->add_option("--z", est.z, "Standard normal quantile for --epsilon");
    est_cmd->add_option("--workers", est.workers, "Worker threads (0 = all cores)");
    est_cmd->add_option("--probs", est.probs, "Comma-separated arc reliabilities (default: file values)");
    est_cmd->add_option("--arc-order", est.arc_order, "Comma-separated 1-based arc ids, supervector arcs first");
    est_cmd->add_option("--strata", est.strata, "Write the first run's stratum report CSV here");
    est_cmd->add_option("--out", est.out, "Per-run estimates CSV");
    est_cmd->add_option("--manifest", est.manifest, "Manifest path");

    GenerateOptions gen;
    auto* gen_cmd = app.add_subcommand("generate", "Generate a time-dependent reliability dataset");
    gen_cmd->add_option("network", gen.network, "Network file")->required();
    gen_cmd->add_option("--decay", gen.decay, "linear, exp or second");
    gen_cmd->add_option("--step", gen.step, "Linear decay per step");
    gen_cmd->add_option("--rate", gen.rate, "Exponential decay rate");
    gen_cmd->add_option("--nterm", gen.nterm, "Number of time steps");
    gen.delta_flag = gen_cmd->add_option("--delta", gen.delta, "Supervector width (default min(n, m, 20))");
    gen_cmd->add_option("--nsim", gen.nsim, "BAT-MCS simulations per run");
    gen_cmd->add_option("--nrun", gen.nrun, "BAT-MCS runs averaged per time step");
    gen.seed_flag = gen_cmd->add_option("--seed", gen.seed, "Random seed (fallback RELIBAT_SEED)");
    gen_cmd->add_option("--workers", gen.workers, "Worker threads (0 = all cores)");
    gen_cmd->add_option("--out", gen.out, "Dataset CSV path")->required();
    gen_cmd->add_option("--manifest", gen.manifest, "Manifest path");

    TrainOptions tr;
    auto* train_cmd = app.add_subcommand("train", "Train the LSTM on a dataset CSV");
    train_cmd->add_option("dataset", tr.dataset, "Dataset CSV")->required();
    train_cmd->add_option("--hidden", tr.hidden, "Hidden units");
    train_cmd->add_option("--epochs", tr.epochs, "Maximum epochs");
    train_cmd->add_option("--batch", tr.batch, "Mini-batch size");
    train_cmd->add_option("--lr", tr.lr, "Adam learning rate");
    train_cmd->add_option("--beta1", tr.beta1, "Adam beta1");
    train_cmd->add_option("--beta2", tr.beta2, "Adam beta2");
    train_cmd->add_option("--adam-eps", tr.adam_eps, "Adam epsilon");
    train_cmd->add_option("--window", tr.window, "Rolling window length");
    train_cmd->add_option("--train-frac", tr.train_frac, "Fraction of blocks used for training");
    train_cmd->add_option("--patience", tr.patience, "Early-stop window in epochs (0 disables)");
    tr.seed_flag = train_cmd->add_option("--seed", tr.seed, "Initialization seed (fallback RELIBAT_SEED)");
    train_cmd->add_option("--workers", tr.workers, "Worker threads (0 = all cores)");
    train_cmd->add_option("--out", tr.out, "Model file path")->required();
    train_cmd->add_option("--manifest", tr.manifest, "Manifest path");

    PredictOptions pred;
    auto* pred_cmd = app.add_subcommand("predict", "Predict R* for every window of a dataset");
    pred_cmd->add_option("model", pred.model, "Model file")->required();
    pred_cmd->add_option("dataset", pred.dataset, "Dataset CSV")->required();
    pred_cmd->add_flag("--compare", pred.compare, "Print MSE against the dataset's R*");
    pred_cmd->add_option("--train-frac", pred.train_frac, "Split used to report train/test MSE");
    pred_cmd->add_option("--out", pred.out, "Predictions CSV (default stdout)");
    pred_cmd->add_option("--manifest", pred.manifest, "Manifest path");

    std::string replay_path;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run a command from its manifest");
    replay_cmd->add_option("manifest", replay_path, "Manifest file")->required();

    try
    {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    try
    {
        if (exact_cmd->parsed())
        {
            return cmd_exact(exact, out, err);
        }
        if (est_cmd->parsed())
        {
            return cmd_estimate(est, out, err);
        }
        if (gen_cmd->parsed())
        {
            return cmd_generate(gen, out, err);
        }
        if (train_cmd->parsed())
        {
            return cmd_train(tr, out, err);
        }
        if (pred_cmd->parsed())
        {
            return cmd_predict(pred, out, err);
        }
        if (replay_cmd->parsed())
        {
            return cmd_replay(replay_path, out, err);
        }
    }
    catch (const UsageError& e)
    {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kUsageError;
}

}  // namespace relibat::cli
