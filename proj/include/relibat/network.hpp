#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relibat {

/// Raised by parse_network; carries the 1-based line number of the offending line.
class ParseError : public std::runtime_error
{
  public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// An undirected arc between two 1-based node ids.
struct Arc
{
    std::uint32_t u;
    std::uint32_t v;
};

/// Neighbour entry in the precomputed adjacency: the node on the other end and the arc index.
struct Incidence
{
    std::uint32_t node;
    std::uint32_t arc;
};

/**
 * Binary-state network: nodes 1..n, arcs a_1..a_m in a fixed order. Source is node 1,
 * sink is node n. Nodes are perfectly reliable; only arcs fail.
 *
 * Invariants enforced at construction: no self-loops, no parallel arcs, every node is
 * an endpoint of at least one arc, n >= 2.
 */
class Network
{
  public:
    Network(std::uint32_t node_count, std::vector<Arc> arcs,
            std::optional<std::vector<double>> initial_reliability = std::nullopt);

    std::uint32_t node_count() const noexcept { return node_count_; }
    std::size_t arc_count() const noexcept { return arcs_.size(); }
    std::uint32_t source() const noexcept { return 1; }
    std::uint32_t sink() const noexcept { return node_count_; }

    const std::vector<Arc>& arcs() const noexcept { return arcs_; }
    const Arc& arc(std::size_t i) const { return arcs_.at(i); }

    /// Arcs incident to a 1-based node id.
    std::span<const Incidence> incident(std::uint32_t node) const;

    /// Pr(a, 0) for every arc, if the network file supplied them.
    const std::optional<std::vector<double>>& initial_reliability() const noexcept
    {
        return initial_reliability_;
    }

  private:
    std::uint32_t node_count_;
    std::vector<Arc> arcs_;
    std::optional<std::vector<double>> initial_reliability_;
    // CSR adjacency, indexed by 0-based node
    std::vector<std::uint32_t> offsets_;
    std::vector<Incidence> adjacency_;
};

/// Parses the line-oriented network format: "n m", then m lines "u v [p0]". '#' starts a comment.
Network parse_network(std::string_view text);
Network load_network(const std::string& path);

/// 0/1 vector over arc coordinates. The tag keeps full state vectors and supervectors apart.
template <class Tag>
class BinaryVector
{
  public:
    BinaryVector() = default;
    explicit BinaryVector(std::size_t width) : bits_(width, 0) {}
    BinaryVector(std::initializer_list<int> bits)
    {
        bits_.reserve(bits.size());
        for (int b : bits)
        {
            if (b != 0 && b != 1)
            {
                throw std::invalid_argument("binary vector entries must be 0 or 1");
            }
            bits_.push_back(static_cast<std::uint8_t>(b));
        }
    }
    explicit BinaryVector(std::span<const std::uint8_t> bits) : bits_(bits.begin(), bits.end()) {}

    std::size_t size() const noexcept { return bits_.size(); }
    bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
    void set(std::size_t i, bool value) noexcept { bits_[i] = value ? 1 : 0; }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    std::string to_string() const
    {
        std::string s;
        s.reserve(bits_.size());
        for (auto b : bits_)
        {
            s.push_back(b ? '1' : '0');
        }
        return s;
    }

    friend bool operator==(const BinaryVector&, const BinaryVector&) = default;

  private:
    std::vector<std::uint8_t> bits_;
};

struct StateTag;
struct SuperTag;

/// X: one state per arc, coordinate i is arc a_{i+1}.
using StateVector = BinaryVector<StateTag>;
/// S: states of the first delta arcs only.
using Supervector = BinaryVector<SuperTag>;

/// Product over arcs of p_i (working) or 1 - p_i (failed). Throws on length mismatch.
double vector_probability(const StateVector& x, std::span<const double> probs);

/// Same product restricted to the first delta coordinates. Throws if delta > probs.size().
double supervector_probability(const Supervector& s, std::span<const double> probs);

/**
 * Arc reliabilities over time: row t holds Pr(t, a_1..a_m) for t = 0..steps.
 * Row 0 is the initial reliability Pr(a, 0).
 */
class TimeDistribution
{
  public:
    TimeDistribution(std::size_t steps, std::size_t arcs);

    std::size_t steps() const noexcept { return steps_; }
    std::size_t arc_count() const noexcept { return arcs_; }

    std::span<const double> row(std::size_t t) const;
    std::span<double> row(std::size_t t);
    double at(std::size_t t, std::size_t arc) const { return row(t)[arc]; }

  private:
    std::size_t steps_;
    std::size_t arcs_;
    std::vector<double> table_;
};

}  // namespace relibat
