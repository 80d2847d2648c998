#include "relibat/network.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace relibat {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
{
}

Network::Network(std::uint32_t node_count, std::vector<Arc> arcs,
                 std::optional<std::vector<double>> initial_reliability)
    : node_count_(node_count), arcs_(std::move(arcs)),
      initial_reliability_(std::move(initial_reliability))
{
    if (node_count_ < 2)
    {
        throw std::invalid_argument("network needs at least 2 nodes");
    }
    if (arcs_.empty())
    {
        throw std::invalid_argument("network needs at least 1 arc");
    }
    if (initial_reliability_ && initial_reliability_->size() != arcs_.size())
    {
        throw std::invalid_argument("initial reliability count does not match arc count");
    }

    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    std::vector<std::uint32_t> degree(node_count_, 0);
    for (std::size_t i = 0; i < arcs_.size(); ++i)
    {
        const auto [u, v] = arcs_[i];
        if (u < 1 || u > node_count_ || v < 1 || v > node_count_)
        {
            throw std::invalid_argument("arc " + std::to_string(i + 1) + " has a node id out of range");
        }
        if (u == v)
        {
            throw std::invalid_argument("arc " + std::to_string(i + 1) + " is a self-loop");
        }
        if (!seen.emplace(std::min(u, v), std::max(u, v)).second)
        {
            throw std::invalid_argument("arc " + std::to_string(i + 1) + " duplicates an earlier arc");
        }
        ++degree[u - 1];
        ++degree[v - 1];
    }
    for (std::uint32_t node = 0; node < node_count_; ++node)
    {
        if (degree[node] == 0)
        {
            throw std::invalid_argument("node " + std::to_string(node + 1) + " has no incident arc");
        }
    }
    if (initial_reliability_)
    {
        for (double p : *initial_reliability_)
        {
            if (!(p >= 0.0 && p <= 1.0))
            {
                throw std::invalid_argument("initial reliability outside [0, 1]");
            }
        }
    }

    offsets_.assign(node_count_ + 1, 0);
    for (std::uint32_t node = 0; node < node_count_; ++node)
    {
        offsets_[node + 1] = offsets_[node] + degree[node];
    }
    adjacency_.resize(offsets_.back());
    std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::uint32_t i = 0; i < arcs_.size(); ++i)
    {
        const auto [u, v] = arcs_[i];
        adjacency_[fill[u - 1]++] = {v, i};
        adjacency_[fill[v - 1]++] = {u, i};
    }
}

std::span<const Incidence> Network::incident(std::uint32_t node) const
{
    if (node < 1 || node > node_count_)
    {
        throw std::out_of_range("node id out of range");
    }
    return std::span<const Incidence>(adjacency_).subspan(offsets_[node - 1],
                                                          offsets_[node] - offsets_[node - 1]);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size())
    {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r'))
        {
            ++pos;
        }
        const std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r')
        {
            ++pos;
        }
        if (pos > start)
        {
            fields.push_back(line.substr(start, pos - start));
        }
    }
    return fields;
}

template <class T>
bool parse_number(std::string_view field, T& out)
{
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

Network parse_network(std::string_view text)
{
    std::uint32_t n = 0;
    std::size_t m = 0;
    bool have_header = false;
    std::vector<Arc> arcs;
    std::vector<double> p0;
    std::size_t with_p0 = 0;
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
        {
            eol = text.size();
        }
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos)
        {
            line = line.substr(0, hash);
        }
        const auto fields = split_fields(line);
        if (fields.empty())
        {
            continue;
        }

        if (!have_header)
        {
            if (fields.size() != 2 || !parse_number(fields[0], n) || !parse_number(fields[1], m))
            {
                throw ParseError(line_no, "expected header \"n m\"");
            }
            if (n < 2)
            {
                throw ParseError(line_no, "node count must be at least 2");
            }
            if (m < 1)
            {
                throw ParseError(line_no, "arc count must be at least 1");
            }
            have_header = true;
            continue;
        }

        if (arcs.size() == m)
        {
            throw ParseError(line_no, "more arc lines than the declared " + std::to_string(m));
        }
        Arc arc{};
        if ((fields.size() != 2 && fields.size() != 3) || !parse_number(fields[0], arc.u) ||
            !parse_number(fields[1], arc.v))
        {
            throw ParseError(line_no, "expected \"u v [p0]\"");
        }
        if (arc.u < 1 || arc.u > n || arc.v < 1 || arc.v > n)
        {
            throw ParseError(line_no, "node id out of range 1.." + std::to_string(n));
        }
        if (arc.u == arc.v)
        {
            throw ParseError(line_no, "self-loop on node " + std::to_string(arc.u));
        }
        if (!seen.emplace(std::min(arc.u, arc.v), std::max(arc.u, arc.v)).second)
        {
            throw ParseError(line_no, "duplicate arc " + std::to_string(arc.u) + "-" + std::to_string(arc.v));
        }
        if (fields.size() == 3)
        {
            double p = 0.0;
            if (!parse_number(fields[2], p) || !(p >= 0.0 && p <= 1.0))
            {
                throw ParseError(line_no, "arc reliability must be a number in [0, 1]");
            }
            p0.push_back(p);
            ++with_p0;
        }
        else
        {
            p0.push_back(0.0);
        }
        arcs.push_back(arc);
    }

    if (!have_header)
    {
        throw ParseError(line_no, "missing header line");
    }
    if (arcs.size() != m)
    {
        throw ParseError(line_no, "expected " + std::to_string(m) + " arcs, found " + std::to_string(arcs.size()));
    }
    if (with_p0 != 0 && with_p0 != m)
    {
        throw ParseError(line_no, "initial reliability must be given for every arc or for none");
    }

    std::vector<std::uint32_t> degree(n, 0);
    for (const auto& a : arcs)
    {
        ++degree[a.u - 1];
        ++degree[a.v - 1];
    }
    for (std::uint32_t node = 0; node < n; ++node)
    {
        if (degree[node] == 0)
        {
            throw ParseError(line_no, "node " + std::to_string(node + 1) + " has no incident arc");
        }
    }

    std::optional<std::vector<double>> initial;
    if (with_p0 == m)
    {
        initial = std::move(p0);
    }
    return Network(n, std::move(arcs), std::move(initial));
}

Network load_network(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open network file " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_network(buffer.str());
}

double vector_probability(const StateVector& x, std::span<const double> probs)
{
    if (x.size() != probs.size())
    {
        throw std::invalid_argument("state vector length " + std::to_string(x.size()) +
                                    " does not match " + std::to_string(probs.size()) + " probabilities");
    }
    double p = 1.0;
    for (std::size_t i = 0; i < probs.size(); ++i)
    {
        p *= x[i] ? probs[i] : 1.0 - probs[i];
    }
    return p;
}

double supervector_probability(const Supervector& s, std::span<const double> probs)
{
    if (s.size() > probs.size())
    {
        throw std::invalid_argument("supervector width " + std::to_string(s.size()) +
                                    " exceeds arc count " + std::to_string(probs.size()));
    }
    double p = 1.0;
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        p *= s[i] ? probs[i] : 1.0 - probs[i];
    }
    return p;
}

TimeDistribution::TimeDistribution(std::size_t steps, std::size_t arcs)
    : steps_(steps), arcs_(arcs), table_((steps + 1) * arcs, 0.0)
{
    if (arcs == 0)
    {
        throw std::invalid_argument("time distribution needs at least one arc");
    }
}

std::span<const double> TimeDistribution::row(std::size_t t) const
{
    if (t > steps_)
    {
        throw std::out_of_range("time step " + std::to_string(t) + " beyond horizon");
    }
    return std::span<const double>(table_).subspan(t * arcs_, arcs_);
}

std::span<double> TimeDistribution::row(std::size_t t)
{
    if (t > steps_)
    {
        throw std::out_of_range("time step " + std::to_string(t) + " beyond horizon");
    }
    return std::span<double>(table_).subspan(t * arcs_, arcs_);
}

}  // namespace relibat
