#include "relibat/model_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "relibat/text.hpp"

namespace relibat {

namespace {

constexpr const char* kGateNames[kGateCount] = {"f", "i", "o", "c"};

struct TensorRef
{
    std::string name;
    std::size_t rows;
    std::size_t cols;
    std::span<double> data;
};

std::vector<TensorRef> tensors(LstmParams& p)
{
    const std::size_t h = p.hidden_dim();
    const std::size_t eta = p.input_dim();
    std::vector<TensorRef> out;
    for (std::size_t g = 0; g < kGateCount; ++g)
    {
        out.push_back({std::string("W_x_") + kGateNames[g], h, eta, p.input_weights(static_cast<Gate>(g))});
    }
    for (std::size_t g = 0; g < kGateCount; ++g)
    {
        out.push_back({std::string("W_h_") + kGateNames[g], h, h, p.recurrent_weights(static_cast<Gate>(g))});
    }
    for (std::size_t g = 0; g < kGateCount; ++g)
    {
        out.push_back({std::string("b_") + kGateNames[g], 1, h, p.bias(static_cast<Gate>(g))});
    }
    out.push_back({"w_out", 1, h, p.output_weights()});
    out.push_back({"b_out", 1, 1, p.values().subspan(p.size() - 1, 1)});
    return out;
}

class LineReader
{
  public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::istringstream next(const char* expecting)
    {
        std::string line;
        while (std::getline(in_, line))
        {
            ++line_no_;
            if (!line.empty() && line.back() == '\r')
            {
                line.pop_back();
            }
            if (line.find_first_not_of(" \t") != std::string::npos)
            {
                return std::istringstream(line);
            }
        }
        fail(std::string("unexpected end of file, expected ") + expecting);
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw std::runtime_error("model line " + std::to_string(line_no_) + ": " + what);
    }

    std::string keyword(std::istringstream& line, const char* expected) const
    {
        std::string word;
        line >> word;
        if (word != expected)
        {
            fail(std::string("expected \"") + expected + "\", found \"" + word + "\"");
        }
        return word;
    }

    double number(std::istringstream& line) const
    {
        std::string word;
        if (!(line >> word))
        {
            fail("missing number");
        }
        try
        {
            return parse_double(word);
        }
        catch (const std::invalid_argument& e)
        {
            fail(e.what());
        }
    }

    std::size_t count(std::istringstream& line) const
    {
        const double v = number(line);
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
        {
            fail("expected a non-negative integer");
        }
        return static_cast<std::size_t>(v);
    }

    void finish(std::istringstream& line) const
    {
        std::string extra;
        if (line >> extra)
        {
            fail("unexpected trailing field \"" + extra + "\"");
        }
    }

  private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

}  // namespace

void write_model(std::ostream& out, const LstmModel& model)
{
    const auto& p = model.params;
    if (model.normalization.size() != p.input_dim())
    {
        throw std::invalid_argument("model needs one normalization entry per input feature");
    }
    out << "relibat-lstm " << kModelFormatVersion << '\n';
    out << "input_dim " << p.input_dim() << '\n';
    out << "hidden_dim " << p.hidden_dim() << '\n';
    out << "window " << model.window << '\n';
    out << "adam " << format_double(model.adam.learning_rate) << ' ' << format_double(model.adam.beta1) << ' '
        << format_double(model.adam.beta2) << ' ' << format_double(model.adam.epsilon) << '\n';
    for (const auto& s : model.normalization)
    {
        out << "norm " << format_double(s.mean) << ' ' << format_double(s.min) << ' ' << format_double(s.max)
            << '\n';
    }
    LstmParams copy = p;
    for (const auto& t : tensors(copy))
    {
        out << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
        for (std::size_t r = 0; r < t.rows; ++r)
        {
            for (std::size_t c = 0; c < t.cols; ++c)
            {
                out << (c == 0 ? "" : " ") << format_double(t.data[r * t.cols + c]);
            }
            out << '\n';
        }
    }
    out << "end\n";
}

LstmModel read_model(std::istream& in)
{
    LineReader reader(in);

    auto line = reader.next("header");
    reader.keyword(line, "relibat-lstm");
    if (reader.count(line) != static_cast<std::size_t>(kModelFormatVersion))
    {
        reader.fail("unsupported model format version");
    }

    line = reader.next("input_dim");
    reader.keyword(line, "input_dim");
    const std::size_t eta = reader.count(line);
    line = reader.next("hidden_dim");
    reader.keyword(line, "hidden_dim");
    const std::size_t h = reader.count(line);
    if (eta == 0 || h == 0)
    {
        reader.fail("dimensions must be positive");
    }

    LstmModel model;
    model.params = LstmParams(eta, h);

    line = reader.next("window");
    reader.keyword(line, "window");
    model.window = reader.count(line);
    if (model.window == 0)
    {
        reader.fail("window must be positive");
    }

    line = reader.next("adam");
    reader.keyword(line, "adam");
    model.adam.learning_rate = reader.number(line);
    model.adam.beta1 = reader.number(line);
    model.adam.beta2 = reader.number(line);
    model.adam.epsilon = reader.number(line);
    reader.finish(line);

    for (std::size_t k = 0; k < eta; ++k)
    {
        line = reader.next("norm");
        reader.keyword(line, "norm");
        ColumnStats s;
        s.mean = reader.number(line);
        s.min = reader.number(line);
        s.max = reader.number(line);
        reader.finish(line);
        model.normalization.push_back(s);
    }

    for (const auto& t : tensors(model.params))
    {
        line = reader.next("tensor");
        reader.keyword(line, "tensor");
        std::string name;
        line >> name;
        const std::size_t rows = reader.count(line);
        const std::size_t cols = reader.count(line);
        if (name != t.name || rows != t.rows || cols != t.cols)
        {
            reader.fail("expected tensor " + t.name + " " + std::to_string(t.rows) + "x" + std::to_string(t.cols));
        }
        for (std::size_t r = 0; r < rows; ++r)
        {
            line = reader.next("tensor row");
            for (std::size_t c = 0; c < cols; ++c)
            {
                t.data[r * cols + c] = reader.number(line);
            }
            reader.finish(line);
        }
    }
    line = reader.next("end");
    reader.keyword(line, "end");
    return model;
}

void save_model(const std::string& path, const LstmModel& model)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write model " + path);
    }
    write_model(out, model);
}

LstmModel load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open model " + path);
    }
    return read_model(in);
}

}  // namespace relibat
