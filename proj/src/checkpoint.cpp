#include "rnnfc/checkpoint.hpp"

#include "rnnfc/error.hpp"

#include <array>
#include <bit>
#include <fstream>

namespace rnnfc {

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'N', 'N', 'F', 'C', 'C', 'K', 'P'};

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::string& source) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) {
        throw ParseError(source + ": truncated checkpoint");
    }
    return v;
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in, const std::string& source) {
    auto n = get<std::uint64_t>(in, source);
    if (n > (1U << 20)) {
        throw ParseError(source + ": corrupt name length");
    }
    std::string s(static_cast<std::size_t>(n), '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) {
        throw ParseError(source + ": truncated checkpoint");
    }
    return s;
}

void put_arrays(std::ostream& out, const std::vector<NamedArray>& arrays) {
    put<std::uint64_t>(out, arrays.size());
    for (const auto& a : arrays) {
        put_string(out, a.name);
        put(out, a.rows);
        put(out, a.cols);
        out.write(reinterpret_cast<const char*>(a.data.data()),
                  static_cast<std::streamsize>(a.data.size() * sizeof(double)));
    }
}

std::vector<NamedArray> get_arrays(std::istream& in, const std::string& source) {
    auto count = get<std::uint64_t>(in, source);
    std::vector<NamedArray> arrays;
    for (std::uint64_t i = 0; i < count; ++i) {
        NamedArray a;
        a.name = get_string(in, source);
        a.rows = get<std::uint64_t>(in, source);
        a.cols = get<std::uint64_t>(in, source);
        if (a.rows * a.cols > (1ULL << 32)) {
            throw ParseError(source + ": corrupt tensor shape for '" + a.name + "'");
        }
        a.data.resize(static_cast<std::size_t>(a.rows * a.cols));
        in.read(reinterpret_cast<char*>(a.data.data()), static_cast<std::streamsize>(a.data.size() * sizeof(double)));
        if (!in) {
            throw ParseError(source + ": truncated tensor '" + a.name + "'");
        }
        arrays.push_back(std::move(a));
    }
    return arrays;
}

} // namespace

std::vector<NamedArray> export_parameters(const grad::ParameterSet& params) {
    std::vector<NamedArray> out;
    for (const auto& p : params) {
        out.push_back({p.name, p.value.rows(), p.value.cols(), {p.value.data().begin(), p.value.data().end()}});
    }
    return out;
}

void import_parameters(const std::vector<NamedArray>& arrays, grad::ParameterSet& params) {
    if (arrays.size() != params.count()) {
        throw ContractError("checkpoint holds " + std::to_string(arrays.size()) + " tensors, model expects " +
                            std::to_string(params.count()));
    }
    for (const auto& a : arrays) {
        auto& p = params.at(a.name);
        if (p.value.rows() != a.rows || p.value.cols() != a.cols) {
            throw ShapeError("checkpoint tensor '" + a.name + "' has a different shape");
        }
        std::copy(a.data.begin(), a.data.end(), p.value.data().begin());
    }
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(kMagic.data(), kMagic.size());
    put(out, kCheckpointVersion);
    put_arrays(out, checkpoint.parameters);
    put_string(out, checkpoint.optimizer_kind);
    put(out, checkpoint.optimizer_step);
    put_arrays(out, checkpoint.optimizer_state);
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    const auto source = path.string();
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw ParseError(source + ": not a checkpoint file");
    }
    auto version = get<std::uint32_t>(in, source);
    if (version != kCheckpointVersion) {
        throw ParseError(source + ": unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint c;
    c.parameters = get_arrays(in, source);
    c.optimizer_kind = get_string(in, source);
    c.optimizer_step = get<std::int64_t>(in, source);
    c.optimizer_state = get_arrays(in, source);
    return c;
}

} // namespace rnnfc
