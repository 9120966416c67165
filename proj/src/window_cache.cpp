#include "rnnfc/window_cache.hpp"

#include "rnnfc/error.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace rnnfc {

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'N', 'N', 'F', 'C', 'W', 'I', 'N'};

static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void i32(std::int32_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void str(const std::string& s) {
        u64(s.size());
        raw(s.data(), s.size());
    }
    void doubles(const std::vector<double>& v) {
        u64(v.size());
        raw(v.data(), v.size() * sizeof(double));
    }
    void opt_f64(const std::optional<double>& v) {
        u32(v ? 1 : 0);
        f64(v.value_or(0.0));
    }
    void opt_doubles(const std::optional<std::vector<double>>& v) {
        u32(v ? 1 : 0);
        doubles(v ? *v : std::vector<double>{});
    }

private:
    void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    std::ostream& out_;
};

class Reader {
public:
    Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    std::uint32_t u32() { return pod<std::uint32_t>(); }
    std::uint64_t u64() { return pod<std::uint64_t>(); }
    std::int32_t i32() { return pod<std::int32_t>(); }
    double f64() { return pod<double>(); }
    std::string str() {
        auto n = checked_size(u64());
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }
    std::vector<double> doubles() {
        auto n = checked_size(u64());
        std::vector<double> v(n);
        raw(v.data(), n * sizeof(double));
        return v;
    }
    std::optional<double> opt_f64() {
        auto present = u32();
        auto v = f64();
        return present ? std::optional<double>(v) : std::nullopt;
    }
    std::optional<std::vector<double>> opt_doubles() {
        auto present = u32();
        auto v = doubles();
        return present ? std::optional<std::vector<double>>(std::move(v)) : std::nullopt;
    }

private:
    template <typename T>
    T pod() {
        T v{};
        raw(&v, sizeof v);
        return v;
    }
    std::size_t checked_size(std::uint64_t n) {
        if (n > (1ULL << 32)) {
            throw ParseError(source_ + ": corrupt length field");
        }
        return static_cast<std::size_t>(n);
    }
    void raw(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in_) {
            throw ParseError(source_ + ": truncated window cache");
        }
    }
    std::istream& in_;
    std::string source_;
};

void write_key(Writer& w, const WindowCacheKey& key) {
    w.str(key.collection);
    w.u32(static_cast<std::uint32_t>(key.pipeline));
    w.i32(key.m);
    w.i32(key.n);
    w.u32(static_cast<std::uint32_t>(key.stage));
    w.u32(static_cast<std::uint32_t>(key.format));
}

WindowCacheKey read_key(Reader& r) {
    WindowCacheKey key;
    key.collection = r.str();
    key.pipeline = static_cast<Pipeline>(r.u32());
    key.m = r.i32();
    key.n = r.i32();
    key.stage = static_cast<Stage>(r.u32());
    key.format = static_cast<InputFormat>(r.u32());
    return key;
}

} // namespace

std::filesystem::path window_cache_path(const std::filesystem::path& dir, const WindowCacheKey& key,
                                        const std::string& series_id) {
    auto variant = to_string(key.pipeline) + "_" + to_string(key.format) + "_m" + std::to_string(key.m) + "_n" +
                   std::to_string(key.n);
    return dir / key.collection / variant / (series_id + "." + to_string(key.stage) + ".wsc");
}

void write_window_cache(const std::filesystem::path& path, const WindowCacheKey& key, const WindowSet& windows) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    Writer w(out);
    out.write(kMagic.data(), kMagic.size());
    w.u32(kWindowCacheVersion);
    write_key(w, key);

    w.str(windows.series_id);
    w.i32(windows.m);
    w.i32(windows.n);
    w.u32(static_cast<std::uint32_t>(windows.stage));
    w.u32(static_cast<std::uint32_t>(windows.format));
    w.u64(windows.blocks.size());
    for (const auto& b : windows.blocks) {
        w.doubles(b.input);
        w.opt_doubles(b.target);
        w.u32(static_cast<std::uint32_t>(b.record.pipeline));
        w.i32(b.record.log_offset);
        w.opt_f64(b.record.series_mean);
        w.opt_f64(b.record.trend_anchor);
        w.opt_doubles(b.record.seasonal_future);
    }
    w.u64(windows.warmup.size());
    for (const auto& v : windows.warmup) {
        w.doubles(v);
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

WindowSet read_window_cache(const std::filesystem::path& path, const WindowCacheKey& expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw ParseError(path.string() + ": not a window cache file");
    }
    Reader r(in, path.string());
    auto version = r.u32();
    if (version != kWindowCacheVersion) {
        throw ParseError(path.string() + ": unsupported cache version " + std::to_string(version));
    }
    auto key = read_key(r);
    if (!(key == expected)) {
        throw ParseError(path.string() + ": cache key does not match the requested configuration");
    }

    WindowSet ws;
    ws.series_id = r.str();
    ws.m = r.i32();
    ws.n = r.i32();
    ws.stage = static_cast<Stage>(r.u32());
    ws.format = static_cast<InputFormat>(r.u32());
    auto count = r.u64();
    ws.blocks.reserve(static_cast<std::size_t>(count));
    for (std::uint64_t i = 0; i < count; ++i) {
        WindowBlock b;
        b.input = r.doubles();
        b.target = r.opt_doubles();
        b.record.pipeline = static_cast<Pipeline>(r.u32());
        b.record.log_offset = r.i32();
        b.record.series_mean = r.opt_f64();
        b.record.trend_anchor = r.opt_f64();
        b.record.seasonal_future = r.opt_doubles();
        ws.blocks.push_back(std::move(b));
    }
    auto warm = r.u64();
    for (std::uint64_t i = 0; i < warm; ++i) {
        ws.warmup.push_back(r.doubles());
    }
    return ws;
}

} // namespace rnnfc
