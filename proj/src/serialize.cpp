#include "projeq/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "projeq/errors.hpp"

namespace projeq {

namespace {

constexpr char kMagic[4] = {'P', 'J', 'E', 'Q'};
// Guards against absurd allocations from corrupt headers.
constexpr std::uint32_t kMaxName = 1u << 16;
constexpr std::uint32_t kMaxRank = 16;

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double x) {
    std::uint64_t u;
    std::memcpy(&u, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void get_bytes(std::istream& in, char* dst, std::size_t n, const char* what) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) throw DataError(std::string("checkpoint truncated while reading ") + what);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    get_bytes(in, reinterpret_cast<char*>(b), 4, what);
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

}  // namespace

void write_checkpoint(std::ostream& out, const NamedTensors& records) {
    out.write(kMagic, 4);
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(records.size()));
    for (const auto& [name, t] : records) {
        if (t.size() != nn::shape_size(t.shape)) throw DimensionError("checkpoint record '" + name + "' has inconsistent shape");
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(out, static_cast<std::uint32_t>(t.rank()));
        for (std::size_t d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
        for (double x : t.data) put_f64(out, x);
    }
}

NamedTensors read_checkpoint(std::istream& in) {
    char magic[4];
    get_bytes(in, magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) throw DataError("not a PJEQ checkpoint (bad magic)");
    const std::uint32_t version = get_u32(in, "version");
    if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t count = get_u32(in, "record count");
    NamedTensors out;
    for (std::uint32_t r = 0; r < count; ++r) {
        const std::uint32_t len = get_u32(in, "name length");
        if (len > kMaxName) throw DataError("checkpoint name length " + std::to_string(len) + " too large");
        std::string name(len, '\0');
        get_bytes(in, name.data(), len, "name");
        const std::uint32_t rank = get_u32(in, "rank");
        if (rank > kMaxRank) throw DataError("checkpoint record '" + name + "' has rank " + std::to_string(rank));
        std::vector<std::size_t> shape(rank);
        std::uint64_t n = 1;
        for (auto& d : shape) {
            d = get_u32(in, "dims");
            n *= d;
            if (n > (std::uint64_t{1} << 31)) throw DataError("checkpoint record '" + name + "' is too large");
        }
        std::vector<char> raw(n * 8);
        get_bytes(in, raw.data(), raw.size(), "payload");
        std::vector<double> data(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t u = 0;
            for (int k = 0; k < 8; ++k) u |= std::uint64_t(static_cast<unsigned char>(raw[i * 8 + k])) << (8 * k);
            std::memcpy(&data[i], &u, 8);
        }
        out.emplace_back(std::move(name), nn::Tensor(std::move(shape), std::move(data)));
    }
    return out;
}

void save_checkpoint(const std::string& path, const nn::ParamStore& params, const NamedTensors& extra) {
    NamedTensors records;
    for (const auto& e : params.entries()) records.emplace_back(e.name, e.value);
    records.insert(records.end(), extra.begin(), extra.end());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    write_checkpoint(f, records);
    if (!f) throw DataError("failed writing '" + path + "'");
}

NamedTensors load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path + "'");
    return read_checkpoint(f);
}

NamedTensors restore_params(nn::ParamStore& params, const NamedTensors& records) {
    NamedTensors rest;
    std::size_t matched = 0;
    for (const auto& [name, t] : records) {
        if (!params.contains(name)) {
            rest.emplace_back(name, t);
            continue;
        }
        nn::Tensor& dst = params.value(name);
        if (dst.shape != t.shape)
            throw DimensionError("checkpoint record '" + name + "' has shape " + nn::shape_string(t.shape) +
                                 ", expected " + nn::shape_string(dst.shape));
        dst.data = t.data;
        ++matched;
    }
    if (matched != params.entries().size()) throw DataError("checkpoint is missing parameters");
    return rest;
}

nlohmann::json complex_json(cd z) { return nlohmann::json::array({z.real(), z.imag()}); }

nlohmann::json vec_json(const Vec& v) {
    auto a = nlohmann::json::array();
    for (const cd& z : v) a.push_back(complex_json(z));
    return a;
}

nlohmann::json character_json(const Character& c) {
    return {{"label", c.label()}, {"field", to_string(c.field())}, {"values", vec_json(c.values())}};
}

nlohmann::json group_json(const FiniteGroup& g) {
    return {{"name", g.name()}, {"order", g.order()}, {"labels", g.labels()}, {"generators", g.generators()}};
}

nlohmann::json invariant_basis_json(const InvariantBasis& b) {
    auto vecs = nlohmann::json::array();
    for (const Vec& v : b.basis) vecs.push_back(vec_json(v));
    return {{"character", character_json(b.character)},
            {"field", to_string(b.field)},
            {"dim", b.dim()},
            {"basis", vecs}};
}

nlohmann::json cg_table_json(const CGTable& t) {
    auto rows = nlohmann::json::array();
    for (std::size_t i = 0; i < t.c.rows(); ++i) rows.push_back(vec_json(t.c.row_vec(i)));
    auto blocks = nlohmann::json::array();
    for (const CGBlock& b : t.blocks) blocks.push_back({{"level", b.level.value()}, {"offset", b.offset}});
    return {{"l1", t.l1.value()}, {"l2", t.l2.value()}, {"rows", rows}, {"blocks", blocks}};
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace projeq
