#include "projeq/spinor_net.hpp"

#include <cmath>

#include "projeq/errors.hpp"
#include "projeq/random.hpp"

namespace projeq {

namespace {

constexpr std::array<FieldType, 3> kTypes{FieldType::Scalar, FieldType::Spinor, FieldType::Vector};
constexpr std::array<char, 3> kTypeLetter{'s', 'p', 'v'};

std::size_t idx(FieldType t) { return static_cast<std::size_t>(t); }

nn::Tensor features(std::size_t n, std::size_t count, FieldType t) { return nn::Tensor({n, count, kFieldWidth[idx(t)]}); }

}  // namespace

std::string to_string(SpinorVariant v) {
    switch (v) {
        case SpinorVariant::AsScalars: return "spinors-as-scalars";
        case SpinorVariant::AsFeatures: return "spinors-as-features";
        case SpinorVariant::AsFilters: return "spinors-as-filters";
        case SpinorVariant::SquaredFeatures: return "squared-features";
        case SpinorVariant::SquaredFilters: return "squared-filters";
    }
    return "?";
}

SpinorVariant parse_spinor_variant(const std::string& s) {
    for (SpinorVariant v : kSpinorVariants)
        if (to_string(v) == s) return v;
    throw DomainError("unknown spinor variant '" + s +
                      "' (expected spinors-as-scalars, spinors-as-features, spinors-as-filters, squared-features or "
                      "squared-filters)");
}

std::size_t TypeCounts::operator[](FieldType t) const {
    switch (t) {
        case FieldType::Scalar: return scalars;
        case FieldType::Spinor: return spinors;
        case FieldType::Vector: return vectors;
    }
    return 0;
}

std::vector<SpinorLayerSpec> spinor_layer_specs(SpinorVariant v) {
    using T = TypeCounts;
    const T one_s_v{1, 0, 1};
    switch (v) {
        case SpinorVariant::AsScalars:
            return {{{4, 0, 1}, one_s_v, {32, 0, 8}, true},
                    {{32, 0, 8}, one_s_v, {32, 0, 8}, true},
                    {{32, 0, 8}, one_s_v, {4, 0, 0}, false}};
        case SpinorVariant::AsFeatures:
            return {{{0, 1, 1}, one_s_v, {32, 12, 12}, true},
                    {{32, 12, 12}, one_s_v, {0, 12, 0}, true},
                    {{0, 12, 0}, one_s_v, {0, 1, 0}, false}};
        case SpinorVariant::AsFilters:
            return {{{0, 0, 1}, {1, 1, 1}, {32, 4, 4}, true},
                    {{32, 4, 4}, {1, 1, 1}, {32, 4, 4}, true},
                    {{32, 4, 4}, {1, 1, 1}, {0, 1, 0}, false}};
        case SpinorVariant::SquaredFeatures:
            return {{{0, 0, 3}, one_s_v, {32, 0, 8}, true},
                    {{32, 0, 8}, one_s_v, {32, 0, 8}, true},
                    {{32, 0, 8}, {0, 1, 0}, {0, 1, 0}, false}};
        case SpinorVariant::SquaredFilters:
            return {{{0, 0, 1}, {1, 0, 3}, {32, 0, 8}, true},
                    {{32, 0, 8}, {1, 0, 3}, {32, 0, 8}, true},
                    {{32, 0, 8}, {0, 1, 0}, {0, 1, 0}, false}};
    }
    throw DomainError("spinor_layer_specs: unknown variant");
}

IrrepLevel field_level(FieldType t) { return IrrepLevel(static_cast<int>(idx(t))); }

bool path_allowed(FieldType a, FieldType b, FieldType out) {
    const int la = field_level(a).twice(), lb = field_level(b).twice(), lo = field_level(out).twice();
    return lo >= std::abs(la - lb) && lo <= la + lb && (la + lb - lo) % 2 == 0;
}

PathTerms path_terms(FieldType a, FieldType b, FieldType out) {
    if (!path_allowed(a, b, out)) throw DomainError("path_terms: output type not in the product");
    const CGTable& cg = clebsch_gordan(field_level(a), field_level(b));
    const Matrix rows = cg.block_rows(field_level(out));
    const bool ca = a == FieldType::Spinor, cb = b == FieldType::Spinor;
    const std::size_t da = field_level(a).dim(), db = field_level(b).dim(), dc = rows.rows();
    PathTerms pt;
    pt.split = out != FieldType::Spinor && ca && cb;
    const bool interleave = out == FieldType::Spinor;
    pt.dout = interleave || pt.split ? 2 * dc : dc;
    // Each complex input component is its real part plus i times its imaginary part.
    auto parts = [](bool complex, std::size_t k) {
        std::vector<std::pair<std::size_t, cd>> p;
        if (complex) {
            p.emplace_back(2 * k, cd{1, 0});
            p.emplace_back(2 * k + 1, cd{0, 1});
        } else {
            p.emplace_back(k, cd{1, 0});
        }
        return p;
    };
    for (std::size_t r = 0; r < dc; ++r)
        for (std::size_t i = 0; i < da; ++i)
            for (std::size_t j = 0; j < db; ++j) {
                const cd m = rows(r, i * db + j);
                if (std::abs(m) < 1e-14) continue;
                for (const auto& [s, ua] : parts(ca, i))
                    for (const auto& [t, ub] : parts(cb, j)) {
                        const cd c = m * ua * ub;
                        auto push = [&](std::size_t at, double v) {
                            if (std::abs(v) > 1e-14) pt.terms.push_back({at, s, t, v});
                        };
                        if (interleave) {
                            push(2 * r, c.real());
                            push(2 * r + 1, c.imag());
                        } else if (pt.split) {
                            push(r, c.real());
                            push(dc + r, c.imag());
                        } else {
                            if (std::abs(c.imag()) > 1e-12)
                                throw InvariantError("path_terms: real path produced a complex coefficient");
                            push(r, c.real());
                        }
                    }
            }
    return pt;
}

CloudBatch make_cloud_batch(std::span<const SpinorSample> samples) {
    CloudBatch b;
    b.clouds = samples.size();
    b.points_per_cloud = kSpinorPoints;
    const std::size_t m = kSpinorPoints;
    for (std::size_t c = 0; c < samples.size(); ++c) {
        for (std::size_t i = 0; i < m; ++i) {
            b.positions.push_back(samples[c].positions[i]);
            b.spinors.push_back(samples[c].spinors[i]);
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (i != j) b.pairs.push_back({c * m + i, c * m + j, b.pairs.size()});
    }
    return b;
}

namespace {

void put_spinor(double* dst, const Spinor& s) {
    dst[0] = s[0].real();
    dst[1] = s[0].imag();
    dst[2] = s[1].real();
    dst[3] = s[1].imag();
}

std::pair<Vec3, Vec3> square_parts(const Spinor& s) {
    const SpinorSquare sq = spinor_square(s);
    Vec3 re{}, im{};
    for (std::size_t k = 0; k < 3; ++k) {
        re[k] = sq.vector[k].real();
        im[k] = sq.vector[k].imag();
    }
    return {re, im};
}

void put_vec(double* dst, const Vec3& v) { std::copy(v.begin(), v.end(), dst); }

TypedFeatures wrap(nn::Tape& tape, std::array<nn::Tensor, 3> t, const std::array<std::size_t, 3>& counts) {
    TypedFeatures f;
    f.counts = counts;
    for (std::size_t k = 0; k < 3; ++k)
        if (counts[k]) f.parts[k] = tape.constant(std::move(t[k]));
    return f;
}

}  // namespace

TypedFeatures spinor_input_features(nn::Tape& tape, SpinorVariant v, const CloudBatch& batch) {
    const std::size_t n = batch.points(), m = batch.points_per_cloud;
    std::vector<Vec3> rel(n, Vec3{0, 0, 0});
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t c0 = (p / m) * m;
        for (std::size_t j = c0; j < c0 + m; ++j)
            if (j != p)
                for (std::size_t k = 0; k < 3; ++k) rel[p][k] += (batch.positions[p][k] - batch.positions[j][k]) / double(m - 1);
    }
    const TypeCounts want = spinor_layer_specs(v).front().input;
    std::array<nn::Tensor, 3> t{features(n, want.scalars, FieldType::Scalar), features(n, want.spinors, FieldType::Spinor),
                                features(n, want.vectors, FieldType::Vector)};
    for (std::size_t p = 0; p < n; ++p) {
        put_vec(&t[2].data[p * want.vectors * 3], rel[p]);
        switch (v) {
            case SpinorVariant::AsScalars: put_spinor(&t[0].data[p * 4], batch.spinors[p]); break;
            case SpinorVariant::AsFeatures: put_spinor(&t[1].data[p * 4], batch.spinors[p]); break;
            case SpinorVariant::SquaredFeatures: {
                const auto [re, im] = square_parts(batch.spinors[p]);
                put_vec(&t[2].data[p * 9 + 3], re);
                put_vec(&t[2].data[p * 9 + 6], im);
                break;
            }
            default: break;
        }
    }
    return wrap(tape, std::move(t), {want.scalars, want.spinors, want.vectors});
}

TypedFeatures spinor_edge_filters(nn::Tape& tape, const TypeCounts& counts, const CloudBatch& batch) {
    if (counts.scalars > 1 || counts.spinors > 1 || (counts.vectors != 0 && counts.vectors != 1 && counts.vectors != 3))
        throw ConfigError("spinor_edge_filters: supported filter counts are scalars <= 1, spinors <= 1, vectors in {0,1,3}");
    const std::size_t e = batch.edges();
    std::array<nn::Tensor, 3> t{features(e, counts.scalars, FieldType::Scalar),
                                features(e, counts.spinors, FieldType::Spinor),
                                features(e, counts.vectors, FieldType::Vector)};
    for (const nn::PairIndex& pr : batch.pairs) {
        const Spinor& sj = batch.spinors[pr.src];
        if (counts.scalars) t[0].data[pr.edge] = 1.0;
        if (counts.spinors) put_spinor(&t[1].data[pr.edge * 4], sj);
        if (counts.vectors) {
            Vec3 d{};
            for (std::size_t k = 0; k < 3; ++k) d[k] = batch.positions[pr.src][k] - batch.positions[pr.dst][k];
            double* dst = &t[2].data[pr.edge * counts.vectors * 3];
            // Coincident points get a zero direction.
            if (std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) > 1e-12) {
                const std::vector<double> y = spherical_harmonic(1, d);
                std::copy(y.begin(), y.end(), dst);
            }
            if (counts.vectors == 3) {
                const auto [re, im] = square_parts(sj);
                put_vec(dst + 3, re);
                put_vec(dst + 6, im);
            }
        }
    }
    return wrap(tape, std::move(t), {counts.scalars, counts.spinors, counts.vectors});
}

SpinorLayer::SpinorLayer(std::string prefix, SpinorLayerSpec spec) : prefix_(std::move(prefix)), spec_(spec) {
    for (FieldType out : kTypes) {
        const std::size_t want = out == FieldType::Scalar ? scalar_channels() : spec_.output[out];
        if (want == 0) continue;
        bool reached = false;
        for (FieldType a : kTypes)
            for (FieldType b : kTypes) {
                if (!spec_.input[a] || !spec_.filter[b] || !path_allowed(a, b, out)) continue;
                Path p{a, b, out, path_terms(a, b, out), want, {}};
                if (p.terms.split) p.channels = want / 2;
                if (p.channels == 0) continue;
                p.name = prefix_ + "." + kTypeLetter[idx(out)] + "." + kTypeLetter[idx(a)] + kTypeLetter[idx(b)];
                paths_.push_back(std::move(p));
                reached = true;
            }
        if (!reached)
            throw ConfigError(prefix_ + ": no input/filter pair produces the requested " +
                              std::string(1, kTypeLetter[idx(out)]) + " outputs");
    }
}

std::size_t SpinorLayer::scalar_channels() const {
    return spec_.output.scalars + (spec_.gated ? spec_.output.spinors + spec_.output.vectors : 0);
}

void SpinorLayer::init_params(nn::ParamStore& store, std::uint64_t seed, std::size_t layer_index) const {
    Rng rng(seed, Stream::Init, layer_index);
    for (const Path& p : paths_) {
        const std::size_t ni = spec_.input[p.in], nf = spec_.filter[p.filt];
        nn::Tensor wi({p.channels, ni}), wf({p.channels, nf});
        for (double& x : wi.data) x = rng.normal(0.0, 1.0 / std::sqrt(double(ni)));
        for (double& x : wf.data) x = rng.normal(0.0, 1.0 / std::sqrt(double(nf)));
        store.add(p.name + ".in", std::move(wi));
        store.add(p.name + ".filter", std::move(wf));
    }
    if (scalar_channels()) store.add(prefix_ + ".bias", nn::Tensor({scalar_channels()}));
}

TypedFeatures SpinorLayer::apply(nn::Tape& tape, nn::ParamStore& store, const TypedFeatures& in,
                                 const TypedFeatures& filters, const CloudBatch& batch) const {
    for (FieldType t : kTypes) {
        if (in.counts[idx(t)] != spec_.input[t]) throw DimensionError(prefix_ + ": input counts do not match the layer");
        if (filters.counts[idx(t)] != spec_.filter[t]) throw DimensionError(prefix_ + ": filter counts do not match the layer");
    }
    const std::size_t n = batch.points();
    std::array<nn::Var, 3> acc{};
    std::array<bool, 3> have{};
    for (const Path& p : paths_) {
        nn::Var a = nn::contract_mix(store.bind(tape, p.name + ".in"), in[p.in]);
        nn::Var b = nn::contract_mix(store.bind(tape, p.name + ".filter"), filters[p.filt]);
        nn::Var c = nn::pair_bilinear(a, b, batch.pairs, p.terms.terms, p.terms.dout);
        const std::size_t want = p.out == FieldType::Scalar ? scalar_channels() : spec_.output[p.out];
        const std::size_t w = kFieldWidth[idx(p.out)];
        if (p.terms.split) {
            c = nn::reshape(c, {n, 2 * p.channels, w});
            if (2 * p.channels < want) c = nn::concat({c, tape.constant(nn::Tensor({n, want - 2 * p.channels, w}))}, 1);
        }
        const std::size_t o = idx(p.out);
        acc[o] = have[o] ? nn::add(acc[o], c) : c;
        have[o] = true;
    }
    TypedFeatures out;
    out.counts = {spec_.output.scalars, spec_.output.spinors, spec_.output.vectors};
    const std::size_t sc = scalar_channels();
    nn::Var scal;
    if (sc) scal = nn::add_bias(nn::reshape(acc[0], {n, sc}), store.bind(tape, prefix_ + ".bias"));
    if (!spec_.gated) {
        if (sc) out.parts[0] = nn::reshape(scal, {n, sc, 1});
        out.parts[1] = acc[1];
        out.parts[2] = acc[2];
        return out;
    }
    const std::size_t ns = spec_.output.scalars, np = spec_.output.spinors, nv = spec_.output.vectors;
    if (ns) out.parts[0] = nn::reshape(nn::gelu(nn::slice(scal, 1, 0, ns)), {n, ns, 1});
    if (np) out.parts[1] = nn::gate_mul(acc[1], nn::sigmoid(nn::slice(scal, 1, ns, ns + np)));
    if (nv) out.parts[2] = nn::gate_mul(acc[2], nn::sigmoid(nn::slice(scal, 1, ns + np, ns + np + nv)));
    return out;
}

SpinorNet::SpinorNet(SpinorVariant v, std::uint64_t seed) : variant_(v) {
    const auto specs = spinor_layer_specs(v);
    for (std::size_t l = 0; l < specs.size(); ++l) {
        layers_.emplace_back("layer" + std::to_string(l + 1), specs[l]);
        layers_.back().init_params(params_, seed, l);
    }
}

nn::Var SpinorNet::forward(nn::Tape& tape, const CloudBatch& batch) {
    TypedFeatures f = spinor_input_features(tape, variant_, batch);
    for (const SpinorLayer& layer : layers_)
        f = layer.apply(tape, params_, f, spinor_edge_filters(tape, layer.spec().filter, batch), batch);
    const nn::Var& last = variant_ == SpinorVariant::AsScalars ? f[FieldType::Scalar] : f[FieldType::Spinor];
    return nn::reshape(nn::group_mean(last, batch.points_per_cloud), {batch.clouds, 4});
}

std::vector<Spinor> SpinorNet::predict(std::span<const SpinorSample> samples) {
    nn::Tape tape;
    const nn::Tensor y = forward(tape, make_cloud_batch(samples)).value();
    std::vector<Spinor> out(samples.size());
    for (std::size_t b = 0; b < samples.size(); ++b)
        out[b] = {cd{y.data[b * 4], y.data[b * 4 + 1]}, cd{y.data[b * 4 + 2], y.data[b * 4 + 3]}};
    return out;
}

nn::Tensor spinor_targets(std::span<const SpinorSample> samples) {
    nn::Tensor t({samples.size(), 4});
    for (std::size_t b = 0; b < samples.size(); ++b) put_spinor(&t.data[b * 4], samples[b].target);
    return t;
}

}  // namespace projeq
