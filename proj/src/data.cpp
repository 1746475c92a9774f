#include "projeq/data.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

#include "projeq/random.hpp"

namespace projeq {

// ---------------------------------------------------------------- IDX files

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
           std::uint32_t{b[at + 3]};
}

}  // namespace

std::vector<double> IdxArray::scaled() const {
    std::vector<double> out(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) out[i] = static_cast<double>(bytes[i]) / 255.0;
    return out;
}

IdxArray parse_idx(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw IdxTruncatedError("IDX: file shorter than its magic number");
    const std::uint32_t magic = read_be32(bytes, 0);
    IdxArray out;
    std::size_t rank = 0;
    if (magic == kIdxImageMagic) {
        out.kind = IdxKind::Images;
        rank = 3;
    } else if (magic == kIdxLabelMagic) {
        out.kind = IdxKind::Labels;
        rank = 1;
    } else {
        char buf[16];
        std::snprintf(buf, sizeof buf, "0x%08x", magic);
        throw IdxMagicError(std::string("IDX: unsupported magic number ") + buf);
    }
    const std::size_t header = 4 + 4 * rank;
    if (bytes.size() < header) throw IdxTruncatedError("IDX: header truncated");
    std::size_t total = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        const std::size_t d = read_be32(bytes, 4 + 4 * i);
        out.dims.push_back(d);
        if (d != 0 && total > kMaxIdxElements / d) throw IdxDimensionError("IDX: dimension product exceeds 2^31 elements");
        total *= d;
    }
    if (bytes.size() - header < total)
        throw IdxTruncatedError("IDX: payload has " + std::to_string(bytes.size() - header) + " bytes, header promises " +
                                std::to_string(total));
    out.bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header),
                     bytes.begin() + static_cast<std::ptrdiff_t>(header + total));
    return out;
}

IdxArray read_idx(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("IDX: cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_idx(bytes);
}

ImageSet load_idx_pair(const std::string& image_path, const std::string& label_path, std::size_t limit) {
    const IdxArray imgs = read_idx(image_path);
    const IdxArray labs = read_idx(label_path);
    if (imgs.kind != IdxKind::Images) throw DataError("IDX: " + image_path + " does not hold images");
    if (labs.kind != IdxKind::Labels) throw DataError("IDX: " + label_path + " does not hold labels");
    if (imgs.dims[0] != labs.dims[0]) throw DataError("IDX: image and label counts differ");
    ImageSet set;
    set.rows = imgs.dims[1];
    set.cols = imgs.dims[2];
    const std::size_t n = limit == 0 ? imgs.dims[0] : std::min(limit, imgs.dims[0]);
    const std::size_t px = set.rows * set.cols;
    const std::vector<double> all = imgs.scaled();
    for (std::size_t i = 0; i < n; ++i) {
        set.images.emplace_back(all.begin() + static_cast<std::ptrdiff_t>(i * px),
                                all.begin() + static_cast<std::ptrdiff_t>((i + 1) * px));
        if (labs.bytes[i] > 9) throw DataError("IDX: label outside 0-9");
        set.labels.push_back(labs.bytes[i]);
    }
    return set;
}

// ---------------------------------------------------------------- flip task

std::vector<double> flip_image(const std::vector<double>& img, std::size_t h, std::size_t w, std::size_t g) {
    if (img.size() != h * w) throw DimensionError("flip_image: size mismatch");
    if (g > 3) throw DomainError("flip_image: element index must be below 4");
    std::vector<double> out(img.size());
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            out[r * w + c] = img[((g & 1U) ? h - 1 - r : r) * w + ((g & 2U) ? w - 1 - c : c)];
    return out;
}

std::size_t flip_element(FlipChoice f) {
    switch (f) {
        case FlipChoice::None: return 0;
        case FlipChoice::Vertical: return 1;
        case FlipChoice::Horizontal: return 2;
    }
    return 0;
}

const char* to_string(FlipChoice f) {
    switch (f) {
        case FlipChoice::None: return "none";
        case FlipChoice::Horizontal: return "horizontal";
        case FlipChoice::Vertical: return "vertical";
    }
    return "?";
}

int remap_flip_label(int label, FlipChoice f) {
    if (label < 0 || label > 9) throw DomainError("remap_flip_label: label must be 0-9");
    if (f == FlipChoice::None || label <= 2) return label;
    if (label <= 5) return f == FlipChoice::Horizontal ? kNanClass : label;
    if (label <= 7) return f == FlipChoice::Vertical ? kNanClass : label;
    return kNanClass;
}

std::vector<FlipSample> gen_flip_dataset(const ImageSet& source, std::uint64_t seed, std::uint64_t first_index) {
    std::vector<FlipSample> out;
    out.reserve(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
        Rng rng(seed, Stream::Flip, first_index + i);
        const auto f = static_cast<FlipChoice>(rng.below(3));
        FlipSample s;
        s.rows = source.rows;
        s.cols = source.cols;
        s.original = source.labels[i];
        s.flip = f;
        s.label = remap_flip_label(s.original, f);
        s.image = flip_image(source.images[i], source.rows, source.cols, flip_element(f));
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

struct Stroke {
    double x0, y0, x1, y1;
};

const std::array<std::vector<Stroke>, 10>& glyph_strokes() {
    static const std::array<std::vector<Stroke>, 10> strokes{{
        {{0, 0, 0, 1}, {1, 0, 1, 1}, {0, .5, 1, .5}},                // H
        {{.5, 0, .5, 1}, {0, .5, 1, .5}},                            // +
        {{0, 0, 1, 0}, {1, 0, 1, 1}, {1, 1, 0, 1}, {0, 1, 0, 0}},    // O
        {{0, 0, 0, 1}, {0, 0, 1, 0}, {0, .5, .5, .5}, {0, 1, 1, 1}}, // E
        {{0, 0, 1, 0}, {0, 0, 0, 1}, {0, 1, 1, 1}},                  // C
        {{0, 0, 0, 1}, {0, .5, 1, 0}, {0, .5, 1, 1}},                // K
        {{0, 0, 1, 0}, {.5, 0, .5, 1}},                              // T
        {{0, 0, 0, 1}, {1, 0, 1, 1}, {0, 1, 1, 1}},                  // U
        {{0, 0, 0, 1}, {0, 1, 1, 1}},                                // L
        {{0, 0, 0, 1}, {0, 0, 1, 0}, {0, .5, .5, .5}},               // F
    }};
    return strokes;
}

}  // namespace

std::vector<double> render_glyph(int label, std::size_t w, std::size_t h) {
    if (label < 0 || label > 9) throw DomainError("render_glyph: label must be 0-9");
    if (w < 3 || h < 3 || w % 2 == 0 || h % 2 == 0) throw DomainError("render_glyph: box sides must be odd and >= 3");
    std::vector<double> img(w * h, 0.0);
    for (const Stroke& s : glyph_strokes()[static_cast<std::size_t>(label)]) {
        const long x0 = std::lround(s.x0 * static_cast<double>(w - 1)), y0 = std::lround(s.y0 * static_cast<double>(h - 1));
        const long dx = std::lround(s.x1 * static_cast<double>(w - 1)) - x0;
        const long dy = std::lround(s.y1 * static_cast<double>(h - 1)) - y0;
        const long n = std::max(std::abs(dx), std::abs(dy));
        for (long k = 0; k <= n; ++k) {
            // lround is symmetric under negation, so mirrored strokes rasterize to mirrored pixels.
            const long x = x0 + (n == 0 ? 0 : std::lround(static_cast<double>(k * dx) / static_cast<double>(n)));
            const long y = y0 + (n == 0 ? 0 : std::lround(static_cast<double>(k * dy) / static_cast<double>(n)));
            img[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = 1.0;
        }
    }
    return img;
}

ImageSet synthetic_glyphs(std::size_t count, std::uint64_t seed, std::uint64_t first_index, const GlyphOptions& opt) {
    if (opt.size < 9) throw DomainError("synthetic_glyphs: image size must be at least 9");
    ImageSet set;
    set.rows = set.cols = opt.size;
    static constexpr std::array<std::size_t, 3> widths{5, 7, 9};
    static constexpr std::array<std::size_t, 2> heights{7, 9};
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(seed, Stream::Data, first_index + i);
        const int label = static_cast<int>(rng.below(10));
        const std::size_t gw = widths[rng.below(widths.size())];
        const std::size_t gh = heights[rng.below(heights.size())];
        const std::size_t ox = rng.below(opt.size - gw + 1);
        const std::size_t oy = rng.below(opt.size - gh + 1);
        const double ink = rng.uniform(0.6, 1.0);
        const std::vector<double> glyph = render_glyph(label, gw, gh);
        std::vector<double> img(opt.size * opt.size, 0.0);
        for (std::size_t y = 0; y < gh; ++y)
            for (std::size_t x = 0; x < gw; ++x) img[(oy + y) * opt.size + ox + x] = ink * glyph[y * gw + x];
        for (std::size_t d = 0; d < opt.distractors; ++d) img[rng.below(img.size())] = rng.uniform(0.4, 1.0);
        for (double& p : img) p = std::clamp(p + rng.normal(0.0, opt.pixel_noise), 0.0, 1.0);
        set.images.push_back(std::move(img));
        set.labels.push_back(label);
    }
    return set;
}

// ---------------------------------------------------------------- spinor point clouds

std::array<SpinorSample, 4> spinor_prototypes() {
    using std::numbers::pi;
    std::array<Vec3, kSpinorPoints> a{}, b{};
    for (std::size_t k = 0; k < kSpinorPoints; ++k) {
        const double t = pi / 2 + 2 * pi * static_cast<double>(k) / 3.0;
        a[k] = {std::cos(t), std::sin(t), 0.0};
    }
    // Second shape: half-size copy turned out of the plane.
    const UnitQuaternion turn = axis_angle({1.0, 1.0, 0.0}, pi / 3);
    for (std::size_t k = 0; k < kSpinorPoints; ++k) {
        const Vec3 r = quat_rotate(turn, a[k]);
        b[k] = {0.5 * r[0], 0.5 * r[1], 0.5 * r[2]};
    }
    const cd i{0.0, 1.0};
    const std::array<Spinor, kSpinorPoints> s1{Spinor{1.0, 0.0}, Spinor{0.8, 0.6}, Spinor{0.8, 0.6 * i}};
    const std::array<Spinor, kSpinorPoints> s2{Spinor{0.0, 1.0}, Spinor{0.6, 0.8}, Spinor{0.6 * i, 0.8}};
    const double r = 1.0 / std::sqrt(2.0);
    const std::array<Spinor, 4> targets{Spinor{1.0, 0.0}, Spinor{0.0, 1.0}, Spinor{r, r}, Spinor{r, r * i}};
    std::array<SpinorSample, 4> out{};
    for (int c = 0; c < 4; ++c) {
        out[c].positions = (c % 2 == 0) ? a : b;
        out[c].spinors = (c < 2) ? s1 : s2;
        out[c].target = targets[c];
        out[c].cls = c;
    }
    return out;
}

SpinorSample rotate_sample(const SpinorSample& s, const UnitQuaternion& q) {
    SpinorSample out = s;
    for (std::size_t k = 0; k < kSpinorPoints; ++k) {
        out.positions[k] = quat_rotate(q, s.positions[k]);
        out.spinors[k] = spinor_rotate(q, s.spinors[k]);
    }
    out.target = spinor_rotate(q, s.target);
    return out;
}

SpinorSample gen_spinor_sample(double sigma, std::uint64_t seed, std::uint64_t index, bool rotate) {
    if (!(sigma >= 0.0 && sigma <= kMaxSpinorNoise)) throw DomainError("gen_spinor_sample: noise must lie in [0, 0.4]");
    SpinorSample s = spinor_prototypes()[index % 4];
    s.noise = sigma;
    if (sigma > 0.0) {
        Rng rng(seed, Stream::Data, index);
        for (Vec3& x : s.positions)
            for (double& c : x) c += rng.normal(0.0, sigma);
    }
    if (rotate) {
        Rng rng(seed, Stream::Rotation, index);
        s = rotate_sample(s, random_quaternion(rng));
    }
    return s;
}

std::vector<SpinorSample> gen_spinor_dataset(double sigma, std::uint64_t seed, std::size_t count, bool rotate,
                                             std::uint64_t first_index) {
    std::vector<SpinorSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(gen_spinor_sample(sigma, seed, first_index + i, rotate));
    return out;
}

bool prototype_structure_holds() {
    const auto p = spinor_prototypes();
    auto same_pos = [](const SpinorSample& a, const SpinorSample& b) { return a.positions == b.positions; };
    auto same_spin = [](const SpinorSample& a, const SpinorSample& b) { return a.spinors == b.spinors; };
    bool ok = same_pos(p[0], p[2]) && same_pos(p[1], p[3]) && !same_pos(p[0], p[1]);
    ok = ok && same_spin(p[0], p[1]) && same_spin(p[2], p[3]) && !same_spin(p[0], p[2]);
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            // Targets must differ even up to sign.
            const double dm = std::abs(p[a].target[0] - p[b].target[0]) + std::abs(p[a].target[1] - p[b].target[1]);
            const double dp = std::abs(p[a].target[0] + p[b].target[0]) + std::abs(p[a].target[1] + p[b].target[1]);
            ok = ok && dm > 1e-6 && dp > 1e-6;
        }
    return ok;
}

}  // namespace projeq
