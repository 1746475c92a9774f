#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "projeq/su2.hpp"

namespace projeq {

// ---------------------------------------------------------------- IDX files

enum class IdxKind { Images, Labels };

/// Raw contents of an unsigned-byte IDX file.
struct IdxArray {
    IdxKind kind = IdxKind::Images;
    std::vector<std::size_t> dims;
    std::vector<std::uint8_t> bytes;

    /// Payload divided by 255.
    std::vector<double> scaled() const;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
/// Largest accepted element count.
inline constexpr std::size_t kMaxIdxElements = std::size_t{1} << 31;

/// Throws IdxMagicError, IdxTruncatedError or IdxDimensionError.
IdxArray parse_idx(std::span<const std::uint8_t> bytes);
/// Throws DataError when the file cannot be opened.
IdxArray read_idx(const std::string& path);

/// Images with one label each, pixels in [0, 1], row-major.
struct ImageSet {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::vector<double>> images;
    std::vector<int> labels;

    std::size_t size() const { return images.size(); }
};

/// Pairs an image file with a label file; counts must agree.
ImageSet load_idx_pair(const std::string& image_path, const std::string& label_path, std::size_t limit = 0);

// ---------------------------------------------------------------- flip task

/// Label of the extra class for images whose flip changes their meaning.
inline constexpr int kNanClass = 10;
inline constexpr std::size_t kFlipClasses = 11;
/// Per-class loss weights of the flip task.
inline constexpr std::array<double, kFlipClasses> kFlipClassWeights{1, 1, 1, 1.5, 1.5, 1.5, 1.5, 1.5, 3, 3, 1};

/// Horizontal mirrors left-right (element (0,1)); vertical mirrors
/// top-bottom (element (1,0)).
enum class FlipChoice { None, Horizontal, Vertical };

/// Reverse rows (element (1,0)) and/or columns (element (0,1)) of an h x w
/// image, g indexed as in make_vierer().
std::vector<double> flip_image(const std::vector<double>& img, std::size_t h, std::size_t w, std::size_t g);

/// Index of the flip in make_vierer() order.
std::size_t flip_element(FlipChoice f);
const char* to_string(FlipChoice f);

/// 0-2 keep their label, 3-5 become NaN under a horizontal flip, 6-7 under
/// a vertical flip, 8-9 under either.
int remap_flip_label(int label, FlipChoice f);

struct FlipSample {
    std::vector<double> image;
    std::size_t rows = 0;
    std::size_t cols = 0;
    int original = 0;
    FlipChoice flip = FlipChoice::None;
    int label = 0;
};

/// Sample i draws its flip uniformly from {none, horizontal, vertical} with
/// a generator keyed by (seed, first_index + i).
std::vector<FlipSample> gen_flip_dataset(const ImageSet& source, std::uint64_t seed, std::uint64_t first_index = 0);

/// Glyph classes 0-9: H + O (symmetric under both flips), E C K (symmetric
/// top-bottom only), T U (left-right only), L F (neither).
inline constexpr std::array<const char*, 10> kGlyphNames{"H", "+", "O", "E", "C", "K", "T", "U", "L", "F"};

struct GlyphOptions {
    std::size_t size = 16;
    double pixel_noise = 0.05;
    std::size_t distractors = 1;
};

/// Clean stroke rendering of one glyph class in a w x h box (odd sizes keep
/// the symmetric glyphs exactly symmetric).
std::vector<double> render_glyph(int label, std::size_t w, std::size_t h);

/// Glyph images at random sizes and translations with pixel noise and
/// distractor pixels; sample i is a pure function of (seed, first_index + i).
ImageSet synthetic_glyphs(std::size_t count, std::uint64_t seed, std::uint64_t first_index = 0,
                          const GlyphOptions& opt = {});

// ---------------------------------------------------------------- spinor point clouds

inline constexpr std::size_t kSpinorPoints = 3;
inline constexpr double kMaxSpinorNoise = 0.4;

struct SpinorSample {
    std::array<Vec3, kSpinorPoints> positions{};
    std::array<Spinor, kSpinorPoints> spinors{};
    Spinor target{};
    int cls = 0;
    double noise = 0.0;
};

/// The four clean prototypes. Classes 0 and 2 share positions, as do 1 and
/// 3; classes 0 and 1 share spinor features, as do 2 and 3.
std::array<SpinorSample, 4> spinor_prototypes();

/// Applies x -> R x to positions and s -> U s to spinors and target.
SpinorSample rotate_sample(const SpinorSample& s, const UnitQuaternion& q);

/// Sample of class index % 4 with position noise sigma, optionally under a
/// uniformly random rotation. Throws DomainError unless 0 <= sigma <= 0.4.
SpinorSample gen_spinor_sample(double sigma, std::uint64_t seed, std::uint64_t index, bool rotate);
std::vector<SpinorSample> gen_spinor_dataset(double sigma, std::uint64_t seed, std::size_t count, bool rotate,
                                             std::uint64_t first_index = 0);

/// Checks the shared-position / shared-spinor structure of the prototypes
/// and that all targets differ.
bool prototype_structure_holds();

}  // namespace projeq
