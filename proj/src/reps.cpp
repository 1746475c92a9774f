#include "projeq/reps.hpp"

#include <algorithm>

namespace projeq {

namespace {

void require_same_group(const LinearRep& a, const LinearRep& b, const char* op) {
    if (!same_group(*a.group(), *b.group())) throw GroupMismatch(std::string(op) + ": different groups");
}

void require_same_field(const LinearRep& a, const LinearRep& b, const char* op) {
    if (a.field() != b.field()) throw FieldError(std::string(op) + ": field mismatch");
}

Matrix permutation_matrix(const std::vector<std::size_t>& image, Field field) {
    // column j holds e_{image[j]}
    Matrix m(image.size(), image.size(), field);
    for (std::size_t j = 0; j < image.size(); ++j) m(image[j], j) = 1.0;
    return m;
}

}  // namespace

LinearRep::LinearRep(GroupPtr group, std::vector<Matrix> matrices, std::string name)
    : group_(std::move(group)), matrices_(std::move(matrices)), name_(std::move(name)) {
    const FiniteGroup& g = *group_;
    if (matrices_.size() != g.order()) throw DimensionError("LinearRep: one matrix per element required");
    dim_ = matrices_.front().rows();
    field_ = matrices_.front().field();
    if (dim_ == 0) throw DimensionError("LinearRep: dimension must be positive");
    if (g.order() * dim_ * dim_ > kMaxRepEntries) throw SizeError("LinearRep: table exceeds entry cap");
    for (const Matrix& m : matrices_) {
        if (m.rows() != dim_ || m.cols() != dim_) throw DimensionError("LinearRep: non-square or ragged table");
        if (m.field() != field_) throw FieldError("LinearRep: mixed fields in table");
    }
    constexpr double tol = 1e-10;
    if (max_abs_diff(matrices_[g.identity()], Matrix::identity(dim_, field_)) > tol)
        throw InvariantError("LinearRep: identity is not mapped to the identity matrix");
    for (std::size_t x = 0; x < g.order(); ++x) {
        const double scale_x = std::max(1.0, max_abs(matrices_[x]));
        for (std::size_t s : g.generators()) {
            const Matrix prod = matmul(matrices_[x], matrices_[s]);
            if (max_abs_diff(prod, matrices_[g.mul(x, s)]) > tol * scale_x * std::max(1.0, max_abs(matrices_[s])))
                throw InvariantError("LinearRep: not a homomorphism");
        }
    }
}

double homomorphism_defect(const LinearRep& r) {
    const FiniteGroup& g = *r.group();
    double worst = 0.0;
    for (std::size_t a = 0; a < g.order(); ++a)
        for (std::size_t b = 0; b < g.order(); ++b)
            worst = std::max(worst, max_abs_diff(matmul(r(a), r(b)), r(g.mul(a, b))));
    return worst;
}

LinearRep rep_trivial(const GroupPtr& g, std::size_t dim, Field field) {
    return LinearRep(g, std::vector<Matrix>(g->order(), Matrix::identity(dim, field)), "trivial");
}

LinearRep rep_from_character(const Character& e) {
    std::vector<Matrix> mats;
    for (const cd& v : e.values()) mats.emplace_back(1, 1, std::vector<cd>{v}, e.field());
    return LinearRep(e.group(), std::move(mats), "char:" + e.label());
}

LinearRep rep_cyclic_shift(std::size_t n, Field field) {
    GroupPtr g = make_cyclic(n);
    std::vector<Matrix> mats;
    for (std::size_t l = 0; l < n; ++l) {
        std::vector<std::size_t> image(n);
        for (std::size_t j = 0; j < n; ++j) image[j] = (j + l) % n;
        mats.push_back(permutation_matrix(image, field));
    }
    return LinearRep(g, std::move(mats), "shift" + std::to_string(n));
}

LinearRep rep_flip_image(std::size_t h, std::size_t w) {
    if (h == 0 || w == 0) throw DomainError("rep_flip_image: empty image");
    GroupPtr g = make_vierer();
    std::vector<Matrix> mats;
    for (std::size_t e = 0; e < 4; ++e) {
        const bool vflip = (e & 1U) != 0;
        const bool hflip = (e & 2U) != 0;
        std::vector<std::size_t> image(h * w);
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c)
                image[r * w + c] = (vflip ? h - 1 - r : r) * w + (hflip ? w - 1 - c : c);
        mats.push_back(permutation_matrix(image, Field::Real));
    }
    return LinearRep(g, std::move(mats), "flip" + std::to_string(h) + "x" + std::to_string(w));
}

LinearRep rep_permutation_tensor(std::size_t n, std::size_t k, Field field) {
    if (k == 0) throw DomainError("rep_permutation_tensor: k must be positive");
    std::size_t dim = 1;
    for (std::size_t i = 0; i < k; ++i) {
        dim *= n;
        if (dim > kMaxTensorDim) throw SizeError("rep_permutation_tensor: n^k exceeds 4096");
    }
    GroupPtr g = make_symmetric(n);
    std::vector<Matrix> mats;
    std::vector<std::size_t> digits(k);
    for (std::size_t s = 0; s < g->order(); ++s) {
        const auto perm = permutation_of(n, s);
        std::vector<std::size_t> image(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            std::size_t rest = j;
            for (std::size_t a = k; a-- > 0;) {
                digits[a] = rest % n;
                rest /= n;
            }
            std::size_t out = 0;
            for (std::size_t a = 0; a < k; ++a) out = out * n + perm[digits[a]];
            image[j] = out;
        }
        mats.push_back(permutation_matrix(image, field));
    }
    return LinearRep(g, std::move(mats), "perm" + std::to_string(n) + "^" + std::to_string(k));
}

LinearRep rep_to_complex(const LinearRep& r) {
    if (r.field() == Field::Complex) return r;
    std::vector<Matrix> mats;
    for (const Matrix& m : r.matrices()) mats.push_back(m.to_complex());
    return LinearRep(r.group(), std::move(mats), r.name());
}

LinearRep rep_twist(const LinearRep& r, const Character& e) {
    if (!same_group(*r.group(), *e.group())) throw GroupMismatch("rep_twist: different groups");
    const LinearRep base = e.field() == Field::Complex ? rep_to_complex(r) : r;
    std::vector<Matrix> mats;
    for (std::size_t g = 0; g < base.matrices().size(); ++g) mats.push_back(scale(base(g), e(g)));
    return LinearRep(r.group(), std::move(mats), r.name() + "*" + e.label());
}

LinearRep rep_hom(const LinearRep& rv, const LinearRep& rw) {
    require_same_group(rv, rw, "rep_hom");
    require_same_field(rv, rw, "rep_hom");
    const FiniteGroup& g = *rv.group();
    std::vector<Matrix> mats;
    for (std::size_t x = 0; x < g.order(); ++x) mats.push_back(kron(rw(x), transpose(rv(g.inverse(x)))));
    return LinearRep(rv.group(), std::move(mats), "hom(" + rv.name() + "," + rw.name() + ")");
}

LinearRep rep_direct_sum(const LinearRep& a, const LinearRep& b) {
    require_same_group(a, b, "rep_direct_sum");
    require_same_field(a, b, "rep_direct_sum");
    std::vector<Matrix> mats;
    for (std::size_t x = 0; x < a.matrices().size(); ++x) mats.push_back(block_diag(a(x), b(x)));
    return LinearRep(a.group(), std::move(mats), a.name() + "+" + b.name());
}

LinearRep rep_tensor(const LinearRep& a, const LinearRep& b) {
    require_same_group(a, b, "rep_tensor");
    require_same_field(a, b, "rep_tensor");
    std::vector<Matrix> mats;
    for (std::size_t x = 0; x < a.matrices().size(); ++x) mats.push_back(kron(a(x), b(x)));
    return LinearRep(a.group(), std::move(mats), a.name() + "x" + b.name());
}

LinearRep rep_restrict(const LinearRep& r, const Subgroup& sub) {
    if (!same_group(*r.group(), *sub.parent())) throw GroupMismatch("rep_restrict: subgroup of another group");
    std::vector<Matrix> mats;
    for (std::size_t m : sub.members()) mats.push_back(r(m));
    return LinearRep(sub.as_group(), std::move(mats), r.name() + "|sub");
}

}  // namespace projeq
