#include "projeq/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "projeq/data.hpp"
#include "projeq/errors.hpp"
#include "projeq/invariants.hpp"
#include "projeq/network.hpp"
#include "projeq/spinor_net.hpp"
#include "projeq/su2.hpp"
#include "projeq/vierer.hpp"

namespace projeq {

CheckResult make_check(std::string suite, std::string name, std::string reference, double deviation, double tolerance,
                       std::string detail) {
    CheckResult c{std::move(suite), std::move(name), std::move(reference), deviation, tolerance, false, std::move(detail)};
    c.passed = std::isfinite(deviation) && deviation <= tolerance;
    return c;
}

VerifyScope parse_verify_scope(const std::string& s) {
    if (s == "all") return VerifyScope::All;
    if (s == "groups") return VerifyScope::Groups;
    if (s == "invariants") return VerifyScope::Invariants;
    if (s == "su2") return VerifyScope::Su2;
    if (s == "network") return VerifyScope::Network;
    throw DomainError("unknown verify scope '" + s + "' (expected all, groups, invariants, su2 or network)");
}

std::string to_string(VerifyScope s) {
    switch (s) {
        case VerifyScope::All: return "all";
        case VerifyScope::Groups: return "groups";
        case VerifyScope::Invariants: return "invariants";
        case VerifyScope::Su2: return "su2";
        case VerifyScope::Network: return "network";
    }
    return "?";
}

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

nlohmann::json VerifyReport::to_json() const {
    auto arr = nlohmann::json::array();
    std::size_t failed = 0;
    for (const CheckResult& c : checks) {
        failed += c.passed ? 0 : 1;
        nlohmann::json j{{"suite", c.suite},         {"name", c.name},           {"reference", c.reference},
                         {"deviation", c.deviation}, {"tolerance", c.tolerance}, {"passed", c.passed}};
        if (!c.detail.empty()) j["detail"] = c.detail;
        arr.push_back(std::move(j));
    }
    return {{"scope", to_string(scope)}, {"passed", failed == 0}, {"total", checks.size()}, {"failed", failed},
            {"checks", arr}};
}

namespace {

Vec random_vec(Rng& rng, std::size_t n, Field f) {
    Vec v(n);
    for (cd& x : v) x = f == Field::Real ? cd{rng.normal(), 0.0} : cd{rng.normal(), rng.normal()};
    return v;
}

Vec random_combination(Rng& rng, const std::vector<Vec>& basis, Field f) {
    Vec v(basis.front().size());
    for (const Vec& b : basis) v = axpy(f == Field::Real ? cd{rng.normal(), 0.0} : cd{rng.normal(), rng.normal()}, b, v);
    return v;
}

double factorial(std::size_t n) { return n <= 1 ? 1.0 : double(n) * factorial(n - 1); }

bool is_even_permutation(const std::vector<std::size_t>& p) {
    std::size_t inversions = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j) inversions += p[i] > p[j] ? 1 : 0;
    return inversions % 2 == 0;
}

struct NamedRep {
    std::string name;
    LinearRep rep;
};

/// The three representations of the oracle and commutator checks.
std::vector<NamedRep> oracle_reps() {
    return {{"Z4 shift on C^4", rep_cyclic_shift(4, Field::Complex)},
            {"Z2^2 flips on 3x3 filters", rep_flip_image(3, 3)},
            {"S4 on (R^4)^(x)2", rep_permutation_tensor(4, 2)}};
}

double quat_max_diff(const UnitQuaternion& a, const UnitQuaternion& b) { return quat_distance(a, b); }

double rotation_diff(const Rotation3& a, const Rotation3& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
    return d;
}

Matrix block_of_wigners(const CGTable& t, const UnitQuaternion& q) {
    const std::size_t n = t.c.rows();
    Matrix out(n, n, Field::Complex);
    for (const CGBlock& b : t.blocks) {
        const Matrix w = wigner(b.level, q);
        for (std::size_t i = 0; i < w.rows(); ++i)
            for (std::size_t j = 0; j < w.cols(); ++j) out(b.offset + i, b.offset + j) = w(i, j);
    }
    return out;
}

/// Largest |row/|row| - expected/|expected||, entrywise.
double normalized_row_diff(const Vec& row, const std::vector<double>& expected) {
    double nr = norm(row), ne = 0.0;
    for (double x : expected) ne += x * x;
    ne = std::sqrt(ne);
    double d = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) d = std::max(d, std::abs(row[i] / nr - cd{expected[i] / ne, 0.0}));
    return d;
}

nn::Tensor random_images(Rng& rng, std::size_t b, std::size_t h, std::size_t w) {
    nn::Tensor t({b, h, w});
    for (double& x : t.data) x = rng.normal();
    return t;
}

nn::Tensor flip_batch(const nn::Tensor& images, std::size_t g) {
    const std::size_t b = images.dim(0), h = images.dim(1), w = images.dim(2);
    nn::Tensor out = images;
    for (std::size_t i = 0; i < b; ++i) {
        std::vector<double> img(images.data.begin() + static_cast<std::ptrdiff_t>(i * h * w),
                                images.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * h * w));
        const std::vector<double> f = flip_image(img, h, w, g);
        std::copy(f.begin(), f.end(), out.data.begin() + static_cast<std::ptrdiff_t>(i * h * w));
    }
    return out;
}

/// max |F(gx)[s] - e_s(g) flip_g(F(x)[s])| over every layer, slot, channel and image.
double vierer_slot_defect(FlipNet& net, const nn::Tensor& images, std::size_t g) {
    const auto plain = net.slot_features(images);
    const auto moved = net.slot_features(flip_batch(images, g));
    const ViererFilterBank& bank = vierer_filter_bank();
    double worst = 0.0;
    for (std::size_t l = 0; l < plain.size(); ++l) {
        const nn::Tensor& p = plain[l];
        const std::size_t s = p.dim(0), c = p.dim(1), b = p.dim(2), h = p.dim(3), w = p.dim(4);
        nn::Tensor maps({s * c * b, h, w}, p.data);
        const nn::Tensor flipped = flip_batch(maps, g);
        for (std::size_t si = 0; si < s; ++si) {
            const double e = s == 1 ? 1.0 : bank.table.data[si * 4 + g];
            const std::size_t block = c * b * h * w;
            for (std::size_t k = 0; k < block; ++k)
                worst = std::max(worst, std::abs(moved[l].data[si * block + k] - e * flipped.data[si * block + k]));
        }
    }
    return worst;
}

CharNet random_z3_net(Rng& rng, std::size_t layers) {
    const LinearRep r = rep_cyclic_shift(3, Field::Complex);
    CharNet net;
    net.nonlinearity = Nonlinearity::PhaseTanh;
    for (std::size_t k = 0; k < layers; ++k) {
        net.layers.emplace_back(r, r);
        net.layers.back().randomize(rng);
    }
    return net;
}

}  // namespace

ProjectiveOracleResult projective_oracle(const LinearRep& r, std::size_t random_samples, std::uint64_t seed, double tol) {
    Rng rng(seed, Stream::Verify, 3);
    const std::vector<InvariantBasis> spaces = projective_invariants(r);
    std::vector<Vec> candidates;
    for (std::size_t i = 0; i < r.dim(); ++i) {
        Vec e(r.dim());
        e[i] = 1.0;
        candidates.push_back(e);
    }
    for (std::size_t k = 0; k < random_samples; ++k) candidates.push_back(random_vec(rng, r.dim(), r.field()));
    for (const InvariantBasis& u : spaces)
        if (u.dim())
            for (int k = 0; k < 3; ++k) candidates.push_back(random_combination(rng, u.basis, r.field()));
    for (std::size_t a = 0; a < spaces.size(); ++a)
        for (std::size_t b = a + 1; b < spaces.size(); ++b)
            if (spaces[a].dim() && spaces[b].dim())
                candidates.push_back(axpy(1.0, random_combination(rng, spaces[a].basis, r.field()),
                                          random_combination(rng, spaces[b].basis, r.field())));
    ProjectiveOracleResult res;
    for (const Vec& x : candidates) {
        ++res.candidates;
        const bool solves = proportionality_defect(r, x) < tol;
        const Vec unit = scaled(x, 1.0 / norm(x));
        bool in_union = false;
        for (const InvariantBasis& u : spaces)
            if (u.dim() && residual_norm(unit, u.basis) < tol) in_union = true;
        res.solutions += solves ? 1 : 0;
        res.mismatches += solves != in_union ? 1 : 0;
    }
    for (const InvariantBasis& u : spaces)
        for (const Vec& v : u.basis) res.worst_invariant_defect = std::max(res.worst_invariant_defect, proportionality_defect(r, v));
    return res;
}

std::vector<CheckResult> check_character_tables() {
    std::vector<CheckResult> out;
    {
        const auto chars = character_group(make_vierer(), Field::Real);
        const double expected[4][4] = {{1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}};
        double dev = chars.size() == 4 ? 0.0 : 1.0;
        for (std::size_t e = 0; e < std::min<std::size_t>(chars.size(), 4); ++e)
            for (std::size_t g = 0; g < 4; ++g) dev = std::max(dev, std::abs(chars[e](g) - cd{expected[e][g], 0.0}));
        out.push_back(make_check("groups", "Z2^2 character table, rows ++ +- -+ --", "character-table:vierer", dev, 0.0));
    }
    {
        const auto chars = character_group(make_cyclic(3), Field::Complex);
        const cd alpha = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
        double dev = chars.size() == 3 ? 0.0 : 1.0;
        std::vector<bool> seen(3, false);
        for (const Character& c : chars) {
            double best = 1e300;
            std::size_t at = 0;
            for (std::size_t k = 0; k < 3; ++k) {
                double d = 0.0;
                for (std::size_t g = 0; g < 3; ++g) d = std::max(d, std::abs(c(g) - std::pow(alpha, double(k * g))));
                if (d < best) best = d, at = k;
            }
            if (seen[at]) dev = std::max(dev, 1.0);
            seen[at] = true;
            dev = std::max(dev, best);
        }
        out.push_back(make_check("groups", "Z3 over C gives {1, a, a^2}, a = exp(2 pi i / 3)", "character-table:cyclic", dev,
                                 1e-12));
    }
    for (std::size_t n : {3, 4, 5}) {
        const GroupPtr sn = make_symmetric(n);
        const auto chars = character_group(sn, Field::Real);
        const Character sgn = sign_character(sn, n);
        double dev = chars.size() == 2 ? 0.0 : 1.0;
        if (chars.size() == 2) {
            dev = std::max(dev, chars[0].is_trivial() ? 0.0 : 1.0);
            for (std::size_t g = 0; g < sn->order(); ++g) dev = std::max(dev, std::abs(chars[1](g) - sgn(g)));
        }
        out.push_back(make_check("groups", "S" + std::to_string(n) + " characters are {1, sgn}",
                                 "character-table:symmetric", dev, 0.0, std::to_string(chars.size()) + " characters"));
    }
    return out;
}

std::vector<CheckResult> check_commutator_subgroups() {
    std::vector<CheckResult> out;
    for (std::size_t n : {3, 4, 5}) {
        const GroupPtr sn = make_symmetric(n);
        const Subgroup c = commutator_subgroup(sn);
        double mismatches = std::abs(double(c.order()) - factorial(n) / 2.0);
        for (std::size_t g = 0; g < sn->order(); ++g)
            mismatches += c.contains(g) != is_even_permutation(permutation_of(n, g)) ? 1.0 : 0.0;
        out.push_back(make_check("groups", "{S" + std::to_string(n) + ", S" + std::to_string(n) + "} = A" + std::to_string(n),
                                 "commutator-subgroup:alternating", mismatches, 0.0,
                                 "order " + std::to_string(c.order())));
    }
    return out;
}

std::vector<CheckResult> check_projective_oracle(std::uint64_t seed) {
    std::vector<CheckResult> out;
    std::uint64_t k = 0;
    for (const NamedRep& nr : oracle_reps()) {
        const ProjectiveOracleResult res = projective_oracle(nr.rep, 20, seed + k++, 1e-8);
        out.push_back(make_check("invariants", nr.name + ": twisted-invariant vectors solve the projective problem",
                                 "projective-invariance:union-of-twisted-spaces", res.worst_invariant_defect, 1e-8));
        out.push_back(make_check("invariants", nr.name + ": projective solutions lie in the union of twisted spaces",
                                 "projective-invariance:union-of-twisted-spaces", double(res.mismatches), 0.0,
                                 std::to_string(res.candidates) + " candidates, " + std::to_string(res.solutions) +
                                     " solutions"));
    }
    return out;
}

std::vector<CheckResult> check_commutator_invariants() {
    std::vector<CheckResult> out;
    for (const NamedRep& nr : oracle_reps()) {
        const LinearRep rc = rep_to_complex(nr.rep);
        const InvariantBasis uhh = commutator_invariants(rc, 1e-8);
        std::size_t sum = 0;
        for (const InvariantBasis& u : projective_invariants(rc, 1e-8)) sum += u.dim();
        out.push_back(make_check("invariants", nr.name + ": over C, dim U_HH = sum of dim U^e",
                                 "commutator-invariants:direct-sum", std::abs(double(uhh.dim()) - double(sum)), 0.0,
                                 std::to_string(uhh.dim()) + " vs " + std::to_string(sum)));
    }
    const std::vector<NamedRep> real_reps{{"Z4 shift on R^4", rep_cyclic_shift(4, Field::Real)},
                                          {"Z2^2 flips on 3x3 filters", rep_flip_image(3, 3)},
                                          {"S4 on (R^4)^(x)2", rep_permutation_tensor(4, 2)}};
    for (const NamedRep& nr : real_reps) {
        const InvariantBasis uhh = commutator_invariants(nr.rep, 1e-8);
        double worst = 0.0;
        for (const InvariantBasis& u : projective_invariants(nr.rep, 1e-8))
            for (const Vec& v : u.basis) worst = std::max(worst, residual_norm(v, uhh.basis));
        out.push_back(make_check("invariants", nr.name + ": over R, every U^e lies in U_HH",
                                 "commutator-invariants:containment", worst, 1e-8));
    }
    return out;
}

std::vector<CheckResult> check_sign_tensors() {
    std::vector<CheckResult> out;
    const std::vector<std::pair<std::size_t, std::size_t>> trivial{{4, 2}, {5, 2}, {5, 3}};
    for (const auto& [n, k] : trivial) {
        const LinearRep r = rep_permutation_tensor(n, k);
        const InvariantBasis u = invariant_basis(r, sign_character(r.group(), n));
        out.push_back(make_check("invariants",
                                 "U^sgn trivial for n=" + std::to_string(n) + ", k=" + std::to_string(k),
                                 "sign-invariants:vanish-for-large-n", double(u.dim()), 0.0));
    }
    for (const auto& [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 2}, {4, 3}}) {
        const SignTensorReport rep = verify_sign_tensor(n, k);
        double dev = rep.max_defect;
        if (rep.dim_sgn == 0) dev = std::max(dev, 1.0);
        dev = std::max(dev, rep.membership);
        out.push_back(make_check("invariants",
                                 "constructed sign tensor transforms by sgn for n=" + std::to_string(n) +
                                     ", k=" + std::to_string(k),
                                 "sign-invariants:tight-bound", dev, 1e-9,
                                 "dim U^sgn = " + std::to_string(rep.dim_sgn)));
    }
    return out;
}

std::vector<CheckResult> check_vierer_filter_dims() {
    const LinearRep r = rep_flip_image(3, 3);
    const auto chars = character_group(r.group(), Field::Real);
    const std::size_t expected[4] = {4, 2, 2, 1};
    double dim_dev = 0.0, agree = 0.0;
    std::string dims;
    std::size_t total = 0;
    for (std::size_t e = 0; e < chars.size(); ++e) {
        const InvariantBasis a = invariant_basis(r, chars[e]);
        const InvariantBasis b = invariant_basis_nullspace(r, chars[e]);
        dim_dev = std::max({dim_dev, std::abs(double(a.dim()) - double(expected[e])),
                            std::abs(double(b.dim()) - double(expected[e]))});
        if (!subspace_equal(a.basis, b.basis, 1e-9)) agree += 1.0;
        dims += (e ? "," : "") + std::to_string(a.dim());
        total += a.dim();
    }
    return {make_check("invariants", "Z2^2 on 3x3 filters has twisted dimensions (4,2,2,1)", "filter-bases:vierer",
                       std::max(dim_dev, std::abs(double(total) - 9.0)), 0.0, "dims " + dims),
            make_check("invariants", "projector and nullspace solvers agree on the filter spaces",
                       "filter-bases:solver-agreement", agree, 0.0)};
}

std::vector<CheckResult> check_projector_laws() {
    std::vector<CheckResult> out;
    const LinearRep r = rep_to_complex(rep_permutation_tensor(3, 2));
    const auto chars = character_group(r.group(), Field::Complex);
    std::vector<Matrix> ps;
    for (const Character& c : chars) ps.push_back(isotypic_projector(r, c));
    double idem = 0.0, orth = 0.0;
    Matrix sum = Matrix::zeros(r.dim(), r.dim(), Field::Complex);
    for (std::size_t a = 0; a < ps.size(); ++a) {
        idem = std::max(idem, max_abs_diff(matmul(ps[a], ps[a]), ps[a]));
        for (std::size_t b = 0; b < ps.size(); ++b)
            if (a != b) orth = std::max(orth, max_abs(matmul(ps[a], ps[b])));
        sum = add(sum, ps[a]);
    }
    const InvariantBasis uhh = commutator_invariants(r);
    const Matrix q = uhh.dim() ? matmul(from_columns(uhh.basis, Field::Complex),
                                        conj_transpose(from_columns(uhh.basis, Field::Complex)))
                               : Matrix::zeros(r.dim(), r.dim(), Field::Complex);
    out.push_back(make_check("invariants", "isotypic projectors are idempotent", "isotypic-projector:idempotent", idem, 1e-10));
    out.push_back(make_check("invariants", "projectors of distinct characters annihilate each other",
                             "isotypic-projector:orthogonal", orth, 1e-9));
    out.push_back(make_check("invariants", "sum of isotypic projectors is the projection onto U_HH",
                             "commutator-invariants:direct-sum", max_abs_diff(sum, q), 1e-9));
    const LinearRep z4 = rep_cyclic_shift(4, Field::Complex);
    out.push_back(make_check("invariants", "a non-unit-modulus twist has no solutions", "twisted-invariance:unit-modulus",
                             double(twisted_nullspace(z4, std::vector<cd>(z4.group()->order(), cd{2.0, 0.0})).size()), 0.0));
    return out;
}

std::vector<CheckResult> check_su2(std::uint64_t seed) {
    std::vector<CheckResult> out;
    Rng rng(seed, Stream::Verify, 7);
    const std::string s = "su2";
    {
        double dev = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const auto a = random_quaternion(rng), b = random_quaternion(rng), c = random_quaternion(rng);
            dev = std::max(dev, quat_max_diff(quat_mul(quat_mul(a, b), c), quat_mul(a, quat_mul(b, c))));
        }
        const UnitQuaternion e1(0.0, {1.0, 0.0, 0.0});
        dev = std::max(dev, quat_max_diff(quat_mul(e1, e1), UnitQuaternion(-1.0, {0, 0, 0})));
        out.push_back(make_check(s, "quaternion product is associative; (0,e1)^2 = (-1,0)", "su2:quaternion-group", dev, 1e-12));
    }
    {
        double dev = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const auto a = random_quaternion(rng), b = random_quaternion(rng);
            dev = std::max(dev, rotation_diff(quat_to_rotation(quat_mul(a, b)),
                                              rotation_compose(quat_to_rotation(a), quat_to_rotation(b))));
        }
        out.push_back(make_check(s, "covering map is a homomorphism", "su2:covering-map", dev, 1e-10));
    }
    {
        double dev = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const auto q = random_quaternion(rng);
            const Rotation3 r = quat_to_rotation(q);
            dev = std::max(dev, rotation_diff(r, quat_to_rotation(-q)));
            const UnitQuaternion back = rotation_to_quat(r);
            dev = std::max(dev, std::min(quat_max_diff(back, q), quat_max_diff(back, -q)));
            dev = std::max(dev, rotation_diff(quat_to_rotation(back), r));
        }
        out.push_back(make_check(s, "exactly q and -q cover each rotation", "su2:double-cover", dev, 1e-9));
    }
    {
        double dev = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const auto q = random_quaternion(rng);
            const auto r = quat_sqrt(q);
            dev = std::max(dev, quat_max_diff(quat_mul(r, r), q));
        }
        out.push_back(make_check(s, "quaternion square roots square back", "su2:square-root", dev, 1e-12));
    }
    {
        double dev = 0.0;
        std::vector<UnitQuaternion> qs{UnitQuaternion::identity(), UnitQuaternion(-1.0, {0, 0, 0})};
        for (int i = 0; i < 1000; ++i) qs.push_back(random_quaternion(rng));
        for (const auto& q : qs) {
            const auto [r, t] = commutator_decompose(q);
            const auto c = quat_mul(quat_mul(r, t), quat_mul(quat_inverse(r), quat_inverse(t)));
            dev = std::max(dev, quat_max_diff(c, q));
        }
        out.push_back(make_check(s, "every unit quaternion is a commutator r s r^-1 s^-1", "su2:perfect-group", dev, 1e-10,
                                 std::to_string(qs.size()) + " elements"));
    }
    {
        double hom = 0.0, sign = 0.0;
        for (int twice = 0; twice <= 4; ++twice) {
            const IrrepLevel l(twice);
            for (int i = 0; i < 100; ++i) {
                const auto a = random_quaternion(rng), b = random_quaternion(rng);
                hom = std::max(hom, max_abs_diff(wigner(l, quat_mul(a, b)), matmul(wigner(l, a), wigner(l, b))));
                const Matrix wa = wigner(l, a);
                sign = std::max(sign, max_abs_diff(wigner(l, -a), l.is_integer() ? wa : scale(wa, -1.0)));
            }
        }
        out.push_back(make_check(s, "Wigner matrices are homomorphisms for l <= 2", "su2:irreps", hom, 1e-9));
        out.push_back(make_check(s, "half-integer irreps change sign at -q, integer irreps do not", "su2:projective-sign",
                                 sign, 1e-12));
    }
    {
        double block = 0.0, unit = 0.0;
        for (int a = 0; a <= 4; ++a)
            for (int b = 0; a + b <= 4; ++b) {
                const CGTable& t = clebsch_gordan(IrrepLevel(a), IrrepLevel(b));
                unit = std::max(unit, max_abs_diff(matmul(t.c, conj_transpose(t.c)), Matrix::identity(t.c.rows(), Field::Complex)));
                for (int i = 0; i < 100; ++i) {
                    const auto q = random_quaternion(rng);
                    const Matrix conj = matmul(matmul(t.c, kron(wigner(t.l1, q), wigner(t.l2, q))), conj_transpose(t.c));
                    block = std::max(block, max_abs_diff(conj, block_of_wigners(t, q)));
                }
            }
        out.push_back(make_check(s, "Clebsch-Gordan matrices are unitary", "su2:clebsch-gordan", unit, 1e-10));
        out.push_back(make_check(s, "Clebsch-Gordan matrices block-diagonalize every supported product",
                                 "su2:clebsch-gordan", block, 1e-8));
    }
    {
        const CGTable& t = clebsch_gordan(IrrepLevel(2), IrrepLevel(2));
        double dev = normalized_row_diff(t.c.row_vec(0), {1, 0, 0, 0, 1, 0, 0, 0, 1});
        const std::vector<std::vector<double>> cross{{0, 0, 0, 0, 0, 1, 0, -1, 0},
                                                     {0, 0, -1, 0, 0, 0, 1, 0, 0},
                                                     {0, 1, 0, -1, 0, 0, 0, 0, 0}};
        for (std::size_t r = 0; r < 3; ++r) dev = std::max(dev, normalized_row_diff(t.c.row_vec(1 + r), cross[r]));
        out.push_back(make_check(s, "vector x vector rows give the dot and cross products", "su2:vector-products", dev,
                                 1e-12));
    }
    {
        // Continuous loop of rotations about z through 2 pi.
        double step = 0.0;
        Matrix prev = wigner(IrrepLevel(1), UnitQuaternion::identity());
        for (int k = 1; k <= 100; ++k) {
            const Matrix w = wigner(IrrepLevel(1), axis_angle({0, 0, 1}, 2.0 * std::numbers::pi * k / 100.0));
            step = std::max(step, max_abs_diff(w, prev));
            prev = w;
        }
        const double end = max_abs_diff(prev, scale(Matrix::identity(2, Field::Complex), -1.0));
        out.push_back(make_check(s, "spinor matrices along a closed 2 pi loop end at -I", "su2:no-continuous-sign", end, 1e-6,
                                 "largest step " + std::to_string(step)));
    }
    {
        double dev = 0.0, scalar = 0.0;
        for (int i = 0; i < 100; ++i) {
            const auto q = random_quaternion(rng);
            const Spinor sp{cd{rng.normal(), rng.normal()}, cd{rng.normal(), rng.normal()}};
            const SpinorSquare a = spinor_square(sp), b = spinor_square(spinor_rotate(q, sp));
            const Rotation3 r = quat_to_rotation(q);
            for (std::size_t row = 0; row < 3; ++row) {
                cd x{0, 0};
                for (std::size_t c = 0; c < 3; ++c) x += r(row, c) * a.vector[c];
                dev = std::max(dev, std::abs(x - b.vector[row]));
            }
            scalar = std::max(scalar, std::abs(a.scalar));
            const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
            const auto y = spherical_harmonic(1, r.apply(v));
            const auto y0 = spherical_harmonic(1, v);
            for (std::size_t row = 0; row < 3; ++row) {
                double x = 0.0;
                for (std::size_t c = 0; c < 3; ++c) x += r(row, c) * y0[c];
                dev = std::max(dev, std::abs(x - y[row]));
            }
        }
        out.push_back(make_check(s, "spinor squares and directions rotate with the vector irrep", "su2:equivariant-filters",
                                 dev, 1e-9));
        out.push_back(make_check(s, "the scalar part of s (x) s vanishes", "su2:spinor-square", scalar, 1e-12));
    }
    return out;
}

std::vector<CheckResult> check_slot_equivariance(std::uint64_t seed) {
    std::vector<CheckResult> out;
    {
        Rng rng(seed, Stream::Verify, 11);
        FlipNetConfig cfg;
        cfg.model = VisionModel::Vierer;
        cfg.widths = {3, 3, 3, 4};
        FlipNet net(cfg, seed + 1);
        const nn::Tensor images = random_images(rng, 25, 8, 8);
        double dev = 0.0;
        for (std::size_t g = 0; g < 4; ++g) dev = std::max(dev, vierer_slot_defect(net, images, g));
        out.push_back(make_check("network", "ViererNet slots: v^e(g x) = e(g) g v^e(x) at every layer",
                                 "char-indexed-features:projective-equivariance", dev, 1e-8, "100 (x, g) pairs"));
    }
    {
        Rng rng(seed, Stream::Verify, 12);
        const CharNet net = random_z3_net(rng, 3);
        const LinearRep r = rep_cyclic_shift(3, Field::Complex);
        double dev = 0.0;
        std::size_t pairs = 0;
        while (pairs < 100) {
            const Vec x = random_vec(rng, 3, Field::Complex);
            for (std::size_t g = 0; g < 3 && pairs < 100; ++g, ++pairs)
                dev = std::max(dev, slot_equivariance_defect(net, r, {r, r, r}, x, g));
        }
        out.push_back(make_check("network", "Z3 net slots: v^e(g x) = e(g) g v^e(x) at every layer",
                                 "char-indexed-features:projective-equivariance", dev, 1e-8, "100 (x, g) pairs"));
    }
    return out;
}

std::vector<CheckResult> check_network_extras(std::uint64_t seed) {
    std::vector<CheckResult> out;
    Rng rng(seed, Stream::Verify, 13);
    {
        FlipNetConfig cfg;
        cfg.widths = {2, 3, 2, 4};
        FlipNet net(cfg, seed + 2);
        const nn::Tensor images = random_images(rng, 3, 7, 9);
        const auto fast = net.slot_features(images);
        const auto direct = net.slot_features_direct(images);
        double dev = 0.0;
        for (std::size_t l = 0; l < fast.size(); ++l)
            for (std::size_t i = 0; i < fast[l].size(); ++i) dev = std::max(dev, std::abs(fast[l].data[i] - direct[l].data[i]));
        out.push_back(make_check("network", "ViererNet character-domain evaluation matches the explicit group sum",
                                 "vierer:fast-path", dev, 1e-12));
    }
    {
        const ViererFilterBank& bank = vierer_filter_bank();
        double dev = 0.0;
        for (std::size_t e = 0; e < 4; ++e) {
            std::vector<double> theta(9);
            for (double& x : theta) x = rng.normal();
            const auto k = vierer_kernel(theta.data(), e);
            const std::vector<double> kv(k.begin(), k.end());
            for (std::size_t g = 0; g < 4; ++g) {
                const auto f = flip_image(kv, 3, 3, g);
                for (std::size_t i = 0; i < 9; ++i) dev = std::max(dev, std::abs(f[i] - bank.table.data[e * 4 + g] * kv[i]));
            }
        }
        out.push_back(make_check("network", "typed 3x3 kernels satisfy flip(K) = e(g) K", "filter-bases:vierer", dev, 1e-12));
    }
    {
        Rng nrng(seed, Stream::Verify, 14);
        const CharNet net = random_z3_net(nrng, 2);
        const LinearRep r = rep_cyclic_shift(3, Field::Complex);
        std::vector<Vec> samples;
        for (int i = 0; i < 10; ++i) samples.push_back(random_vec(nrng, 3, Field::Complex));
        const auto act = [&](std::size_t g, const Vec& v) { return matvec(r(g), v); };
        const Vec onehot{0.0, 1.0, 0.0};
        const auto one = check_projective_equivariance(
            [&](const Vec& x) { return select(net.forward(x).back(), onehot); }, r, act, samples, 1e-8, net.layers[0].chars());
        const Vec dense{0.7, -0.4, 0.5};
        const auto mixed = check_projective_equivariance(
            [&](const Vec& x) { return select(net.forward(x).back(), dense); }, r, act, samples, 1e-8, net.layers[0].chars());
        double dev = one.max_sin;
        if (one.matched_character != 1) dev = std::max(dev, 1.0);
        out.push_back(make_check("network", "one-hot selector keeps the net projectively equivariant",
                                 "selector:one-hot", dev, 1e-8,
                                 "dense selector (recorded only): max sin " + std::to_string(mixed.max_sin) + ", " +
                                     std::to_string(mixed.failures) + "/" + std::to_string(mixed.checks) + " failing"));
    }
    {
        double eq = 0.0, parity = 0.0;
        std::vector<SpinorSample> base;
        for (std::uint64_t i = 0; i < 4; ++i) base.push_back(gen_spinor_sample(0.2, seed, i, false));
        for (SpinorVariant v : kSpinorVariants) {
            if (v == SpinorVariant::AsScalars) continue;
            SpinorNet net(v, seed + 3);
            const auto p = net.predict(base);
            for (int k = 0; k < 5; ++k) {
                const auto q = random_quaternion(rng);
                std::vector<SpinorSample> rot;
                for (const auto& s : base) rot.push_back(rotate_sample(s, q));
                const auto pr = net.predict(rot);
                for (std::size_t b = 0; b < base.size(); ++b) {
                    const Spinor e = spinor_rotate(q, p[b]);
                    eq = std::max({eq, std::abs(e[0] - pr[b][0]), std::abs(e[1] - pr[b][1])});
                }
            }
            auto neg = base;
            for (auto& s : neg)
                for (auto& sp : s.spinors) sp = {-sp[0], -sp[1]};
            const auto pn = net.predict(neg);
            for (std::size_t b = 0; b < base.size(); ++b)
                parity = std::max({parity, std::abs(pn[b][0] + p[b][0]), std::abs(pn[b][1] + p[b][1])});
        }
        out.push_back(make_check("network", "equivariant spinor nets rotate their output with the spinor irrep",
                                 "spinor-field-network:equivariance", eq, 1e-7));
        out.push_back(make_check("network", "equivariant spinor nets are odd under s -> -s",
                                 "spinor-field-network:sign-parity", parity, 1e-12));
    }
    return out;
}

VerifyReport run_verify(VerifyScope scope, std::uint64_t seed) {
    VerifyReport rep;
    rep.scope = scope;
    auto take = [&](std::vector<CheckResult> v) {
        for (CheckResult& c : v) rep.checks.push_back(std::move(c));
    };
    const bool all = scope == VerifyScope::All;
    if (all || scope == VerifyScope::Groups) {
        take(check_character_tables());
        take(check_commutator_subgroups());
    }
    if (all || scope == VerifyScope::Invariants) {
        take(check_vierer_filter_dims());
        take(check_projector_laws());
        take(check_projective_oracle(seed));
        take(check_commutator_invariants());
        take(check_sign_tensors());
    }
    if (all || scope == VerifyScope::Su2) take(check_su2(seed));
    if (all || scope == VerifyScope::Network) {
        take(check_slot_equivariance(seed));
        take(check_network_extras(seed));
    }
    return rep;
}

}  // namespace projeq
