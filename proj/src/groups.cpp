#include "projeq/groups.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <queue>
#include <sstream>

namespace projeq {

// ---------------------------------------------------------------- FiniteGroup

FiniteGroup::FiniteGroup(std::vector<std::size_t> cayley, std::size_t order,
                         std::vector<std::size_t> generators, std::vector<std::string> labels,
                         std::string name)
    : order_(order),
      cayley_(std::move(cayley)),
      generators_(std::move(generators)),
      labels_(std::move(labels)),
      name_(std::move(name)) {
    if (order_ == 0) throw DomainError("FiniteGroup: order must be positive");
    if (order_ > kMaxGroupOrder) throw SizeError("FiniteGroup: order exceeds cap of 720");
    if (cayley_.size() != order_ * order_) throw DimensionError("FiniteGroup: Cayley table size");
    if (labels_.empty()) {
        for (std::size_t g = 0; g < order_; ++g) labels_.push_back(std::to_string(g));
    }
    if (labels_.size() != order_) throw DimensionError("FiniteGroup: label count");

    // Latin square
    for (std::size_t a = 0; a < order_; ++a) {
        std::vector<bool> row(order_, false), col(order_, false);
        for (std::size_t b = 0; b < order_; ++b) {
            const std::size_t r = cayley_[a * order_ + b];
            const std::size_t c = cayley_[b * order_ + a];
            if (r >= order_ || c >= order_ || row[r] || col[c]) {
                throw InvariantError("FiniteGroup: Cayley table is not a Latin square");
            }
            row[r] = col[c] = true;
        }
    }
    // identity
    bool found = false;
    for (std::size_t e = 0; e < order_ && !found; ++e) {
        bool ok = true;
        for (std::size_t g = 0; g < order_ && ok; ++g) ok = mul(e, g) == g && mul(g, e) == g;
        if (ok) {
            identity_ = e;
            found = true;
        }
    }
    if (!found) throw InvariantError("FiniteGroup: no identity element");
    // inverses (unique by the Latin property)
    inverse_.assign(order_, order_);
    for (std::size_t g = 0; g < order_; ++g)
        for (std::size_t h = 0; h < order_; ++h)
            if (mul(g, h) == identity_) inverse_[g] = h;
    for (std::size_t g = 0; g < order_; ++g)
        if (inverse_[g] == order_ || mul(inverse_[g], g) != identity_)
            throw InvariantError("FiniteGroup: missing two-sided inverse");
    if (order_ <= kExhaustiveCheckOrder && !is_associative(*this)) {
        throw InvariantError("FiniteGroup: multiplication is not associative");
    }
    // generation
    std::vector<bool> seen(order_, false);
    std::queue<std::size_t> frontier;
    seen[identity_] = true;
    frontier.push(identity_);
    std::size_t count = 1;
    for (std::size_t s : generators_)
        if (s >= order_) throw DimensionError("FiniteGroup: generator index out of range");
    while (!frontier.empty()) {
        const std::size_t g = frontier.front();
        frontier.pop();
        for (std::size_t s : generators_) {
            const std::size_t h = mul(g, s);
            if (!seen[h]) {
                seen[h] = true;
                ++count;
                frontier.push(h);
            }
        }
    }
    if (count != order_) throw InvariantError("FiniteGroup: generators do not generate the group");
}

std::size_t FiniteGroup::element_order(std::size_t g) const {
    std::size_t k = 1;
    std::size_t p = g;
    while (p != identity_) {
        p = mul(p, g);
        ++k;
    }
    return k;
}

bool FiniteGroup::is_abelian() const {
    for (std::size_t a = 0; a < order_; ++a)
        for (std::size_t b = a + 1; b < order_; ++b)
            if (mul(a, b) != mul(b, a)) return false;
    return true;
}

bool is_associative(const FiniteGroup& g) {
    const std::size_t n = g.order();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const std::size_t ab = g.mul(a, b);
            for (std::size_t c = 0; c < n; ++c)
                if (g.mul(ab, c) != g.mul(a, g.mul(b, c))) return false;
        }
    return true;
}

bool same_group(const FiniteGroup& a, const FiniteGroup& b) {
    return &a == &b || (a.order() == b.order() && a.cayley() == b.cayley());
}

// ---------------------------------------------------------------- constructors

GroupPtr make_cyclic(std::size_t n) {
    if (n == 0) throw DomainError("make_cyclic: n must be at least 1");
    if (n > kMaxGroupOrder) throw SizeError("make_cyclic: order exceeds cap");
    std::vector<std::size_t> table(n * n);
    std::vector<std::string> labels;
    for (std::size_t a = 0; a < n; ++a) {
        labels.push_back(std::to_string(a));
        for (std::size_t b = 0; b < n; ++b) table[a * n + b] = (a + b) % n;
    }
    std::vector<std::size_t> gens;
    if (n > 1) gens.push_back(1);
    return std::make_shared<const FiniteGroup>(std::move(table), n, std::move(gens), std::move(labels),
                                               "Z" + std::to_string(n));
}

GroupPtr make_vierer() {
    // index = a + 2 b for the pair (a, b)
    std::vector<std::size_t> table(16);
    for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t y = 0; y < 4; ++y) table[x * 4 + y] = x ^ y;
    return std::make_shared<const FiniteGroup>(std::move(table), 4, std::vector<std::size_t>{1, 2},
                                               std::vector<std::string>{"(0,0)", "(1,0)", "(0,1)", "(1,1)"},
                                               "Z2xZ2");
}

namespace {

std::vector<std::vector<std::size_t>> all_permutations(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<std::size_t>> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

}  // namespace

std::vector<std::size_t> permutation_of(std::size_t n, std::size_t g) {
    const auto perms = all_permutations(n);
    if (g >= perms.size()) throw DimensionError("permutation_of: index out of range");
    return perms[g];
}

GroupPtr make_symmetric(std::size_t n) {
    if (n == 0) throw DomainError("make_symmetric: n must be at least 1");
    if (n > 6) throw SizeError("make_symmetric: n > 6 exceeds desk scale");
    const auto perms = all_permutations(n);
    const std::size_t order = perms.size();
    auto index_of = [&perms](const std::vector<std::size_t>& p) {
        return static_cast<std::size_t>(std::lower_bound(perms.begin(), perms.end(), p) - perms.begin());
    };
    std::vector<std::size_t> table(order * order);
    std::vector<std::size_t> composed(n);
    for (std::size_t a = 0; a < order; ++a)
        for (std::size_t b = 0; b < order; ++b) {
            for (std::size_t i = 0; i < n; ++i) composed[i] = perms[a][perms[b][i]];
            table[a * order + b] = index_of(composed);
        }
    std::vector<std::size_t> gens;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::vector<std::size_t> t(n);
        std::iota(t.begin(), t.end(), 0);
        std::swap(t[i], t[i + 1]);
        gens.push_back(index_of(t));
    }
    std::vector<std::string> labels;
    for (const auto& p : perms) {
        std::string s;
        for (std::size_t v : p) s += std::to_string(v + 1);
        labels.push_back(s);
    }
    return std::make_shared<const FiniteGroup>(std::move(table), order, std::move(gens), std::move(labels),
                                               "S" + std::to_string(n));
}

// ---------------------------------------------------------------- characters

cd root_of_unity(std::size_t k, std::size_t d) {
    k %= d;
    if ((4 * k) % d == 0) {
        switch ((4 * k) / d) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(d);
    return {std::cos(t), std::sin(t)};
}

Character::Character(GroupPtr group, std::vector<cd> values, Field field, std::string label)
    : group_(std::move(group)), values_(std::move(values)), field_(field), label_(std::move(label)) {
    const FiniteGroup& g = *group_;
    if (values_.size() != g.order()) throw DimensionError("Character: value table length");
    constexpr double tol = 1e-9;
    if (std::abs(values_[g.identity()] - cd{1.0, 0.0}) > tol)
        throw InvariantError("Character: value at identity is not 1");
    for (const cd& v : values_) {
        if (std::abs(std::abs(v) - 1.0) > tol) throw InvariantError("Character: value off the unit circle");
        if (field_ == Field::Real && v.imag() != 0.0) throw FieldError("Character: complex value for real field");
    }
    for (std::size_t a = 0; a < g.order(); ++a)
        for (std::size_t b = 0; b < g.order(); ++b)
            if (std::abs(values_[a] * values_[b] - values_[g.mul(a, b)]) > tol)
                throw InvariantError("Character: not a homomorphism");
}

bool Character::is_trivial() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](const cd& v) { return std::abs(v - cd{1.0, 0.0}) < 1e-12; });
}

bool Character::equals(const Character& other, double tol) const {
    if (!same_group(*group_, *other.group_)) return false;
    for (std::size_t g = 0; g < values_.size(); ++g)
        if (std::abs(values_[g] - other.values_[g]) > tol) return false;
    return true;
}

Character trivial_character(const GroupPtr& g, Field field) {
    return Character(g, std::vector<cd>(g->order(), cd{1.0, 0.0}), field, "1");
}

Character char_mul(const Character& a, const Character& b) {
    if (!same_group(*a.group(), *b.group())) throw GroupMismatch("char_mul: characters of different groups");
    if (a.field() != b.field()) throw FieldError("char_mul: field mismatch");
    std::vector<cd> v(a.values().size());
    for (std::size_t g = 0; g < v.size(); ++g) v[g] = a(g) * b(g);
    return Character(a.group(), std::move(v), a.field());
}

Character char_inverse(const Character& a) {
    std::vector<cd> v(a.values().size());
    for (std::size_t g = 0; g < v.size(); ++g) v[g] = std::conj(a(g));
    return Character(a.group(), std::move(v), a.field());
}

namespace {

std::string character_label(const std::vector<std::size_t>& exps, const std::vector<std::size_t>& orders) {
    const bool signs = !orders.empty() && std::all_of(orders.begin(), orders.end(), [](std::size_t d) { return d == 2; });
    std::string s;
    if (signs) {
        for (std::size_t e : exps) s += e == 0 ? '+' : '-';
        return s;
    }
    if (std::all_of(exps.begin(), exps.end(), [](std::size_t e) { return e == 0; })) return "1";
    s = "chi[";
    for (std::size_t i = 0; i < exps.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(exps[i]) + "/" + std::to_string(orders[i]);
    }
    return s + "]";
}

}  // namespace

std::vector<Character> character_group(const GroupPtr& gp, Field field) {
    const FiniteGroup& g = *gp;
    const auto& gens = g.generators();
    std::vector<std::size_t> orders;
    std::vector<std::vector<std::size_t>> allowed;  // admissible exponents per generator
    for (std::size_t s : gens) {
        const std::size_t d = g.element_order(s);
        orders.push_back(d);
        std::vector<std::size_t> ks;
        for (std::size_t k = 0; k < d; ++k) {
            if (field == Field::Real && !(k == 0 || 2 * k == d)) continue;
            ks.push_back(k);
        }
        allowed.push_back(std::move(ks));
    }

    std::vector<Character> result;
    std::vector<std::size_t> pick(gens.size(), 0);
    while (true) {
        std::vector<std::size_t> exps(gens.size());
        for (std::size_t i = 0; i < gens.size(); ++i) exps[i] = allowed[i][pick[i]];

        // extend along the Cayley graph
        std::vector<cd> values(g.order());
        std::vector<bool> set(g.order(), false);
        values[g.identity()] = 1.0;
        set[g.identity()] = true;
        std::queue<std::size_t> frontier;
        frontier.push(g.identity());
        bool consistent = true;
        while (!frontier.empty() && consistent) {
            const std::size_t x = frontier.front();
            frontier.pop();
            for (std::size_t i = 0; i < gens.size(); ++i) {
                const std::size_t y = g.mul(x, gens[i]);
                const cd vy = values[x] * root_of_unity(exps[i], orders[i]);
                if (!set[y]) {
                    values[y] = vy;
                    set[y] = true;
                    frontier.push(y);
                } else if (std::abs(values[y] - vy) > 1e-9) {
                    consistent = false;
                    break;
                }
            }
        }
        if (consistent) {
            for (std::size_t a = 0; a < g.order() && consistent; ++a)
                for (std::size_t b = 0; b < g.order() && consistent; ++b)
                    consistent = std::abs(values[a] * values[b] - values[g.mul(a, b)]) <= 1e-9;
        }
        if (consistent) {
            if (field == Field::Real)
                for (cd& v : values) v = cd{v.real(), 0.0};
            result.emplace_back(gp, std::move(values), field, character_label(exps, orders));
        }

        // odometer, last generator fastest
        std::size_t i = gens.size();
        while (i > 0) {
            --i;
            if (++pick[i] < allowed[i].size()) break;
            pick[i] = 0;
            if (i == 0) return result;
        }
        if (gens.empty()) return result;
    }
}

std::size_t find_character(const std::vector<Character>& chars, const Character& c) {
    for (std::size_t i = 0; i < chars.size(); ++i)
        if (chars[i].equals(c)) return i;
    return chars.size();
}

// ---------------------------------------------------------------- subgroups

Subgroup::Subgroup(GroupPtr parent, std::vector<std::size_t> members)
    : parent_(std::move(parent)), members_(std::move(members)) {
    const FiniteGroup& g = *parent_;
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    member_mask_.assign(g.order(), false);
    for (std::size_t m : members_) {
        if (m >= g.order()) throw DimensionError("Subgroup: member index out of range");
        member_mask_[m] = true;
    }
    if (!member_mask_[g.identity()]) throw InvariantError("Subgroup: identity missing");
    for (std::size_t a : members_) {
        if (!member_mask_[g.inverse(a)]) throw InvariantError("Subgroup: not closed under inverses");
        for (std::size_t b : members_)
            if (!member_mask_[g.mul(a, b)]) throw InvariantError("Subgroup: not closed under products");
    }
}

GroupPtr Subgroup::as_group() const {
    const FiniteGroup& g = *parent_;
    const std::size_t n = members_.size();
    std::vector<std::size_t> local(g.order(), n);
    for (std::size_t i = 0; i < n; ++i) local[members_[i]] = i;
    std::vector<std::size_t> table(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) table[i * n + j] = local[g.mul(members_[i], members_[j])];
    // greedy generating set
    std::vector<std::size_t> gens;
    std::vector<bool> reached(n, false);
    reached[local[g.identity()]] = true;
    std::size_t count = 1;
    for (std::size_t cand = 0; cand < n && count < n; ++cand) {
        if (reached[cand]) continue;
        gens.push_back(cand);
        std::vector<std::size_t> stack;
        for (std::size_t x = 0; x < n; ++x)
            if (reached[x]) stack.push_back(x);
        while (!stack.empty()) {
            const std::size_t x = stack.back();
            stack.pop_back();
            for (std::size_t s : gens) {
                for (std::size_t y : {table[x * n + s], table[s * n + x]}) {
                    if (!reached[y]) {
                        reached[y] = true;
                        ++count;
                        stack.push_back(y);
                    }
                }
            }
        }
    }
    std::vector<std::string> labels;
    for (std::size_t m : members_) labels.push_back(g.label(m));
    return std::make_shared<const FiniteGroup>(std::move(table), n, std::move(gens), std::move(labels),
                                               g.name() + "|sub" + std::to_string(n));
}

Subgroup generated_subgroup(const GroupPtr& gp, const std::vector<std::size_t>& gens) {
    const FiniteGroup& g = *gp;
    std::vector<bool> in(g.order(), false);
    std::vector<std::size_t> members{g.identity()};
    in[g.identity()] = true;
    for (std::size_t head = 0; head < members.size(); ++head) {
        const std::size_t x = members[head];
        for (std::size_t s : gens) {
            const std::size_t y = g.mul(x, s);
            if (!in[y]) {
                in[y] = true;
                members.push_back(y);
            }
        }
    }
    return Subgroup(gp, std::move(members));
}

Subgroup commutator_subgroup(const GroupPtr& gp) {
    const FiniteGroup& g = *gp;
    std::vector<bool> seen(g.order(), false);
    std::vector<std::size_t> comms;
    for (std::size_t h = 0; h < g.order(); ++h)
        for (std::size_t k = 0; k < g.order(); ++k) {
            const std::size_t c = g.mul(g.mul(h, k), g.mul(g.inverse(h), g.inverse(k)));
            if (!seen[c]) {
                seen[c] = true;
                comms.push_back(c);
            }
        }
    return generated_subgroup(gp, comms);
}

bool is_perfect(const GroupPtr& g) { return commutator_subgroup(g).order() == g->order(); }

}  // namespace projeq
