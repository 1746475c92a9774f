#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "projeq/algebra.hpp"

namespace projeq {

inline constexpr std::size_t kMaxGroupOrder = 720;
inline constexpr std::size_t kExhaustiveCheckOrder = 64;

/// A finite group given by its Cayley table.
///
/// Element indices run over [0, order). Construction validates the Latin
/// square property, identity and inverses, generation by the generator
/// list, and (for order <= 64) associativity on all triples.
class FiniteGroup {
public:
    FiniteGroup(std::vector<std::size_t> cayley, std::size_t order, std::vector<std::size_t> generators,
                std::vector<std::string> labels, std::string name);

    std::size_t order() const { return order_; }
    std::size_t identity() const { return identity_; }
    std::size_t mul(std::size_t a, std::size_t b) const { return cayley_[a * order_ + b]; }
    std::size_t inverse(std::size_t a) const { return inverse_[a]; }
    const std::vector<std::size_t>& generators() const { return generators_; }
    const std::string& label(std::size_t g) const { return labels_[g]; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& name() const { return name_; }
    const std::vector<std::size_t>& cayley() const { return cayley_; }

    /// Smallest k >= 1 with g^k = identity.
    std::size_t element_order(std::size_t g) const;
    bool is_abelian() const;

private:
    std::size_t order_;
    std::vector<std::size_t> cayley_;
    std::size_t identity_ = 0;
    std::vector<std::size_t> inverse_;
    std::vector<std::size_t> generators_;
    std::vector<std::string> labels_;
    std::string name_;
};

using GroupPtr = std::shared_ptr<const FiniteGroup>;

/// Same object, or structurally identical Cayley tables.
bool same_group(const FiniteGroup& a, const FiniteGroup& b);

GroupPtr make_cyclic(std::size_t n);
/// Z_2 x Z_2 with elements (0,0),(1,0),(0,1),(1,1) in that index order.
GroupPtr make_vierer();
/// S_n in lexicographic one-line order, composition (s o t)(i) = s(t(i)),
/// generated by adjacent transpositions. Requires 1 <= n <= 6.
GroupPtr make_symmetric(std::size_t n);

/// One-line images of the permutation with index g in make_symmetric(n).
std::vector<std::size_t> permutation_of(std::size_t n, std::size_t g);

/// A scalar-valued homomorphism into the unit circle.
class Character {
public:
    /// Validates the homomorphism table, unit modulus and field.
    Character(GroupPtr group, std::vector<cd> values, Field field, std::string label = {});

    const GroupPtr& group() const { return group_; }
    const std::vector<cd>& values() const { return values_; }
    cd operator()(std::size_t g) const { return values_[g]; }
    Field field() const { return field_; }
    const std::string& label() const { return label_; }
    bool is_trivial() const;

    /// Pointwise equality within tol.
    bool equals(const Character& other, double tol = 1e-9) const;

private:
    GroupPtr group_;
    std::vector<cd> values_;
    Field field_;
    std::string label_;
};

Character trivial_character(const GroupPtr& g, Field field);
Character char_mul(const Character& a, const Character& b);
Character char_inverse(const Character& a);

/// All characters of g over field, trivial character first.
///
/// Generator values are enumerated among d-th roots of unity (d the
/// generator's order; restricted to +-1 over the reals), extended along the
/// Cayley graph and kept only if the full multiplication table agrees.
/// The last generator varies fastest.
std::vector<Character> character_group(const GroupPtr& g, Field field);

/// Position of c in chars, or chars.size() if absent.
std::size_t find_character(const std::vector<Character>& chars, const Character& c);

/// e^{2 pi i k / d}, exact at quarter turns.
cd root_of_unity(std::size_t k, std::size_t d);

class Subgroup {
public:
    /// Validates identity membership and closure.
    Subgroup(GroupPtr parent, std::vector<std::size_t> members);

    const GroupPtr& parent() const { return parent_; }
    const std::vector<std::size_t>& members() const { return members_; }
    std::size_t order() const { return members_.size(); }
    bool contains(std::size_t g) const { return member_mask_[g]; }

    /// The subgroup as a standalone group; element i corresponds to members()[i].
    GroupPtr as_group() const;

private:
    GroupPtr parent_;
    std::vector<std::size_t> members_;
    std::vector<bool> member_mask_;
};

/// Closure of a generating set under products.
Subgroup generated_subgroup(const GroupPtr& g, const std::vector<std::size_t>& gens);

Subgroup commutator_subgroup(const GroupPtr& g);
bool is_perfect(const GroupPtr& g);

/// Exhaustive O(n^3) associativity check.
bool is_associative(const FiniteGroup& g);

}  // namespace projeq
