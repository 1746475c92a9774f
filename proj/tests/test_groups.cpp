#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "projeq/groups.hpp"
#include "projeq/invariants.hpp"

using namespace projeq;

TEST_CASE("cyclic groups") {
    CHECK(make_cyclic(1)->order() == 1);
    const GroupPtr z3 = make_cyclic(3);
    CHECK(z3->order() == 3);
    CHECK(z3->inverse(1) == 2);
    CHECK(is_associative(*make_cyclic(6)));
    CHECK_THROWS_AS(make_cyclic(0), DomainError);
}

TEST_CASE("Cayley tables are Latin squares with identity and inverses") {
    for (const GroupPtr& g : {make_cyclic(5), make_vierer(), make_symmetric(4)}) {
        const std::size_t n = g->order();
        for (std::size_t a = 0; a < n; ++a) {
            std::vector<bool> row(n), col(n);
            for (std::size_t b = 0; b < n; ++b) {
                row[g->mul(a, b)] = true;
                col[g->mul(b, a)] = true;
            }
            CHECK(std::all_of(row.begin(), row.end(), [](bool x) { return x; }));
            CHECK(std::all_of(col.begin(), col.end(), [](bool x) { return x; }));
            CHECK(g->mul(g->identity(), a) == a);
            CHECK(g->mul(a, g->inverse(a)) == g->identity());
        }
    }
}

TEST_CASE("group construction rejects a broken table") {
    CHECK_THROWS_AS(FiniteGroup({0, 1, 1, 1}, 2, {1}, {"a", "b"}, "not latin"), InvariantError);
    // Latin square with identity 0 whose product is not associative.
    const std::vector<std::size_t> quasi{0, 1, 2, 3, 4, 1, 0, 3, 4, 2, 2, 4, 0, 1, 3, 3, 2, 4, 0, 1, 4, 3, 1, 2, 0};
    CHECK_THROWS_AS(FiniteGroup(quasi, 5, {1, 2}, {"a", "b", "c", "d", "e"}, "loop"), InvariantError);
}

TEST_CASE("vierer group") {
    const GroupPtr v = make_vierer();
    for (std::size_t g = 0; g < 4; ++g) CHECK(v->mul(g, g) == v->identity());
    CHECK(v->mul(1, 2) == 3);  // (1,0) + (0,1) = (1,1)
    CHECK(v->is_abelian());
}

TEST_CASE("symmetric groups") {
    CHECK(make_symmetric(3)->order() == 6);
    const GroupPtr s4 = make_symmetric(4);
    CHECK(s4->order() == 24);
    std::size_t involutions = 0;
    for (std::size_t g = 0; g < 24; ++g) involutions += s4->element_order(g) == 2 ? 1 : 0;
    CHECK(involutions == 9);

    // (s o t)(i) = s(t(i)) against direct application to tuples.
    const GroupPtr s3 = make_symmetric(3);
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 6; ++b) {
            const auto pa = permutation_of(3, a), pb = permutation_of(3, b), pab = permutation_of(3, s3->mul(a, b));
            for (std::size_t i = 0; i < 3; ++i) CHECK(pab[i] == pa[pb[i]]);
        }
    CHECK_THROWS_AS(make_symmetric(7), SizeError);
}

TEST_CASE("commutator subgroups and perfectness") {
    CHECK(commutator_subgroup(make_cyclic(6)).order() == 1);
    CHECK(commutator_subgroup(make_vierer()).order() == 1);
    CHECK(commutator_subgroup(make_symmetric(4)).order() == 12);
    CHECK_FALSE(is_perfect(make_cyclic(2)));
    CHECK_FALSE(is_perfect(make_cyclic(5)));
    CHECK_FALSE(is_perfect(make_symmetric(3)));
    CHECK(is_perfect(make_cyclic(1)));
    const Subgroup a5 = commutator_subgroup(make_symmetric(5));
    CHECK(is_perfect(a5.as_group()));
}

TEST_CASE("character groups") {
    const GroupPtr v = make_vierer();
    for (Field f : {Field::Real, Field::Complex}) {
        const auto chars = character_group(v, f);
        const double table[4][4] = {{1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}};
        REQUIRE(chars.size() == 4);
        for (std::size_t e = 0; e < 4; ++e)
            for (std::size_t g = 0; g < 4; ++g) CHECK(chars[e](g) == cd{table[e][g], 0.0});
        // e_{+-} e_{-+} = e_{--}
        CHECK(char_mul(chars[1], chars[2]).equals(chars[3]));
        CHECK(char_mul(chars[1], chars[0]).equals(chars[1]));
    }

    const auto z3 = character_group(make_cyclic(3), Field::Complex);
    REQUIRE(z3.size() == 3);
    const cd alpha = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
    for (const Character& c : z3) {
        double best = 1.0;
        for (int k = 0; k < 3; ++k) best = std::min(best, std::abs(c(1) - std::pow(alpha, k)));
        CHECK(best < 1e-12);
    }

    const GroupPtr s4 = make_symmetric(4);
    const auto s4c = character_group(s4, Field::Complex);
    REQUIRE(s4c.size() == 2);
    CHECK(s4c[0].is_trivial());
    CHECK(s4c[1].equals(sign_character(s4, 4)));
    CHECK(char_mul(s4c[1], s4c[1]).is_trivial());

    CHECK(character_group(make_cyclic(5), Field::Real).size() == 1);
    const auto z4r = character_group(make_cyclic(4), Field::Real);
    REQUIRE(z4r.size() == 2);
    CHECK(z4r[1](1) == cd{-1.0, 0.0});
}

TEST_CASE("characters validate their tables") {
    const GroupPtr z2 = make_cyclic(2);
    CHECK_THROWS_AS(Character(z2, {1.0, 2.0}, Field::Real), InvariantError);
    CHECK_THROWS_AS(Character(z2, {-1.0, -1.0}, Field::Real), InvariantError);
    CHECK_THROWS_AS(char_mul(trivial_character(z2, Field::Real), trivial_character(make_cyclic(3), Field::Real)),
                    GroupMismatch);
}
