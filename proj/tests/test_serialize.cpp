#include <doctest.h>

#include <sstream>

#include "projeq/invariants.hpp"
#include "projeq/serialize.hpp"
#include "projeq/su2.hpp"

using namespace projeq;

namespace {

std::string encode(const NamedTensors& recs) {
    std::ostringstream out;
    write_checkpoint(out, recs);
    return out.str();
}

NamedTensors decode(const std::string& bytes) {
    std::istringstream in(bytes);
    return read_checkpoint(in);
}

}  // namespace

TEST_CASE("checkpoint round trip") {
    const NamedTensors recs{{"conv0.theta", nn::Tensor({2, 3}, std::vector<double>{1, -2, 3.5, 1e-300, -0.0, 7})},
                            {"scalar", nn::Tensor({}, std::vector<double>{42})},
                            {"bn.running_mean", nn::Tensor({4}, 0.25)}};
    const std::string bytes = encode(recs);
    CHECK(bytes.substr(0, 4) == "PJEQ");
    CHECK(static_cast<unsigned char>(bytes[4]) == kCheckpointVersion);
    const NamedTensors back = decode(bytes);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].first == recs[i].first);
        CHECK(back[i].second.shape == recs[i].second.shape);
        CHECK(back[i].second.data == recs[i].second.data);
    }
    CHECK(encode(back) == bytes);
}

TEST_CASE("corrupt checkpoints are rejected") {
    const std::string bytes = encode({{"w", nn::Tensor({3}, 1.0)}});
    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode(bad), DataError);
    std::string ver = bytes;
    ver[4] = 9;
    CHECK_THROWS_AS(decode(ver), DataError);
    for (std::size_t cut : {std::size_t{2}, std::size_t{10}, bytes.size() - 1})
        CHECK_THROWS_AS(decode(bytes.substr(0, cut)), DataError);
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/x.pjeq"), DataError);
}

TEST_CASE("restoring parameters") {
    nn::ParamStore ps;
    ps.add("a", nn::Tensor({2}, 0.0));
    ps.add("b", nn::Tensor({1, 3}, 0.0));
    const NamedTensors recs{{"b", nn::Tensor({1, 3}, 5.0)}, {"a", nn::Tensor({2}, 4.0)}, {"extra", nn::Tensor({1}, 9.0)}};
    const NamedTensors rest = restore_params(ps, recs);
    CHECK(ps.value("a").data == std::vector<double>{4, 4});
    CHECK(ps.value("b").data == std::vector<double>{5, 5, 5});
    REQUIRE(rest.size() == 1);
    CHECK(rest[0].first == "extra");

    CHECK_THROWS_AS(restore_params(ps, {{"a", nn::Tensor({2}, 1.0)}}), DataError);
    CHECK_THROWS_AS(restore_params(ps, {{"a", nn::Tensor({3}, 1.0)}, {"b", nn::Tensor({1, 3})}}), DimensionError);
}

TEST_CASE("JSON views") {
    CHECK(complex_json(cd{1.5, -2.0}) == nlohmann::json::array({1.5, -2.0}));
    CHECK(vec_json({1.0, cd{0, 1}}).size() == 2);

    const LinearRep r = rep_flip_image(3, 3);
    const auto chars = character_group(r.group(), Field::Real);
    const InvariantBasis b = invariant_basis(r, chars[3]);
    const nlohmann::json j = invariant_basis_json(b);
    CHECK(j.at("dim") == 1);
    CHECK(j.at("field") == "real");
    CHECK(j.at("basis").size() == 1);
    CHECK(j.at("character").at("values").size() == 4);

    const nlohmann::json g = group_json(*r.group());
    CHECK(g.at("order") == 4);

    const nlohmann::json cg = cg_table_json(clebsch_gordan(IrrepLevel(1), IrrepLevel(1)));
    CHECK(cg.at("rows").size() == 4);
    CHECK(cg.at("blocks").size() == 2);

    const std::string s = dump_json({{"b", 1}, {"a", 2}});
    CHECK(s == "{\n  \"a\": 2,\n  \"b\": 1\n}\n");
}
