#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "projeq/autodiff.hpp"
#include "projeq/invariants.hpp"
#include "projeq/su2.hpp"

namespace projeq {

// ---------------------------------------------------------------- PJEQ checkpoints
//
// "PJEQ", u32 version, u32 record count, then per record: u32 name length,
// name bytes, u32 rank, rank x u32 dims, little-endian f64 payload.

inline constexpr std::uint32_t kCheckpointVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, nn::Tensor>>;

void write_checkpoint(std::ostream& out, const NamedTensors& records);
/// Throws DataError on a bad magic, version or truncated record.
NamedTensors read_checkpoint(std::istream& in);

/// Parameters followed by any extra buffers.
void save_checkpoint(const std::string& path, const nn::ParamStore& params, const NamedTensors& extra = {});
NamedTensors load_checkpoint(const std::string& path);

/// Copies matching records into params; every parameter must be present
/// with its exact shape. Returns the records that are not parameters.
NamedTensors restore_params(nn::ParamStore& params, const NamedTensors& records);

// ---------------------------------------------------------------- JSON views

nlohmann::json complex_json(cd z);
nlohmann::json vec_json(const Vec& v);
nlohmann::json character_json(const Character& c);
nlohmann::json group_json(const FiniteGroup& g);
nlohmann::json invariant_basis_json(const InvariantBasis& b);
nlohmann::json cg_table_json(const CGTable& t);

/// Serializes with sorted keys and fixed indentation, newline-terminated.
std::string dump_json(const nlohmann::json& j);

}  // namespace projeq
