#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "projeq/reps.hpp"

namespace projeq {

/// One measured property. Passes when deviation <= tolerance.
struct CheckResult {
    std::string suite;
    std::string name;
    /// Short tag naming the mathematical statement the check exercises.
    std::string reference;
    double deviation = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

CheckResult make_check(std::string suite, std::string name, std::string reference, double deviation, double tolerance,
                       std::string detail = {});

enum class VerifyScope { All, Groups, Invariants, Su2, Network };
VerifyScope parse_verify_scope(const std::string& s);
std::string to_string(VerifyScope s);

struct VerifyReport {
    VerifyScope scope = VerifyScope::All;
    std::vector<CheckResult> checks;

    bool passed() const;
    nlohmann::json to_json() const;
};

/// Runs the suites in scope. Deterministic for a fixed seed.
VerifyReport run_verify(VerifyScope scope, std::uint64_t seed = 0);

// Individual check groups, also used by the acceptance runner.

/// Z2^2 table, Z3 over C, and {1, sgn} for S3, S4, S5.
std::vector<CheckResult> check_character_tables();
/// {S_n, S_n} = A_n for n = 3, 4, 5.
std::vector<CheckResult> check_commutator_subgroups();
/// Brute-force projective-invariance oracle against the union of twisted
/// invariant spaces, both directions, for the Z4 shift, the Z2^2 filter
/// representation and S4 on (R^4)^(x)2.
std::vector<CheckResult> check_projective_oracle(std::uint64_t seed);
/// Commutator invariants versus twisted invariants for the same three reps.
std::vector<CheckResult> check_commutator_invariants();
/// Sign-twisted invariants of S_n on (F^n)^(x)k.
std::vector<CheckResult> check_sign_tensors();
/// Filter dimensions (4, 2, 2, 1) from both solvers.
std::vector<CheckResult> check_vierer_filter_dims();
/// Projector algebra and the non-unit-modulus twist.
std::vector<CheckResult> check_projector_laws();
/// Quaternions, covering map, perfectness, Wigner matrices, Clebsch-Gordan.
std::vector<CheckResult> check_su2(std::uint64_t seed);
/// Slot equivariance of every intermediate feature for random ViererNets
/// and Z3 character-indexed nets, 100 (x, g) pairs each.
std::vector<CheckResult> check_slot_equivariance(std::uint64_t seed);
/// ViererNet fast path against the direct oracle, selector behavior and
/// spinor network equivariance and sign parity.
std::vector<CheckResult> check_network_extras(std::uint64_t seed);

/// Outcome of the brute-force projective oracle on one representation.
struct ProjectiveOracleResult {
    std::size_t candidates = 0;
    std::size_t solutions = 0;        ///< candidates passing the proportionality test
    std::size_t mismatches = 0;       ///< proportionality and union membership disagree
    double worst_invariant_defect = 0.0;  ///< largest proportionality defect of a twisted-invariant vector
};

/// Candidates: standard basis vectors, random vectors, random vectors of
/// each twisted space and random mixtures of two twisted spaces.
ProjectiveOracleResult projective_oracle(const LinearRep& r, std::size_t random_samples, std::uint64_t seed,
                                         double tol = 1e-8);

}  // namespace projeq
