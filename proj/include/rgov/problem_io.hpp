#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "rgov/lift.hpp"

namespace rgov {

// Problem-definition text (JSON): dynamics matrices, beta, degree, the two
// boxes, and constraints as {name, h, terms:[{theta_index, exponents,
// coeff}]}.  Terms are exponent-keyed so callers never hand-order basis
// rows; constant theta-free terms fold into the bound.  Unknown keys and
// invariant violations are rejected with the offending field named.
ProblemSpec parse_problem(const std::string& text);
ProblemSpec load_problem(const std::filesystem::path& path);

// Canonical serialization (sorted keys, round-trip-exact numbers); equal
// specs produce identical bytes, which the MOAS cache key relies on.
std::string problem_to_json(const ProblemSpec& spec);
void save_problem(const std::filesystem::path& path, const ProblemSpec& spec);

// FNV-1a over bytes; cache keys hash canonical JSON plus override text.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace rgov
