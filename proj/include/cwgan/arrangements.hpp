#pragma once

#include <cstdint>
#include <vector>

#include "cwgan/matrix.hpp"

namespace cwgan {

// One ReLU activation pattern over the rows of a data matrix, together with a
// direction (and optional bias) that realizes it. Witnesses are kept strictly
// off the arrangement hyperplanes so the sign convention at exactly zero never
// matters downstream.
struct SignPattern {
    std::vector<std::uint8_t> pattern;  // length = row count, entries 0/1
    std::vector<double> witness;        // unit direction u realizing the pattern
    double bias = 0.0;                  // only meaningful when has_bias
    bool has_bias = false;
};

struct ArrangementSet {
    std::vector<SignPattern> patterns;  // deduplicated
    bool complete = false;              // true when enumeration is exhaustive
};

// Enumerate activation patterns diag(1[Zu + 1b ≥ 0]).
//   - rank(Z) ≤ 2 without bias, or rank(Z) ≤ 1 with bias: exact enumeration by
//     angular sweep over the (projected) plane of directions; complete = true.
//   - otherwise: deduplicated patterns of `budget` seeded sphere samples;
//     complete = false.
// Patterns realizable only by u = 0 (with zero bias) are excluded: the
// all-active pattern is kept only when some nonzero direction realizes it.
ArrangementSet enumerate_arrangements(const DataMatrix& z, bool with_bias,
                                      std::size_t budget, std::uint64_t seed = 0);

// True iff (2·diag(pattern) − I)·(Z·u + 1·b) ≥ −1e-10 elementwise, i.e. the
// direction u (with bias b) is consistent with the activation pattern.
bool cone_membership(const std::vector<double>& u, const SignPattern& pattern,
                     const DataMatrix& z, double bias = 0.0);

// Pattern bits written by the convention 1[t ≥ 0]; exposed for tests/oracles.
std::vector<std::uint8_t> pattern_of_direction(const DataMatrix& z,
                                               const std::vector<double>& u, double bias);

}  // namespace cwgan
