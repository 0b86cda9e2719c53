#pragma once

#include <cstdint>
#include <random>

#include "qdiv/linalg.hpp"

namespace qdiv {

using Rng = std::mt19937_64;

/// Independent sub-seed for stream `index` of a base seed (splitmix64 mix).
/// Restart i of a multistart search always draws from derive_seed(seed, i),
/// so results do not depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Matrix with i.i.d. standard complex Gaussian entries (real and imaginary
/// parts each N(0, 1/2)).
CMatrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
CMatrix haar_unitary(Eigen::Index dim, Rng& rng);

/// Uniformly random unit vector.
CVector random_unit_vector(Eigen::Index dim, Rng& rng);

}  // namespace qdiv
