#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "fvnn/types.hpp"

namespace fvnn {

using Rng = std::mt19937_64;

/// Mixes a base seed with a sequence of keys (job index, trial, ...) into an
/// independent stream seed. Stable across platforms.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys);

Matrix standard_normal(Rng& rng, Index rows, Index cols);

/// Haar-distributed orthogonal matrix via QR of a Gaussian matrix with the
/// sign of R's diagonal folded into Q.
Matrix random_orthogonal(Rng& rng, Index n);

}  // namespace fvnn
