#pragma once

#include <cstdint>
#include <filesystem>

namespace fixtures {

// Stand-ins with the public column layouts, row counts and group shares of the
// three real datasets. Values are random; only the pipeline is exercised.

/// parkinsons_updrs.data layout: 5875 rows, 33% female (sex = 1).
void write_parkinson(const std::filesystem::path& path, std::uint64_t seed);

/// LSAC layout: 22407 rows, 39 with a missing declared field, 88.2% White
/// among the complete rows.
void write_lsac(const std::filesystem::path& path, std::uint64_t seed);

/// german.data layout: 1000 space-separated rows without header, 310 female
/// applicants (A92), every category level present.
void write_german(const std::filesystem::path& path, std::uint64_t seed);

}  // namespace fixtures
