#pragma once

// Field dump format: `<stem>.json` holds {nx, ny, x0, y0, h, components};
// `<stem>.csv` holds the values row-major, one line per grid row, vector
// components interleaved. Numbers are written with 17 significant digits
// so a dump/load cycle is bit exact.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "plab/field.hpp"

namespace plab {

/// 17-significant-digit decimal form of `v`.
std::string format_double(double v);
/// Parses a full token as a double; throws std::invalid_argument otherwise.
double parse_double(std::string_view token);

/// `seed`, when given, is recorded in the JSON sidecar.
void write_field(const ScalarField& f, const std::filesystem::path& stem,
                 std::optional<std::uint64_t> seed = std::nullopt);
void write_field(const VectorField& f, const std::filesystem::path& stem,
                 std::optional<std::uint64_t> seed = std::nullopt);

ScalarField read_scalar_field(const std::filesystem::path& stem);
VectorField read_vector_field(const std::filesystem::path& stem);

}  // namespace plab
