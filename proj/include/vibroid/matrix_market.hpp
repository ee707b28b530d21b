#pragma once

#include <filesystem>
#include <string>

#include "vibroid/linalg.hpp"

namespace vibroid::mm {

/// Reads a Matrix Market file into a dense matrix.
///
/// Supported headers: `matrix` object, `array` or `coordinate` format,
/// `real` or `integer` field, `general` or `symmetric` symmetry.
/// Symmetric storage is expanded to a full matrix on load.
Matrix read_matrix(const std::filesystem::path& file);

/// Writes a dense matrix in `array real general` form.
/// Values are printed with enough digits to round-trip exactly.
void write_matrix(const std::filesystem::path& file, const Matrix& m,
                  const std::string& comment = "");

}  // namespace vibroid::mm
