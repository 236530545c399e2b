#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>

#include "forcerecon/spectral/field.hpp"

namespace forcerecon {

/// "SPF1", u8 dim, u32 K, [u8 component count for vector fields], then little-endian f64
/// (re, im) pairs row-major over [-K, K]^dim, components concatenated.
void write_snapshot(const std::filesystem::path& path, const ScalarField& f);
void write_snapshot(const std::filesystem::path& path, const VectorField& f);

/// Scalar and vector files are told apart by their length.
std::variant<ScalarField, VectorField> read_snapshot(const std::filesystem::path& path);
ScalarField read_scalar_snapshot(const std::filesystem::path& path);
VectorField read_vector_snapshot(const std::filesystem::path& path);

class SnapshotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Writes to a sibling temporary and renames, so readers never observe partial files.
void write_file_atomically(const std::filesystem::path& path, const std::string& bytes);

}  // namespace forcerecon
