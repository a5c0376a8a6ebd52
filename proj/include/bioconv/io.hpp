#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bioconv/solver.hpp"

namespace bioconv {

/// Malformed or mismatched field files.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Legacy VTK STRUCTURED_POINTS (ASCII). Cell data: n_hat, c_hat, n, c, p
/// and the velocity averaged to cell centres. Visualization copy only.
void write_vtk(const FieldState& state, const std::string& path);
std::string vtk_text(const FieldState& state);

/// Lossless sidecar, see docs/formats.md. All numbers little-endian:
///   8 bytes  magic "BIOC1\0\0\0"
///   3 x u32  cells per axis
///   3 x f64  edge lengths
///   2 x f64  alpha1, alpha2
///   u32      field count
///   per field: u32 name length, name bytes, u64 value count, f64 values
/// Fields: u_x, u_y, u_z (all faces), p, n_hat, c_hat.
std::vector<std::uint8_t> encode_sidecar(const FieldState& state);
FieldState decode_sidecar(const std::vector<std::uint8_t>& bytes);
void write_sidecar(const FieldState& state, const std::string& path);
FieldState read_sidecar(const std::string& path);

/// Writes <base>.vtk and <base>.bioc; returns the two paths.
std::pair<std::string, std::string> write_fields(const FieldState& state, const std::string& base);
/// Reads the sidecar (the VTK copy is lossy and never read back).
FieldState read_fields(const std::string& sidecar_path);

std::string solve_report_to_json(const SolveReport& report, const PicardHistory& history, int indent = 2);

}  // namespace bioconv
