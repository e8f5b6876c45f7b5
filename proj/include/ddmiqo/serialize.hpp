#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "ddmiqo/banded.hpp"
#include "ddmiqo/diagram.hpp"

namespace ddmiqo {

enum class DiagramFormat { kBinary, kJson };

/// Binary container, all fields little-endian:
///   "DDQ1", u32 version
///   header  i32 n, i32 k, u8 mode, f64 epsilon, i32 m, str automaton kind, i32 parameter
///   matrix  (k+1) bands of f64, band b holding n-b entries
///   nodes   per layer 0..n: i32 count, then i32 constraint state per node
///   stats   per layer 0..n: i64 merges, f64 max merge distance
///   arcs    i64 count, then per arc i32 tail, i32 head, u8 nu, i32 nnz, nnz x (i32 index, f64 value)
/// Strings are a u32 length followed by bytes. Node states are not stored.
void write_diagram_binary(const Diagram& d, std::ostream& out);
void write_diagram_json(const Diagram& d, std::ostream& out);

/// Reads either format, detected from the leading bytes.
Diagram read_diagram(std::istream& in);

void save_diagram(const Diagram& d, const std::string& path, DiagramFormat format = DiagramFormat::kBinary);
Diagram load_diagram(const std::string& path);

/// {"n": int, "k": int, "bands": [[diag], [offdiag-1], ...]}.
nlohmann::json matrix_to_json(const BandedMatrix& q);
BandedMatrix matrix_from_json(const nlohmann::json& j);
BandedMatrix load_matrix(const std::string& path);
void save_matrix(const BandedMatrix& q, const std::string& path);

}  // namespace ddmiqo
