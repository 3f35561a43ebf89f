#pragma once

#include <string>
#include <vector>

#include "ospline/knots.hpp"
#include "ospline/ortho.hpp"

namespace ospline {

/// Shortest text form that round-trips a double exactly.
std::string format_double(double x);

/// Knot sequence text format: a header line `k=<order> domain=<interval|torus>`
/// followed by one knot value per line, in insertion order.
void write_knot_sequence(const std::string& path, const KnotSequence& seq);
KnotSequence read_knot_sequence(const std::string& path);

/// Dense matrix text format: a header line `<rows> <cols>`, then one
/// whitespace-separated row per line, row-major.
void write_dense_matrix(const std::string& path, int rows, int cols,
                        const std::vector<double>& row_major);
std::vector<double> read_dense_matrix(const std::string& path, int* rows,
                                      int* cols);

/// Orthonormal system table, one line per function.  Columns, in order:
/// index n, inserted position i0 (-1 for the initial block), norm2,
/// J left endpoint, J length, the k+1 window coefficients alpha_{i0-k..i0}
/// (zeros for the initial block), then the primal coefficients w on the
/// function's own level.  A `#` header line documents the layout.
void write_system_table(const std::string& path, const OrthoSystem& sys);

}  // namespace ospline
