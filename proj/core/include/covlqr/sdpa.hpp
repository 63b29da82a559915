#pragma once

#include <filesystem>
#include <iosfwd>

#include "covlqr/conic.hpp"

namespace covlqr::conic {

// SDPA sparse format (.dat-s). The file describes
//
//   min c^T x  s.t.  sum_i x_i F_i - F_0 PSD,
//
// so a block with svec(F(x)) = offset + map x is written with F_0 = -offset.
// Equalities a^T x = b become one diagonal block holding the pairs
// a^T x - b >= 0 and b - a^T x >= 0; a comment line records which block it
// is so that import restores the zero cone. Variable spans are recorded in
// comment lines too. Other diagonal blocks import as 1x1 PSD blocks.
void write_sdpa(std::ostream& out, const ConicProgram& program);
void export_sdpa(const ConicProgram& program, const std::filesystem::path& path);

/// Throws ParseError (with line number) on malformed input.
ConicProgram read_sdpa(std::istream& in);
ConicProgram import_sdpa(const std::filesystem::path& path);

}  // namespace covlqr::conic
