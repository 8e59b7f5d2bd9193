#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "pd/diagram.hpp"
#include "pd/rewrite.hpp"

namespace pd {

inline constexpr int kFormatVersion = 1;

/// Text form of a diagram (grammar in docs/formats.md). Ends with "end\n".
std::string write_diagram(const Diagram& phi);
/// Parse errors carry a line number. Chaining errors are BoundaryMismatch.
Diagram read_diagram(std::string_view text);

std::string write_word(const Word& w);
Word parse_word(std::string_view text);

/// Slot token as written in a layer line: a label or `@family(...)`.
std::string slot_str(const Slot& s);

struct TraceFile {
  std::string polygraph;
  RewriteTrace trace;
};

std::string write_trace(const std::string& polygraph, const RewriteTrace& t);
TraceFile read_trace(std::string_view text);

/// Every rule of `p` with families expanded up to word length `width`.
/// Procedural rules are listed by name with their description.
std::string write_rules(const Polygraph& p, std::size_t width);

/// First non-comment line of a file, e.g. "pdiag diagram 1".
std::string header_of(std::string_view text);

std::string render_svg(const Diagram& phi);
/// A tikzpicture; needs \usepackage{tikz} and \usepackage{cmll} for \parr.
std::string render_tikz(const Diagram& phi);

}  // namespace pd
