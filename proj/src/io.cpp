#include "pd/io.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

#include "pd/error.hpp"

namespace pd {

namespace {

std::string dotted(const Word& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "." : "") + w[i].str();
  return s;
}

struct Cursor {
  std::string_view t;
  std::size_t i = 0;

  void ws() {
    while (i < t.size() && std::isspace(static_cast<unsigned char>(t[i]))) ++i;
  }
  bool done() {
    ws();
    return i >= t.size();
  }
  [[noreturn]] void error(const std::string& msg) const {
    fail(Errc::Parse, msg + " at column " + std::to_string(i + 1));
  }
  void expect(char c) {
    ws();
    if (i >= t.size() || t[i] != c) error(std::string("expected '") + c + "'");
    ++i;
  }
  bool peek(char c) {
    ws();
    return i < t.size() && t[i] == c;
  }
  std::string ident() {
    ws();
    std::size_t s = i;
    while (i < t.size() && (std::isalnum(static_cast<unsigned char>(t[i])) || t[i] == '_' || t[i] == '-' || t[i] == '+'))
      ++i;
    if (s == i) error("expected a name");
    return std::string(t.substr(s, i - s));
  }

  WireLabel label() {
    ws();
    if (i < t.size() && (t[i] == 'L' || t[i] == 'R')) {
      bool alone = i + 1 >= t.size() || !(std::isalnum(static_cast<unsigned char>(t[i + 1])) || t[i + 1] == '_' ||
                                          t[i + 1] == '^');
      if (alone) return t[i++] == 'L' ? kL : kR;
    }
    return parse_formula_at(t, i);
  }

  Formula formula() { return parse_formula_at(t, i); }

  // labels separated by `sep` until `stop` (not consumed)
  Word word(char sep, char stop) {
    Word w;
    if (peek(stop)) return w;
    w.push_back(label());
    while (peek(sep)) {
      ++i;
      w.push_back(label());
    }
    return w;
  }

  GateType gate() {
    expect('@');
    std::string name = ident();
    if (name == "one") return GateType::one();
    if (name == "bot") return GateType::bot();
    expect('(');
    GateType g;
    if (name == "ax" || name == "cut") {
      Formula a = formula();
      g = name == "ax" ? GateType::ax(a) : GateType::cut(a);
    } else if (name == "tensor" || name == "par" || name == "twist") {
      Formula a = formula();
      expect(',');
      Formula b = formula();
      g = name == "tensor" ? GateType::tensor(a, b) : name == "par" ? GateType::par(a, b) : GateType::twist(a, b);
    } else if (name == "big") {
      Word w = word('.', ';');
      expect(';');
      Word w2 = word('.', ')');
      g = GateType::big(std::move(w), std::move(w2));
    } else {
      error("unknown gate @" + name);
    }
    expect(')');
    return g;
  }

  Slot slot() {
    if (peek('@')) return Gate{gate()};
    return Identity{label()};
  }
};

struct Lines {
  std::vector<std::string> lines;
  std::size_t k = 0;

  explicit Lines(std::string_view text) {
    std::size_t s = 0;
    while (s <= text.size()) {
      std::size_t e = text.find('\n', s);
      if (e == std::string_view::npos) e = text.size();
      std::string line(text.substr(s, e - s));
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
      lines.push_back(line);
      s = e + 1;
    }
  }

  void skip_blank() {
    while (k < lines.size() && lines[k].find_first_not_of(" \t\r") == std::string::npos) ++k;
  }
  bool done() {
    skip_blank();
    return k >= lines.size();
  }
  [[noreturn]] void error(const std::string& msg) const {
    fail(Errc::Parse, "line " + std::to_string(std::min(k, lines.size() - 1) + 1) + ": " + msg);
  }
  // Next non-blank line; its first word must be `key`. Returns the rest.
  std::string take(const std::string& key) {
    if (done()) error("expected '" + key + "', got end of input");
    const std::string& line = lines[k];
    std::size_t b = line.find_first_not_of(" \t");
    std::size_t e = line.find_first_of(" \t", b);
    std::string head = line.substr(b, e == std::string::npos ? std::string::npos : e - b);
    if (head != key) error("expected '" + key + "', got '" + head + "'");
    ++k;
    return e == std::string::npos ? "" : line.substr(e + 1);
  }
  std::string peek_key() {
    if (done()) return "";
    const std::string& line = lines[k];
    std::size_t b = line.find_first_not_of(" \t");
    std::size_t e = line.find_first_of(" \t", b);
    return line.substr(b, e == std::string::npos ? std::string::npos : e - b);
  }

  // Runs f on a cursor over `rest`, attaching the line number to parse errors.
  template <class F>
  auto parse(const std::string& rest, F f) {
    try {
      Cursor c{rest};
      auto v = f(c);
      if (!c.done()) c.error("trailing input");
      return v;
    } catch (const Error& e) {
      if (e.code() != Errc::Parse) throw;
      --k;
      error(e.detail());
    }
  }
};

void header(Lines& in, const std::string& kind) {
  std::string rest = in.take("pdiag");
  std::istringstream is(rest);
  std::string k;
  int v = 0;
  if (!(is >> k >> v) || k != kind) in.error("expected header 'pdiag " + kind + " " + std::to_string(kFormatVersion) + "'");
  if (v != kFormatVersion) in.error("unsupported format version " + std::to_string(v));
}

Diagram diagram_body(Lines& in) {
  std::string sig_name = in.take("signature");
  while (!sig_name.empty() && sig_name.front() == ' ') sig_name.erase(0, 1);
  Signature sig;
  if (sig_name == "controlled")
    sig = Signature::Controlled;
  else if (sig_name == "uncontrolled")
    sig = Signature::Uncontrolled;
  else
    in.error("unknown signature '" + sig_name + "'");
  Word input = in.parse(in.take("input"), [](Cursor& c) {
    Word w;
    while (!c.done()) w.push_back(c.label());
    return w;
  });
  std::vector<Layer> layers;
  while (in.peek_key() == "layer") {
    layers.push_back(in.parse(in.take("layer"), [](Cursor& c) {
      Layer l;
      while (!c.done()) l.push_back(c.slot());
      return l;
    }));
  }
  in.take("end");
  return Diagram(sig, std::move(input), std::move(layers));
}

void diagram_block(std::string& out, const Diagram& phi) {
  out += "signature ";
  out += phi.signature() == Signature::Controlled ? "controlled" : "uncontrolled";
  out += "\ninput";
  for (const WireLabel& l : phi.input()) out += " " + l.str();
  out += "\n";
  for (const Layer& layer : phi.layers()) {
    out += "layer";
    for (const Slot& s : layer) out += " " + slot_str(s);
    out += "\n";
  }
  out += "end\n";
}

std::string head_line(const std::string& kind) { return "pdiag " + kind + " " + std::to_string(kFormatVersion) + "\n"; }

}  // namespace

std::string slot_str(const Slot& s) {
  if (auto* id = std::get_if<Identity>(&s)) return id->label.str();
  const GateType& g = std::get<Gate>(s).type;
  if (g.family == Family::Big) return "@big(" + dotted(g.w) + ";" + dotted(g.w2) + ")";
  return g.str();
}

std::string write_word(const Word& w) { return word_str(w); }

Word parse_word(std::string_view text) {
  Cursor c{text};
  Word w;
  while (!c.done()) w.push_back(c.label());
  return w;
}

std::string write_diagram(const Diagram& phi) {
  std::string out = head_line("diagram");
  diagram_block(out, phi);
  return out;
}

Diagram read_diagram(std::string_view text) {
  Lines in(text);
  header(in, "diagram");
  Diagram d = diagram_body(in);
  if (!in.done()) in.error("trailing input");
  return d;
}

std::string header_of(std::string_view text) {
  Lines in(text);
  if (in.done()) return "";
  return in.lines[in.k];
}

std::string write_trace(const std::string& polygraph, const RewriteTrace& t) {
  std::string out = head_line("trace");
  out += "polygraph " + polygraph + "\ninitial\n";
  diagram_block(out, t.initial);
  for (const TraceStep& s : t.steps) {
    out += "step " + s.rule + " ";
    if (s.site.steps.empty()) out += "-";
    for (std::size_t i = 0; i < s.site.steps.size(); ++i) out += (i ? "," : "") + std::to_string(s.site.steps[i]);
    for (const auto& [k, v] : s.site.substitution.vars) out += " ?" + k + "=" + v.str();
    for (const auto& [k, v] : s.site.substitution.words) out += " " + k + "=[" + dotted(v) + "]";
    out += "\n";
  }
  out += "final\n";
  diagram_block(out, t.final);
  return out;
}

TraceFile read_trace(std::string_view text) {
  Lines in(text);
  header(in, "trace");
  TraceFile f;
  f.polygraph = in.parse(in.take("polygraph"), [](Cursor& c) { return c.ident(); });
  in.take("initial");
  f.trace.initial = diagram_body(in);
  while (in.peek_key() == "step") {
    f.trace.steps.push_back(in.parse(in.take("step"), [](Cursor& c) {
      TraceStep s;
      s.rule = c.ident();
      if (c.peek('-')) {
        ++c.i;
      } else {
        c.ws();
        do {
          if (c.peek(',')) ++c.i;
          c.ws();
          std::size_t b = c.i;
          while (c.i < c.t.size() && std::isdigit(static_cast<unsigned char>(c.t[c.i]))) ++c.i;
          if (b == c.i) c.error("expected a step index");
          s.site.steps.push_back(std::stoul(std::string(c.t.substr(b, c.i - b))));
        } while (c.peek(','));
      }
      while (!c.done()) {
        bool var = c.peek('?');
        if (var) ++c.i;
        std::string k = c.ident();
        c.expect('=');
        if (var) {
          s.site.substitution.vars.emplace(k, c.formula());
        } else {
          c.expect('[');
          s.site.substitution.words.emplace(k, c.word('.', ']'));
          c.expect(']');
        }
      }
      return s;
    }));
  }
  in.take("final");
  f.trace.final = diagram_body(in);
  if (!in.done()) in.error("trailing input");
  return f;
}

std::string write_rules(const Polygraph& p, std::size_t width) {
  std::string out = head_line("rules");
  out += "polygraph " + p.name() + "\n";
  for (const RewriteRule& r : p.schemas(width)) {
    out += "rule " + r.name + " group " + r.group;
    for (const std::string& w : r.word_vars) out += " word " + w;
    out += "\nsource\n";
    diagram_block(out, r.source);
    out += "target\n";
    diagram_block(out, r.target);
  }
  for (const Polygraph::Entry& e : p.entries())
    if (e.kind == Polygraph::Entry::Kind::Procedural)
      out += "procedure " + e.name + " group " + e.group + "  # " + e.proc->describe() + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// rendering

namespace {

constexpr int kDx = 60, kDy = 70, kMargin = 40, kHalf = 20;

struct Placed {
  enum class Kind { Wire, Box, Cross } kind;
  int x0 = 0, x1 = 0;  // box extent
  int y = 0;           // level top
  std::vector<int> in_x, out_x;
  std::vector<WireLabel> in_l, out_l;
  std::string text;
  Family family = Family::One;
};

struct Layout {
  std::vector<Placed> items;
  std::vector<Word> words;  // word at each level
  int width = 0, height = 0;
};

int xpos(std::size_t i) { return kMargin + static_cast<int>(i) * kDx; }

Layout layout(const Diagram& phi) {
  Layout lay;
  const Signature sig = phi.signature();
  Word cur = phi.input();
  lay.words.push_back(cur);
  std::size_t widest = cur.size();
  int y = kMargin;
  for (const Layer& layer : phi.layers()) {
    std::size_t i = 0, o = 0;
    Word next;
    for (const Slot& s : layer) {
      Placed p;
      p.y = y;
      p.in_l = slot_inputs(s, sig);
      p.out_l = slot_outputs(s, sig);
      for (std::size_t k = 0; k < p.in_l.size(); ++k) p.in_x.push_back(xpos(i + k));
      for (std::size_t k = 0; k < p.out_l.size(); ++k) p.out_x.push_back(xpos(o + k));
      if (auto* g = std::get_if<Gate>(&s)) {
        p.family = g->type.family;
        p.kind = p.family == Family::Twist ? Placed::Kind::Cross : Placed::Kind::Box;
        std::vector<int> xs = p.in_x;
        xs.insert(xs.end(), p.out_x.begin(), p.out_x.end());
        if (xs.empty()) xs.push_back(xpos(o));
        p.x0 = *std::min_element(xs.begin(), xs.end()) - kHalf;
        p.x1 = *std::max_element(xs.begin(), xs.end()) + kHalf;
      } else {
        p.kind = Placed::Kind::Wire;
      }
      i += p.in_l.size();
      o += p.out_l.size();
      next.insert(next.end(), p.out_l.begin(), p.out_l.end());
      lay.items.push_back(std::move(p));
    }
    cur = next;
    lay.words.push_back(cur);
    widest = std::max(widest, cur.size());
    y += kDy;
  }
  lay.width = 2 * kMargin + static_cast<int>(widest ? widest - 1 : 0) * kDx + 2 * kHalf;
  lay.height = y + kMargin;
  return lay;
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '&')
      o += "&amp;";
    else if (c == '<')
      o += "&lt;";
    else if (c == '>')
      o += "&gt;";
    else
      o += c;
  }
  return o;
}

std::string pretty(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom: return (f.is_meta() ? "?" : "") + f.name() + (f.dual() ? "\u22a5" : "");
    case Formula::Kind::One: return "1";
    case Formula::Kind::Bot: return "\u22a5";
    case Formula::Kind::Tensor: return "(" + pretty(f.left()) + "\u2297" + pretty(f.right()) + ")";
    case Formula::Kind::Par: return "(" + pretty(f.left()) + "\u214b" + pretty(f.right()) + ")";
  }
  return "";
}

std::string pretty(const WireLabel& l) { return l.is_formula() ? pretty(l.formula()) : l.str(); }

std::string tex(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      std::string n = f.name();
      if (f.is_meta()) n = "\\mathsf{" + n + "}";
      return f.dual() ? n + "^\\perp" : n;
    }
    case Formula::Kind::One: return "1";
    case Formula::Kind::Bot: return "\\bot";
    case Formula::Kind::Tensor: return "(" + tex(f.left()) + "\\otimes " + tex(f.right()) + ")";
    case Formula::Kind::Par: return "(" + tex(f.left()) + "\\parr " + tex(f.right()) + ")";
  }
  return "";
}

std::string tex(const WireLabel& l) { return l.is_formula() ? tex(l.formula()) : "\\mathsf{" + l.str() + "}"; }

const char* symbol(Family f) {
  switch (f) {
    case Family::Tensor: return "\u2297";
    case Family::Par: return "\u214b";
    case Family::Ax: return "ax";
    case Family::Cut: return "cut";
    case Family::One: return "1";
    case Family::Bot: return "\u22a5";
    case Family::Big: return "B";
    default: return "";
  }
}

const char* tex_symbol(Family f) {
  switch (f) {
    case Family::Tensor: return "$\\otimes$";
    case Family::Par: return "$\\parr$";
    case Family::Ax: return "ax";
    case Family::Cut: return "cut";
    case Family::One: return "$1$";
    case Family::Bot: return "$\\bot$";
    case Family::Big: return "$B$";
    default: return "";
  }
}

// Segments shared by both emitters: (x0,y0,x1,y1,control?)
struct Seg {
  int x0, y0, x1, y1;
  bool control;
};

std::vector<Seg> segments(const Layout& lay) {
  std::vector<Seg> out;
  const int top = kDy * 3 / 10, bottom = kDy * 7 / 10;
  for (const Placed& p : lay.items) {
    switch (p.kind) {
      case Placed::Kind::Wire:
        out.push_back({p.in_x[0], p.y, p.out_x[0], p.y + kDy, p.in_l[0].is_control()});
        break;
      case Placed::Kind::Cross:
        out.push_back({p.in_x[0], p.y, p.out_x[1], p.y + kDy, false});
        out.push_back({p.in_x[1], p.y, p.out_x[0], p.y + kDy, false});
        break;
      case Placed::Kind::Box:
        for (std::size_t k = 0; k < p.in_x.size(); ++k)
          out.push_back({p.in_x[k], p.y, p.in_x[k], p.y + top, p.in_l[k].is_control()});
        for (std::size_t k = 0; k < p.out_x.size(); ++k)
          out.push_back({p.out_x[k], p.y + bottom, p.out_x[k], p.y + kDy, p.out_l[k].is_control()});
        break;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const Diagram& phi) {
  const Layout lay = layout(phi);
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << lay.width << "\" height=\"" << lay.height
    << "\" viewBox=\"0 0 " << lay.width << " " << lay.height << "\" font-family=\"serif\" font-size=\"13\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const Seg& s : segments(lay)) {
    o << "<line x1=\"" << s.x0 << "\" y1=\"" << s.y0 << "\" x2=\"" << s.x1 << "\" y2=\"" << s.y1 << "\" stroke=\""
      << (s.control ? "#888888\" stroke-dasharray=\"4 3" : "black") << "\" stroke-width=\"1.5\"/>\n";
  }
  const int top = kDy * 3 / 10, bottom = kDy * 7 / 10;
  for (const Placed& p : lay.items) {
    if (p.kind != Placed::Kind::Box) continue;
    o << "<rect x=\"" << p.x0 << "\" y=\"" << p.y + top << "\" width=\"" << p.x1 - p.x0 << "\" height=\""
      << bottom - top << "\" rx=\"4\" fill=\"" << (p.family == Family::Big ? "#fde9c8" : "#e8eef8")
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << (p.x0 + p.x1) / 2 << "\" y=\"" << p.y + kDy / 2 + 5 << "\" text-anchor=\"middle\">"
      << xml_escape(symbol(p.family)) << "</text>\n";
  }
  auto labels = [&](const Word& w, int y) {
    for (std::size_t i = 0; i < w.size(); ++i)
      o << "<text x=\"" << xpos(i) << "\" y=\"" << y << "\" text-anchor=\"middle\""
        << (w[i].is_control() ? " fill=\"#888888\"" : "") << ">" << xml_escape(pretty(w[i])) << "</text>\n";
  };
  labels(lay.words.front(), kMargin - 8);
  labels(lay.words.back(), kMargin + static_cast<int>(phi.layers().size()) * kDy + 18);
  o << "</svg>\n";
  return o.str();
}

std::string render_tikz(const Diagram& phi) {
  const Layout lay = layout(phi);
  std::ostringstream o;
  // one unit = 60 layout pixels, y pointing down
  auto cx = [](int x) {
    const int v = x * 100 / 60;
    std::string frac = std::to_string(v % 100);
    return std::to_string(v / 100) + "." + (frac.size() < 2 ? "0" : "") + frac;
  };
  auto cy = [&](int y) { return "-" + cx(y); };
  o << "\\begin{tikzpicture}\n";
  for (const Seg& s : segments(lay))
    o << "  \\draw" << (s.control ? "[gray, dashed]" : "") << " (" << cx(s.x0) << "," << cy(s.y0) << ") -- ("
      << cx(s.x1) << "," << cy(s.y1) << ");\n";
  const int top = kDy * 3 / 10, bottom = kDy * 7 / 10;
  for (const Placed& p : lay.items) {
    if (p.kind != Placed::Kind::Box) continue;
    o << "  \\draw[fill=" << (p.family == Family::Big ? "orange!20" : "blue!8") << ", rounded corners=2pt] ("
      << cx(p.x0) << "," << cy(p.y + top) << ") rectangle (" << cx(p.x1) << "," << cy(p.y + bottom) << ");\n";
    o << "  \\node at (" << cx((p.x0 + p.x1) / 2) << "," << cy(p.y + kDy / 2) << ") {" << tex_symbol(p.family)
      << "};\n";
  }
  auto labels = [&](const Word& w, int y, const char* anchor) {
    for (std::size_t i = 0; i < w.size(); ++i)
      o << "  \\node[" << anchor << (w[i].is_control() ? ", gray" : "") << "] at (" << cx(xpos(i)) << "," << cy(y)
        << ") {$" << tex(w[i]) << "$};\n";
  };
  labels(lay.words.front(), kMargin, "above");
  labels(lay.words.back(), kMargin + static_cast<int>(phi.layers().size()) * kDy, "below");
  o << "\\end{tikzpicture}\n";
  return o.str();
}

}  // namespace pd
