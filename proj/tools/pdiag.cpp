// pdiag: command-line front end for the proof diagram library.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pd/error.hpp"
#include "pd/io.hpp"
#include "pd/logic.hpp"
#include "pd/rewrite.hpp"
#include "pd/semantics.hpp"
#include "pd/translate.hpp"

using json = nlohmann::ordered_json;
using namespace pd;

namespace {

enum Exit { kOk = 0, kNo = 1, kParse = 2, kContract = 3, kUnknown = 10 };

bool g_json = false;

std::string slurp(const std::string& path) {
  std::ostringstream s;
  if (path == "-") {
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::Parse, "cannot read " + path);
  s << f.rdbuf();
  return s.str();
}

void spit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::Contract, "cannot write " + path);
  f << text;
}

bool is_diagram_file(const std::string& text) { return header_of(text).rfind("pdiag diagram", 0) == 0; }

// Derivation files: optional "pdiag derivation 1" header, '#' comments, one s-expression.
Derivation read_derivation(const std::string& text) {
  std::string body;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (first && line.find_first_not_of(" \t\r") != std::string::npos) {
      first = false;
      if (line.rfind("pdiag", 0) == 0) {
        std::istringstream hs(line);
        std::string p, kind;
        int v = 0;
        hs >> p >> kind >> v;
        if (kind != "derivation" || v != kFormatVersion) fail(Errc::Parse, "line 1: expected 'pdiag derivation 1'");
        continue;
      }
    }
    body += line + "\n";
  }
  std::size_t b = body.find_first_not_of(" \t\r\n"), e = body.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) fail(Errc::Parse, "empty derivation file");
  return parse_derivation(std::string_view(body).substr(b, e - b + 1));
}

std::string write_derivation(const Derivation& d) {
  return "pdiag derivation " + std::to_string(kFormatVersion) + "\n" + to_string(d) + "\n";
}

const std::string& polygraph_name(const std::string& flag) {
  static const std::map<std::string, std::string> names = {
      {"S", "S"}, {"mll-ctrl", "MLL_ctrl"}, {"mll", "MLL_big"}, {"sem", "Sem"}, {"mllu-cut", "MLLu_Cut"}};
  auto it = names.find(flag);
  if (it != names.end()) return it->second;
  return polygraph(flag).name();  // also accepts the library names
}

json trace_json(const RewriteTrace& t) {
  json steps = json::array();
  for (const TraceStep& s : t.steps) {
    json vars = json::object();
    for (const auto& [k, v] : s.site.substitution.vars) vars[k] = v.str();
    steps.push_back({{"rule", s.rule}, {"steps", s.site.steps}, {"vars", vars}});
  }
  return {{"initial", write_diagram(t.initial)}, {"steps", steps}, {"final", write_diagram(t.final)}};
}

int emit(const json& j, const std::string& text, int code) {
  if (g_json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
  return code;
}

int cmd_check(const std::string& file) {
  Derivation d;
  try {
    d = read_derivation(slurp(file));
  } catch (const Error& e) {
    if (e.code() != Errc::InvalidRule) throw;
    return emit({{"valid", false}, {"error", e.detail()}}, "invalid: " + e.detail() + "\n", kNo);
  }
  Sequent s = check_derivation(d);
  return emit({{"valid", true},
               {"conclusion", sequent_str(s)},
               {"rules", rule_count(d)},
               {"cuts", cut_count(d)}},
              "valid |- " + sequent_str(s) + "\n", kOk);
}

int cmd_represent(const std::string& file, const std::string& sig) {
  Signature s = sig == "uncontrolled" ? Signature::Uncontrolled : Signature::Controlled;
  std::string text = write_diagram(represent(read_derivation(slurp(file)), s));
  return emit({{"diagram", text}}, text, kOk);
}

int cmd_seq(const std::string& file) {
  Diagram phi = read_diagram(slurp(file));
  std::size_t n = 0;
  if (!is_sequentializable(phi, &n))
    return emit({{"sequentializable", false}, {"comparisons", n}}, "not sequentializable\n", kNo);
  Derivation d = sequentialize(phi);
  std::string text = write_derivation(d);
  return emit({{"sequentializable", true},
               {"comparisons", n},
               {"conclusion", sequent_str(d.conclusion)},
               {"derivation", to_string(d)}},
              text, kOk);
}

int finish_rewrite(const std::string& poly, const Diagram& nf, const RewriteTrace& t, const std::string& trace_path) {
  if (!trace_path.empty() && trace_path != "-") spit(trace_path, write_trace(poly, t));
  const std::string diagram = write_diagram(nf);
  return emit({{"polygraph", poly}, {"diagram", diagram}, {"trace", trace_json(t)}},
              trace_path == "-" ? diagram + write_trace(poly, t) : diagram, kOk);
}

int cmd_normalize(const std::string& file, const std::string& flag, const std::string& trace_path, std::size_t fuel) {
  const std::string& name = polygraph_name(flag);
  auto [nf, t] = normalize(polygraph(name), read_diagram(slurp(file)), fuel);
  return finish_rewrite(name, nf, t, trace_path);
}

int cmd_cut_elim(const std::string& file, const std::string& trace_path, bool derivation) {
  std::string text = slurp(file);
  Diagram phi = is_diagram_file(text) ? read_diagram(text) : represent(read_derivation(text));
  auto [nf, t] = eliminate_cuts(phi);
  if (!derivation) return finish_rewrite("Sem", nf, t, trace_path);
  if (!trace_path.empty()) spit(trace_path, write_trace("Sem", t));
  Derivation d = sequentialize(nf);
  return emit({{"derivation", to_string(d)}, {"conclusion", sequent_str(d.conclusion)}}, write_derivation(d), kOk);
}

int cmd_equiv(const std::string& f1, const std::string& f2, const std::string& mode, std::size_t bound,
              const std::string& cert_path) {
  Derivation d1 = read_derivation(slurp(f1)), d2 = read_derivation(slurp(f2));
  EquivResult r = equivalent(d1, d2, bound, mode == "sim" ? EquivMode::Sim : EquivMode::Sem);
  json j = {{"verdict", verdict_name(r.verdict)}, {"mode", mode}, {"bound", bound}, {"reason", r.reason},
            {"explored", r.explored}};
  if (r.meeting) {
    j["certificate"] = {
        {"meeting", write_diagram(*r.meeting)}, {"left", trace_json(r.left)}, {"right", trace_json(r.right)}};
    if (!cert_path.empty()) spit(cert_path, j["certificate"].dump(2) + "\n");
  }
  int code = r.verdict == Verdict::Yes ? kOk : r.verdict == Verdict::No ? kNo : kUnknown;
  return emit(j, std::string(verdict_name(r.verdict)) + (r.reason.empty() ? "" : "  (" + r.reason + ")") + "\n", code);
}

int cmd_render(const std::string& file, const std::string& format, const std::string& out) {
  Diagram phi = read_diagram(slurp(file));
  std::string text = format == "tikz" ? render_tikz(phi) : render_svg(phi);
  if (!out.empty()) {
    spit(out, text);
    return emit({{"format", format}, {"file", out}}, "", kOk);
  }
  return emit({{"format", format}, {"output", text}}, text, kOk);
}

int cmd_enumerate(const std::string& sequent, std::size_t max_rules) {
  std::vector<Derivation> ds = enumerate_derivations(parse_sequent(sequent), max_rules);
  json arr = json::array();
  std::string text;
  for (const Derivation& d : ds) {
    arr.push_back(to_string(d));
    text += to_string(d) + "\n";
  }
  return emit({{"sequent", sequent}, {"max_rules", max_rules}, {"count", ds.size()}, {"derivations", arr}}, text,
              ds.empty() ? kNo : kOk);
}

int cmd_structure(const std::string& file) {
  std::string text = proof_structure_str(to_proof_structure(read_diagram(slurp(file))));
  return emit({{"structure", text}}, text, kOk);
}

int cmd_rules(const std::string& flag, std::size_t width) {
  const Polygraph& p = polygraph(polygraph_name(flag));
  std::string text = write_rules(p, width);
  return emit({{"polygraph", p.name()}, {"rules", text}}, text, kOk);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pdiag: proof diagrams for multiplicative linear logic with units"};
  app.require_subcommand(1);
  app.add_flag("--json", g_json, "Machine-readable output");

  std::string file, file2, sig = "ctrl", poly, trace, format = "svg", out, mode = "sem", seq, cert;
  std::size_t fuel = 100000, bound = 12, max_rules = 6, width = 3;
  bool as_derivation = false;

  auto* check = app.add_subcommand("check", "Check a derivation and print its conclusion");
  check->add_option("file", file, "Derivation file")->required();

  auto* rep = app.add_subcommand("represent", "Translate a derivation into a diagram");
  rep->add_option("file", file, "Derivation file")->required();
  rep->add_option("--sig", sig, "Signature")->check(CLI::IsMember({"ctrl", "uncontrolled"}));

  auto* sq = app.add_subcommand("seq", "Sequentialize a diagram");
  sq->add_option("file", file, "Diagram file")->required();

  auto* norm = app.add_subcommand("normalize", "Rewrite a diagram to normal form");
  norm->add_option("file", file, "Diagram file")->required();
  norm->add_option("--polygraph", poly, "S | mll-ctrl | mll | sem")->required();
  norm->add_option("--emit-trace", trace, "Write the trace to a file ('-' appends it to stdout)");
  norm->add_option("--fuel", fuel, "Step limit");

  auto* ce = app.add_subcommand("cut-elim", "Eliminate cuts from a diagram or derivation");
  ce->add_option("file", file, "Diagram or derivation file")->required();
  ce->add_option("--emit-trace", trace, "Write the trace to a file ('-' appends it to stdout)");
  ce->add_flag("--derivation", as_derivation, "Print the cut-free derivation instead of the diagram");

  auto* eq = app.add_subcommand("equiv", "Decide equivalence of two derivations up to a bound");
  eq->add_option("d1", file, "Derivation file")->required();
  eq->add_option("d2", file2, "Derivation file")->required();
  eq->add_option("--mode", mode, "sim | sem")->check(CLI::IsMember({"sim", "sem"}));
  eq->add_option("--bound", bound, "Moves per side");
  eq->add_option("--certificate", cert, "Write the certificate as JSON");

  auto* rd = app.add_subcommand("render", "Draw a diagram");
  rd->add_option("file", file, "Diagram file")->required();
  rd->add_option("--format", format, "svg | tikz")->check(CLI::IsMember({"svg", "tikz"}));
  rd->add_option("-o,--output", out, "Output file");

  auto* st = app.add_subcommand("structure", "Print the proof structure of a diagram");
  st->add_option("file", file, "Diagram file")->required();

  auto* rules = app.add_subcommand("rules", "Dump the rules of a polygraph");
  rules->add_option("polygraph", poly, "S | mll-ctrl | mll | sem | mllu-cut")->required();
  rules->add_option("--width", width, "Expand rule families up to this word length");

  auto* oracle = app.add_subcommand("oracle", "Test support");
  oracle->require_subcommand(1);
  auto* en = oracle->add_subcommand("enumerate", "List cut-free derivations of a sequent");
  en->add_option("sequent", seq, "Comma-separated formulas")->required();
  en->add_option("--max-rules", max_rules, "Rule limit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  try {
    if (*check) return cmd_check(file);
    if (*rep) return cmd_represent(file, sig);
    if (*sq) return cmd_seq(file);
    if (*norm) return cmd_normalize(file, poly, trace, fuel);
    if (*ce) return cmd_cut_elim(file, trace, as_derivation);
    if (*eq) return cmd_equiv(file, file2, mode, bound, cert);
    if (*rd) return cmd_render(file, format, out);
    if (*st) return cmd_structure(file);
    if (*rules) return cmd_rules(poly, width);
    if (*en) return cmd_enumerate(seq, max_rules);
  } catch (const Error& e) {
    if (g_json)
      std::cout << json{{"error", errc_name(e.code())}, {"message", e.detail()}}.dump(2) << "\n";
    else
      std::cerr << "pdiag: " << e.what() << "\n";
    return e.code() == Errc::Parse ? kParse : kContract;
  }
  return kContract;
}
