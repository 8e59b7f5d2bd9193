#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pd/io.hpp"
#include "pd/logic.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

fs::path workdir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("pdiag_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string put(const std::string& name, const std::string& text) {
  fs::path p = workdir() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string read(const std::string& path) {
  std::ifstream f(path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Run pdiag(const std::string& args) {
  const std::string out = (workdir() / "stdout.txt").string();
  int st = std::system((std::string(PDIAG_BINARY) + " " + args + " > " + out + " 2>/dev/null").c_str());
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, read(out)};
}

const char* kLeftFirst = "(ex [2,1] (tensor (ex [2,1] (tensor (tensor (ax a) (one)) (one))) (one)))";
const char* kRightFirst = "(tensor (ex [2,1] (tensor (ex [2,1] (tensor (ax a) (one))) (one))) (one))";

}  // namespace

TEST_CASE("cli: check, represent, seq") {
  std::string ax = put("ax.pd", "# an axiom\n(ax a)\n");
  Run c = pdiag("check " + ax);
  CHECK(c.code == 0);
  CHECK(c.out == "valid |- a, a^\n");

  Run r = pdiag("represent " + ax);
  CHECK(r.code == 0);
  CHECK(pd::write_diagram(pd::read_diagram(r.out)) == r.out);
  std::string dg = put("ax.dg", r.out);
  Run s = pdiag("seq " + dg);
  CHECK(s.code == 0);
  CHECK(s.out == "pdiag derivation 1\n(ax a)\n");
  // the emitted derivation file is accepted back
  CHECK(pdiag("check " + put("ax2.pd", s.out)).code == 0);

  Run u = pdiag("represent --sig uncontrolled " + ax);
  CHECK(pdiag("seq " + put("u.dg", u.out)).code == 1);
}

TEST_CASE("cli: exit codes") {
  CHECK(pdiag("check " + put("bad.pd", "(tensor (ax a)")).code == 2);
  CHECK(pdiag("check " + put("inv.pd", "(cut (ax a) (ax b))")).code == 1);
  CHECK(pdiag("seq " + put("bad.dg", "pdiag diagram 1\nsignature controlled\ninput a\nlayer b\nend\n")).code == 3);
  CHECK(pdiag("normalize " + put("e.dg", "pdiag diagram 1\nsignature controlled\ninput\nend\n") +
              " --polygraph nope")
            .code == 3);
  CHECK(pdiag("frobnicate").code == 2);
}

TEST_CASE("cli: normalize with one atomic axiom cut") {
  std::string d = put("axcut.pd", "(cut (ax a) (ax a))");
  std::string dg = put("axcut.dg", pdiag("represent " + d).out);
  std::string tr = (workdir() / "axcut.trace").string();
  Run n = pdiag("normalize " + dg + " --polygraph sem --emit-trace " + tr);
  CHECK(n.code == 0);
  pd::Diagram nf = pd::read_diagram(n.out);
  CHECK(pd::gate_count(nf, {pd::Family::Cut}) == 0);
  pd::TraceFile t = pd::read_trace(read(tr));
  REQUIRE(t.trace.steps.size() == 1);
  CHECK(t.trace.steps[0].rule.rfind("cut-ax", 0) == 0);
  CHECK(pd::write_trace(t.polygraph, t.trace) == read(tr));

  Run j = pdiag("--json normalize " + dg + " --polygraph sem");
  CHECK(j.out.find("\"rule\": \"cut-ax") != std::string::npos);
}

TEST_CASE("cli: equiv") {
  std::string l = put("l.pd", kLeftFirst), r = put("r.pd", kRightFirst);
  Run y = pdiag("equiv " + l + " " + r + " --mode sim");
  CHECK(y.code == 0);
  CHECK(y.out.rfind("yes", 0) == 0);
  Run j = pdiag("--json equiv " + l + " " + r + " --mode sim");
  CHECK(j.out.find("\"meeting\"") != std::string::npos);

  std::string x = put("x.pd", "(tensor (ex [2,1] (ax a)) (ax a))");
  std::string z = put("z.pd", "(ex [3,2,1] (tensor (ex [2,1] (ax a)) (ax a)))");
  CHECK(pdiag("equiv " + x + " " + z + " --mode sim").code == 1);
  CHECK(pdiag("equiv " + x + " " + z).code == 1);
  // equivalent, but not within zero moves
  CHECK(pdiag("equiv " + l + " " + r + " --bound 0").code == 10);
  CHECK(pdiag("equiv " + x + " " + put("b.pd", "(ax b)")).code == 3);
}

TEST_CASE("cli: cut-elim, render, rules, oracle") {
  std::string c = put("c.pd", "(cut (ax a) (par 2 (bot 3 (ax a))))");
  Run ce = pdiag("cut-elim --derivation " + c);
  CHECK(ce.code == 0);
  CHECK(ce.out == "pdiag derivation 1\n(par 2 (bot 3 (ax a)))\n");

  std::string dg = put("c.dg", pdiag("represent " + c).out);
  Run s1 = pdiag("render " + dg + " --format svg"), s2 = pdiag("render " + dg + " --format svg");
  CHECK(s1.code == 0);
  CHECK(s1.out == s2.out);
  CHECK(pdiag("render " + dg + " --format tikz").out.find("tikzpicture") != std::string::npos);

  CHECK(pdiag("structure " + dg).out.rfind("proof-structure 1\n", 0) == 0);

  Run rules = pdiag("rules S");
  CHECK(rules.out.find("rule inv") != std::string::npos);
  CHECK(rules.out.find("rule yb") != std::string::npos);

  Run en = pdiag("oracle enumerate \"a^, a\" --max-rules 3");
  CHECK(en.code == 0);
  CHECK(en.out == "(ax a^)\n");
  CHECK(pdiag("oracle enumerate \"a, b\" --max-rules 4").code == 1);
}
