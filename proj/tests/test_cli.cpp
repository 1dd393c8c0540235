#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int status;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(JBOUND_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
  const int rc = pclose(pipe);
  return {WEXITSTATUS(rc), out};
}

fs::path workdir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "jbound_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write(const std::string& name, const std::string& content) {
  const fs::path p = workdir() / name;
  std::ofstream(p) << content;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

bool has_line(const std::string& out, const std::string& line) {
  return ("\n" + out).find("\n" + line + "\n") != std::string::npos;
}

}  // namespace

TEST_CASE("rho-star") {
  const std::string q = write("triangle.jq", "rel R a b\nrel S b c\nrel T c a\n");
  const RunResult r = run_cli("rho-star " + q);
  CHECK(r.status == 0);
  CHECK(has_line(r.out, "rho_star 3/2"));
  CHECK(has_line(r.out, "x R 1/2"));
  CHECK(has_line(r.out, "y a 1/2"));
}

TEST_CASE("bound with sizes") {
  const std::string q = write("triangle.jq", "rel R a b\nrel S b c\nrel T c a\n");
  const std::string sizes = write("sizes8.txt", "size R 8\nsize S 8\nsize T 8\n");
  const RunResult r = run_cli("bound " + q + " --sizes " + sizes);
  CHECK(r.status == 0);
  CHECK(has_line(r.out, "cost R 3 exact"));
  CHECK(has_line(r.out, "objective 9/2"));
  CHECK(has_line(r.out, "bound_log2 9/2"));
  CHECK(has_line(r.out, "bound 22.627416998"));

  const std::string sizes5 = write("sizes5.txt", "size R 5\nsize S 5\nsize T 5\n");
  const RunResult r5 = run_cli("bound " + q + " --sizes " + sizes5);
  CHECK(r5.status == 0);
  CHECK(r5.out.find("perturbed") != std::string::npos);
}

TEST_CASE("worst-case instance generation and evaluation round trip") {
  const std::string q = write("triangle.jq", "rel R a b\nrel S b c\nrel T c a\n");
  const std::string db = (workdir() / "worst.jdb").string();
  const RunResult r = run_cli("worst-case " + q + " --n0 2 -o " + db);
  CHECK(r.status == 0);
  CHECK(has_line(r.out, "denominator 2"));
  CHECK(has_line(r.out, "grid_side 4"));
  CHECK(has_line(r.out, "size R 4"));
  CHECK(has_line(r.out, "instance_size 12"));

  const RunResult pg = run_cli("plan gm " + q);
  CHECK(pg.status == 0);
  REQUIRE(pg.out.rfind("plan ", 0) == 0);
  const std::string plan = write("gm.plan", pg.out.substr(5));

  const RunResult ev = run_cli("eval " + q + " " + plan + " " + db + " --trace");
  CHECK(ev.status == 0);
  CHECK(has_line(ev.out, "cardinality 8"));
  CHECK(has_line(ev.out, "arity 3"));
  CHECK(ev.out.find("trace ") != std::string::npos);
}

TEST_CASE("constrained-worst") {
  const std::string q = write("triangle.jq", "rel R a b\nrel S b c\nrel T c a\n");
  const std::string sizes = write("sizes8.txt", "size R 8\nsize S 8\nsize T 8\n");
  const std::string db = (workdir() / "cworst.jdb").string();
  const RunResult r = run_cli("constrained-worst " + q + " --sizes " + sizes + " -o " + db);
  CHECK(r.status == 0);
  CHECK(has_line(r.out, "width a 2"));
  CHECK(has_line(r.out, "size R 8"));
  CHECK(has_line(r.out, "instance_size 24"));
}

TEST_CASE("plan cover") {
  const std::string q = write("triangle.jq", "rel R a b\nrel S b c\nrel T c a\n");
  const RunResult r = run_cli("plan cover " + q);
  CHECK(r.status == 0);
  CHECK(has_line(r.out, "plan (join (join R S) T)"));
}

TEST_CASE("density methods agree") {
  const std::string q = write("triangle.jq", "rel R a b\nrel S b c\nrel T c a\n");
  const std::string model = write("tri.model", "weight R 1\nweight S 1\nweight T 1\nN 64\n");
  const RunResult r = run_cli("density " + q + " --model " + model + " --method both");
  CHECK(r.status == 0);
  CHECK(has_line(r.out, "density_brute 1"));
  CHECK(has_line(r.out, "density_flow 1"));
  CHECK(has_line(r.out, "match 1"));
}

TEST_CASE("sample determinism") {
  const std::string q = write("triangle.jq", "rel R a b\nrel S b c\nrel T c a\n");
  const std::string model = write("tri8.model", "weight R 1\nweight S 1\nweight T 1\nN 8\n");
  const std::string d1 = (workdir() / "s1.jdb").string();
  const std::string d2 = (workdir() / "s2.jdb").string();
  CHECK(run_cli("sample " + q + " --model " + model + " --seed 5 -o " + d1).status == 0);
  CHECK(run_cli("sample " + q + " --model " + model + " --seed 5 -o " + d2).status == 0);
  CHECK(slurp(d1) == slurp(d2));
  const std::string d3 = (workdir() / "s3.jdb").string();
  CHECK(run_cli("sample " + q + " --model " + model + " --seed 6 -o " + d3).status == 0);
  CHECK(slurp(d1) != slurp(d3));
}

TEST_CASE("concentrate") {
  const std::string q = write("triangle.jq", "rel R a b\nrel S b c\nrel T c a\n");
  const std::string model = write("tri8.model", "weight R 1\nweight S 1\nweight T 1\nN 8\n");
  const RunResult r = run_cli("concentrate " + q + " --model " + model + " --trials 5 --seed 0");
  CHECK(r.status == 0);
  CHECK(has_line(r.out, "trials 5"));
  CHECK(has_line(r.out, "predicted_mean 64"));
  CHECK(has_line(r.out, "max_density 1"));
}

TEST_CASE("deproject command") {
  const std::string q = write("triangle.jq", "rel R a b\nrel S b c\nrel T c a\n");
  const std::string model = write("tri16.model", "weight R 1\nweight S 1\nweight T 1\nN 16\n");
  const RunResult pg = run_cli("plan gm " + q);
  const std::string plan = write("gm.plan", pg.out.substr(5));
  const std::string out_plan = (workdir() / "join.plan").string();
  const RunResult r = run_cli("deproject " + q + " " + plan + " --model " + model +
                              " --report-inflation --trials 20 --seed 0 -o " + out_plan);
  CHECK(r.status == 0);
  CHECK(has_line(r.out, "iterations 9"));
  CHECK(has_line(r.out, "domain_size 16"));
  CHECK(r.out.find("ratio ") != std::string::npos);
  const std::string text = slurp(out_plan);
  CHECK(text.find("project") == std::string::npos);

  // The emitted join plan evaluates like the original on a sample.
  const std::string db = (workdir() / "sampled.jdb").string();
  CHECK(run_cli("sample " + q + " --model " + model + " --seed 3 -o " + db).status == 0);
  const RunResult e1 = run_cli("eval " + q + " " + plan + " " + db);
  const RunResult e2 = run_cli("eval " + q + " " + out_plan + " " + db);
  CHECK(e1.status == 0);
  CHECK(e2.status == 0);
  const auto card = [](const std::string& out) {
    const auto pos = out.find("cardinality ");
    return out.substr(pos, out.find('\n', pos) - pos);
  };
  CHECK(card(e1.out) == card(e2.out));
}

TEST_CASE("adversarial writes the family and reports measured sizes") {
  const std::string dir = (workdir() / "adv").string();
  const RunResult r = run_cli("adversarial --m 2 --N 4 -o " + dir);
  CHECK(r.status == 0);
  CHECK(has_line(r.out, "attributes 6"));
  CHECK(has_line(r.out, "query_size 12"));
  CHECK(has_line(r.out, "relation_size 10"));
  CHECK(has_line(r.out, "instance_size 40"));
  CHECK(has_line(r.out, "answer_size 46"));
  CHECK(fs::exists(dir + "/query.jq"));
  CHECK(fs::exists(dir + "/instance.jdb"));
}

TEST_CASE("indset") {
  const std::string g = write("k3.graph", "edge a b\nedge b c\nedge c a\n");
  const std::string dir = (workdir() / "ind").string();
  const RunResult r = run_cli("indset --graph " + g + " -o " + dir);
  CHECK(r.status == 0);
  CHECK(has_line(r.out, "alpha 1"));
  CHECK(has_line(r.out, "answer_size 2"));
  CHECK(fs::exists(dir + "/sizes.txt"));

  const RunResult rw = run_cli("indset --graph " + g + " --witness b -o " + dir);
  CHECK(rw.status == 0);
  CHECK(has_line(rw.out, "witness b"));

  const RunResult bad = run_cli("indset --graph " + g + " --witness a,b -o " + dir);
  CHECK(bad.status == 3);  // not independent
}

TEST_CASE("exit codes") {
  const std::string q = write("triangle.jq", "rel R a b\nrel S b c\nrel T c a\n");

  CHECK(run_cli("no-such-command").status == 1);
  CHECK(run_cli("rho-star " + q + " --bogus-flag").status == 1);
  CHECK(run_cli("rho-star " + (workdir() / "missing.jq").string()).status == 2);

  const std::string bad = write("bad.jq", "rel R a a\n");
  CHECK(run_cli("rho-star " + bad).status == 2);

  // Schema mismatch between query and database: diagnostic with exit 2.
  const std::string other = write("other.jq", "rel R a b\n");
  const std::string db = write("mismatch.jdb", "@R\n1 2 3\n");
  const std::string plan = write("leaf.plan", "R\n");
  const RunResult ev = run_cli("eval " + other + " " + plan + " " + db);
  CHECK(ev.status == 2);
  CHECK(ev.out.find("arity") != std::string::npos);

  // Capacity overflow reports exit 3.
  CHECK(run_cli("worst-case " + q + " --n0 4000 -o " + (workdir() / "x.jdb").string()).status ==
        3);

  const std::string model = write("tri64.model", "weight R 1\nweight S 1\nweight T 1\nN 64\n");
  CHECK(run_cli("density " + q + " --model " + model + " --method bogus").status == 1);

  const std::string badmodel = write("bad.model", "weight R 1\nN 0\n");
  CHECK(run_cli("density " + q + " --model " + badmodel).status == 2);

  // A tiny evaluation budget trips the join capacity check.
  const std::string wdb = (workdir() / "w2.jdb").string();
  CHECK(run_cli("worst-case " + q + " --n0 3 -o " + wdb).status == 0);
  const std::string cover = write("cover.plan", "(join (join R S) T)\n");
  CHECK(run_cli("--budget 5 eval " + q + " " + cover + " " + wdb).status == 3);
}
