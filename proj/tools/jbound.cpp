#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "jbound/bounds.hpp"
#include "jbound/deproject.hpp"
#include "jbound/engine.hpp"
#include "jbound/errors.hpp"
#include "jbound/lp.hpp"
#include "jbound/plan.hpp"
#include "jbound/query.hpp"
#include "jbound/stochastic.hpp"

namespace {

using namespace jbound;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parse_error(path, 0, "cannot write file");
  out << content;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Sizes file: lines `size <rel> <int>`, '#' comments. Every relation needs a
// size.
std::vector<uint64_t> load_sizes(const JoinQuery& q, const std::string& text,
                                 const std::string& filename) {
  std::vector<uint64_t> sizes(q.relation_count(), 0);
  std::vector<char> seen(q.relation_count(), 0);
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word, rel;
    uint64_t value = 0;
    if (!(ls >> word)) continue;
    if (word != "size") throw parse_error(filename, lineno, "expected 'size', got '" + word + "'");
    if (!(ls >> rel >> value)) throw parse_error(filename, lineno, "size needs a relation and an integer");
    const int r = q.relation_index(rel);
    if (r < 0) throw parse_error(filename, lineno, "unknown relation '" + rel + "'");
    if (seen[r]) throw parse_error(filename, lineno, "duplicate size for '" + rel + "'");
    seen[r] = 1;
    sizes[r] = value;
  }
  for (size_t r = 0; r < q.relation_count(); ++r)
    if (!seen[r]) throw parse_error(filename, lineno, "missing size for '" + q.relations()[r].name + "'");
  return sizes;
}

std::string query_text(const JoinQuery& q) {
  std::string text;
  for (const auto& rel : q.relations()) {
    text += "rel " + rel.name;
    for (const auto& a : rel.attributes) text += " " + a;
    text += "\n";
  }
  return text;
}

void print_solution(const JoinQuery& q, const CoverSolution& sol) {
  for (size_t r = 0; r < q.relation_count(); ++r)
    std::cout << "x " << q.relations()[r].name << " " << sol.x[r].str() << "\n";
  for (size_t a = 0; a < q.attribute_count(); ++a)
    std::cout << "y " << q.attributes()[a] << " " << sol.y[a].str() << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Join size bounds, extremal instances and execution plans"};
  app.require_subcommand(1);
  uint64_t budget = kDefaultTupleBudget;
  bool verbose = false;
  app.add_option("--budget", budget, "tuple budget for materialisation");
  app.add_flag("--verbose", verbose, "human-readable commentary");

  std::string query_path, plan_path, db_path, model_path, sizes_path, graph_path, out_path;
  uint64_t n0 = 2, trials = 100, seed = 0, big_n = 2;
  int adv_m = 2;
  std::string order_csv, method = "both", witness_csv;
  bool trace = false, report_inflation = false;

  auto* rho = app.add_subcommand("rho-star", "fractional edge cover number and optimal cover");
  rho->add_option("query", query_path)->required();

  auto* bound = app.add_subcommand("bound", "size bound under relation-size constraints");
  bound->add_option("query", query_path)->required();
  bound->add_option("--sizes", sizes_path)->required();

  auto* worst = app.add_subcommand("worst-case", "extremal instance for the cover bound");
  worst->add_option("query", query_path)->required();
  worst->add_option("--n0", n0)->required();
  worst->add_option("-o,--output", out_path)->required();

  auto* cworst = app.add_subcommand("constrained-worst", "extremal instance with fixed relation sizes");
  cworst->add_option("query", query_path)->required();
  cworst->add_option("--sizes", sizes_path)->required();
  cworst->add_option("-o,--output", out_path)->required();

  auto* plan = app.add_subcommand("plan", "generate an execution plan");
  plan->require_subcommand(1);
  auto* plan_gm = plan->add_subcommand("gm", "generic join-project plan");
  plan_gm->add_option("query", query_path)->required();
  plan_gm->add_option("--order", order_csv, "comma-separated attribute order");
  auto* plan_cover = plan->add_subcommand("cover", "greedy-cover join plan");
  plan_cover->add_option("query", query_path)->required();

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a plan on a database");
  eval_cmd->add_option("query", query_path)->required();
  eval_cmd->add_option("plan", plan_path)->required();
  eval_cmd->add_option("db", db_path)->required();
  eval_cmd->add_flag("--trace", trace, "per-subplan cardinalities");

  auto* density = app.add_subcommand("density", "maximum density of the query");
  density->add_option("query", query_path)->required();
  density->add_option("--model", model_path)->required();
  density->add_option("--method", method)->check(CLI::IsMember({"brute", "flow", "both"}));

  auto* sample = app.add_subcommand("sample", "draw a random database");
  sample->add_option("query", query_path)->required();
  sample->add_option("--model", model_path)->required();
  sample->add_option("--seed", seed);
  sample->add_option("-o,--output", out_path)->required();

  auto* conc = app.add_subcommand("concentrate", "concentration experiment");
  conc->add_option("query", query_path)->required();
  conc->add_option("--model", model_path)->required();
  conc->add_option("--trials", trials);
  conc->add_option("--seed", seed);

  auto* depr = app.add_subcommand("deproject", "rewrite a join-project plan into a join plan");
  depr->add_option("query", query_path)->required();
  depr->add_option("plan", plan_path)->required();
  depr->add_option("--model", model_path)->required();
  depr->add_flag("--report-inflation", report_inflation);
  depr->add_option("--trials", trials);
  depr->add_option("--seed", seed);
  depr->add_option("-o,--output", out_path);

  auto* adv = app.add_subcommand("adversarial", "hard family for join-only plans");
  adv->add_option("--m", adv_m)->required();
  adv->add_option("--N", big_n)->required();
  adv->add_option("-o,--output", out_path)->required();

  auto* ind = app.add_subcommand("indset", "independent-set reduction and witness instance");
  ind->add_option("--graph", graph_path)->required();
  ind->add_option("--witness", witness_csv, "comma-separated vertices; default: a maximum independent set");
  ind->add_option("-o,--output", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (rho->parsed()) {
    const JoinQuery q = JoinQuery::parse(read_file(query_path), query_path);
    const CoverSolution sol = solve_cover_lp(q);
    std::cout << "rho_star " << sol.objective.str() << "\n";
    print_solution(q, sol);
    if (verbose)
      std::cout << "# answers of this query never exceed |D|^" << sol.objective.str()
                << ", and instances achieving it exist\n";
    return 0;
  }

  if (bound->parsed()) {
    const JoinQuery q = JoinQuery::parse(read_file(query_path), query_path);
    const auto sizes = load_sizes(q, read_file(sizes_path), sizes_path);
    const auto [sol, value] = constrained_bound(q, sizes);
    for (size_t r = 0; r < q.relation_count(); ++r) {
      bool exact = false;
      const Rational c = log2_cost(sizes[r], &exact);
      std::cout << "cost " << q.relations()[r].name << " " << c.str() << " "
                << (exact ? "exact" : "perturbed") << "\n";
    }
    std::cout << "objective " << sol.objective.str() << "\n";
    print_solution(q, sol);
    if (value.log2_value) std::cout << "bound_log2 " << value.log2_value->str() << "\n";
    std::cout << "bound " << fmt(value.value) << "\n";
    if (verbose)
      std::cout << "# with the given relation sizes, answers have at most "
                << fmt(value.value) << " tuples\n";
    return 0;
  }

  if (worst->parsed()) {
    const JoinQuery q = JoinQuery::parse(read_file(query_path), query_path);
    const WorstCaseInstance wc = worst_case_instance(q, n0, budget);
    std::cout << "denominator " << wc.denominator << "\n";
    std::cout << "grid_side " << wc.grid_side.get_str() << "\n";
    for (size_t a = 0; a < q.attribute_count(); ++a)
      std::cout << "width " << q.attributes()[a] << " " << wc.widths[a].get_str() << "\n";
    for (size_t r = 0; r < q.relation_count(); ++r)
      std::cout << "size " << q.relations()[r].name << " " << wc.instance.relations[r].size() << "\n";
    std::cout << "instance_size " << wc.instance.total_tuples() << "\n";
    write_file(out_path, write_instance(q, wc.instance));
    std::cout << "wrote " << out_path << "\n";
    if (verbose)
      std::cout << "# every relation holds a value grid; the answer meets the cover bound "
                   "with equality\n";
    return 0;
  }

  if (cworst->parsed()) {
    const JoinQuery q = JoinQuery::parse(read_file(query_path), query_path);
    const auto sizes = load_sizes(q, read_file(sizes_path), sizes_path);
    const ConstrainedWorstInstance cw = constrained_worst_instance(q, sizes, budget);
    for (size_t a = 0; a < q.attribute_count(); ++a)
      std::cout << "width " << q.attributes()[a] << " " << cw.widths[a].get_str() << "\n";
    for (size_t r = 0; r < q.relation_count(); ++r)
      std::cout << "size " << q.relations()[r].name << " " << cw.instance.relations[r].size() << "\n";
    std::cout << "instance_size " << cw.instance.total_tuples() << "\n";
    write_file(out_path, write_instance(q, cw.instance));
    std::cout << "wrote " << out_path << "\n";
    return 0;
  }

  if (plan_gm->parsed() || plan_cover->parsed()) {
    const JoinQuery q = JoinQuery::parse(read_file(query_path), query_path);
    PlanPtr p;
    if (plan_gm->parsed()) {
      p = order_csv.empty() ? gm_plan(q) : gm_plan(q, split_commas(order_csv));
    } else {
      p = cover_join_plan(q);
    }
    std::cout << "plan " << print_plan(*p) << "\n";
    return 0;
  }

  if (eval_cmd->parsed()) {
    const JoinQuery q = JoinQuery::parse(read_file(query_path), query_path);
    const PlanPtr p = parse_plan(read_file(plan_path), plan_path);
    uint64_t dropped = 0;
    const Instance d = load_instance(q, read_file(db_path), db_path, &dropped);
    const auto [rel, tr] = evaluate(*p, q, d, budget);
    if (dropped > 0) std::cout << "duplicates_dropped " << dropped << "\n";
    std::cout << "cardinality " << rel.size() << "\n";
    std::cout << "arity " << rel.arity() << "\n";
    std::cout << "peak " << tr.peak_cardinality << "\n";
    if (trace)
      for (const auto& e : tr.entries)
        std::cout << "trace " << e.cardinality << " " << e.arity << " " << e.label << "\n";
    return 0;
  }

  if (density->parsed()) {
    const JoinQuery q = JoinQuery::parse(read_file(query_path), query_path);
    const ProbabilityModel model = ProbabilityModel::parse(q, read_file(model_path), model_path);
    auto join_names = [](const std::vector<std::string>& v) {
      std::string s;
      for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += v[i];
      }
      return s;
    };
    std::optional<Rational> brute_v, flow_v;
    if (method != "flow") {
      const DensityReport r = max_density_bruteforce(q, model.weights);
      brute_v = r.max_density;
      std::cout << "density_brute " << r.max_density.str() << "\n";
      std::cout << "witness_brute " << join_names(r.best_attributes) << "\n";
    }
    if (method != "brute") {
      const DensityReport r = max_density_flow(q, model.weights);
      flow_v = r.max_density;
      std::cout << "density_flow " << r.max_density.str() << "\n";
      std::cout << "witness_flow " << join_names(r.best_attributes) << "\n";
    }
    if (brute_v && flow_v) std::cout << "match " << (*brute_v == *flow_v ? 1 : 0) << "\n";
    return 0;
  }

  if (sample->parsed()) {
    const JoinQuery q = JoinQuery::parse(read_file(query_path), query_path);
    const ProbabilityModel model = ProbabilityModel::parse(q, read_file(model_path), model_path);
    const Instance d = sample_instance(q, model, seed, budget);
    for (size_t r = 0; r < q.relation_count(); ++r)
      std::cout << "size " << q.relations()[r].name << " " << d.relations[r].size() << "\n";
    std::cout << "instance_size " << d.total_tuples() << "\n";
    write_file(out_path, write_instance(q, d));
    std::cout << "wrote " << out_path << "\n";
    return 0;
  }

  if (conc->parsed()) {
    const JoinQuery q = JoinQuery::parse(read_file(query_path), query_path);
    const ProbabilityModel model = ProbabilityModel::parse(q, read_file(model_path), model_path);
    const ConcentrationReport rep = concentration_experiment(q, model, trials, seed, budget);
    std::cout << "trials " << rep.trials << "\n";
    std::cout << "empirical_mean " << fmt(rep.empirical_mean) << "\n";
    std::cout << "empirical_variance " << fmt(rep.empirical_variance) << "\n";
    std::cout << "predicted_mean " << fmt(rep.predicted_mean) << "\n";
    if (rep.variance_bound) std::cout << "variance_bound " << fmt(*rep.variance_bound) << "\n";
    else std::cout << "variance_bound inapplicable\n";
    std::cout << "empty_fraction " << fmt(rep.empty_fraction) << "\n";
    std::cout << "max_density " << rep.max_density.str() << "\n";
    std::cout << "log2n_minus_density " << fmt(rep.log2n_minus_density) << "\n";
    if (verbose)
      std::cout << (rep.log2n_minus_density > 0
                        ? "# sparse regime: answer sizes concentrate around the expectation\n"
                        : "# dense regime: answers are empty almost always\n");
    return 0;
  }

  if (depr->parsed()) {
    const JoinQuery q = JoinQuery::parse(read_file(query_path), query_path);
    const PlanPtr p = parse_plan(read_file(plan_path), plan_path);
    const ProbabilityModel model = ProbabilityModel::parse(q, read_file(model_path), model_path);
    const DeprojectResult res = deproject(p, q, model);
    std::cout << "plan " << print_plan(*res.plan) << "\n";
    std::cout << "iterations " << res.iterations << "\n";
    std::cout << "domain_size " << model.domain_size << "\n";  // the rewrite depends on N
    if (report_inflation) {
      const InflationReport rep =
          inflation_report(*p, *res.plan, q, model, trials, seed, budget);
      std::cout << "original_max_expected " << fmt(rep.original_max_expected) << "\n";
      std::cout << "rewritten_max_expected " << fmt(rep.rewritten_max_expected) << "\n";
      std::cout << "ratio " << fmt(rep.ratio) << "\n";
      std::cout << "ratio_low " << fmt(rep.ratio_low) << "\n";
      std::cout << "ratio_high " << fmt(rep.ratio_high) << "\n";
      std::cout << "inflation_trials " << rep.trials << "\n";
    }
    if (!out_path.empty()) {
      write_file(out_path, print_plan(*res.plan) + "\n");
      std::cout << "wrote " << out_path << "\n";
    }
    return 0;
  }

  if (adv->parsed()) {
    const AdversarialFamily fam = adversarial_instance(adv_m, big_n, budget);
    std::cout << "attributes " << fam.query.attribute_count() << "\n";
    std::cout << "query_size " << fam.query.query_size() << "\n";
    std::cout << "relation_size " << fam.instance.relations[0].size() << "\n";
    std::cout << "instance_size " << fam.instance.total_tuples() << "\n";
    const Relation ans = oracle_answer(fam.query, fam.instance, budget * 10);
    std::cout << "answer_size " << ans.size() << "\n";
    std::filesystem::create_directories(out_path);
    write_file(out_path + "/query.jq", query_text(fam.query));
    write_file(out_path + "/instance.jdb", write_instance(fam.query, fam.instance));
    std::cout << "wrote " << out_path << "/query.jq\n";
    std::cout << "wrote " << out_path << "/instance.jdb\n";
    return 0;
  }

  if (ind->parsed()) {
    const GraphInput g = GraphInput::parse(read_file(graph_path), graph_path);
    auto [q, sizes] = graph_to_query(g);
    std::vector<std::string> witness;
    if (witness_csv.empty()) {
      for (int v : g.maximum_independent_set()) witness.push_back(g.vertices[v]);
    } else {
      witness = split_commas(witness_csv);
    }
    const Instance d = independent_set_instance(g, witness);
    std::cout << "alpha " << g.independence_number() << "\n";
    std::string wtext;
    for (size_t i = 0; i < witness.size(); ++i) {
      if (i) wtext += ',';
      wtext += witness[i];
    }
    std::cout << "witness " << wtext << "\n";
    const Relation ans = oracle_answer(q, d, budget * 10);
    std::cout << "answer_size " << ans.size() << "\n";
    std::filesystem::create_directories(out_path);
    std::string stext;
    for (size_t r = 0; r < q.relation_count(); ++r)
      stext += "size " + q.relations()[r].name + " " + std::to_string(sizes[r]) + "\n";
    write_file(out_path + "/query.jq", query_text(q));
    write_file(out_path + "/sizes.txt", stext);
    write_file(out_path + "/instance.jdb", write_instance(q, d));
    std::cout << "wrote " << out_path << "/query.jq\n";
    std::cout << "wrote " << out_path << "/sizes.txt\n";
    std::cout << "wrote " << out_path << "/instance.jdb\n";
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const precondition_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const internal_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
