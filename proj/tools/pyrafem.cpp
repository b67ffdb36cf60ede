#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pyrafem/verify.hpp"

using json = nlohmann::ordered_json;
using namespace pyrafem;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

std::vector<int> parse_n_list(const std::string& s) {
  std::vector<int> ns;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) ns.push_back(std::stoi(item));
  if (ns.empty()) throw InvalidOrder("empty n list");
  for (std::size_t i = 1; i < ns.size(); ++i)
    if (ns[i] <= ns[i - 1]) throw InvalidOrder("n list must be ascending");
  if (ns.front() < 1) throw InvalidOrder("n must be >= 1");
  return ns;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open output file: " + out);
    f << text;
  }
}

int cmd_verify(int k_max, unsigned seed, const std::string& out) {
  if (k_max < 1) {
    std::cerr << "verify requires --k-max >= 1\n";
    return kExitConfig;
  }
  auto checks = run_verification(k_max, seed);
  bool all = true;
  double gram_worst = 0.0;
  json jchecks = json::array();
  for (const auto& c : checks) {
    all = all && c.pass;
    if (c.name.rfind("gram_oracle", 0) == 0)
      gram_worst = std::max(gram_worst, c.worst);
    jchecks.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"worst_residual", c.worst},
                       {"detail", c.detail}});
  }
  json report = {{"k_max", k_max},
                 {"seed", seed},
                 {"checks", jchecks},
                 {"theorem_3_1_max_residual", gram_worst},
                 {"all_pass", all}};
  emit(out, report.dump(2) + "\n");
  return all ? 0 : kExitFail;
}

int cmd_spaces(int k_min, int k_max, const std::string& out) {
  if (k_min < 1 || k_max < k_min) {
    std::cerr << "spaces requires 1 <= k <= k-max\n";
    return kExitConfig;
  }
  json jks = json::array();
  for (int k = k_min; k <= k_max; ++k) {
    json jspaces = json::array();
    for (int s = 0; s <= 3; ++s) {
      const SpaceBasis& U = space_basis(s, k, Family::Underlying);
      const SpaceBasis& C = space_basis(s, k, Family::Conforming);
      const SpaceBasis& R = space_basis(s, k, Family::Reduced);
      bool included = true;
      for (const auto& u : R.basis) included = included && in_span(U.basis, u);
      json xdims = json::array();
      for (int r = 0; r <= k; ++r)
        xdims.push_back(build_exact_weight_basis(s, k, r).size());
      jspaces.push_back({{"s", s},
                         {"dim_underlying", U.dim()},
                         {"dim_conforming", C.dim()},
                         {"dim_reduced", R.dim()},
                         {"dim_exact_weight", xdims},
                         {"reduced_in_underlying", included}});
    }
    ExactSequenceReport rep = exact_sequence_report(k);
    json jseq = {{"dim_reduced", rep.dim_reduced},
                 {"rank_d", rep.rank_d},
                 {"kernel_dim", rep.kernel_dim},
                 {"euler_sum", rep.euler_sum},
                 {"exact", rep.all_ok()}};
    jks.push_back({{"k", k}, {"spaces", jspaces}, {"sequence", jseq}});
  }
  emit(out, json{{"report", jks}}.dump(2) + "\n");
  return 0;
}

int cmd_quadtable(int k, const std::string& out, const std::string& format) {
  if (k < 0) {
    std::cerr << "quadtable requires --k >= 0\n";
    return kExitConfig;
  }
  PyramidRule rule = conical_rule(k);
  std::ostringstream os;
  os.precision(17);
  if (format == "json") {
    json pts = json::array(), ws = json::array();
    for (std::size_t i = 0; i < rule.points.size(); ++i) {
      pts.push_back({rule.points[i][0], rule.points[i][1], rule.points[i][2]});
      ws.push_back(rule.weights[i]);
    }
    os << json{{"order", k}, {"points", pts}, {"weights", ws}}.dump(2) << "\n";
  } else {
    os << "xi,eta,zeta,weight\n";
    for (std::size_t i = 0; i < rule.points.size(); ++i)
      os << rule.points[i][0] << "," << rule.points[i][1] << ","
         << rule.points[i][2] << "," << rule.weights[i] << "\n";
  }
  emit(out, os.str());
  return 0;
}

int run_study(bool convergence, int k, int q, const std::string& nlist,
              const std::string& a_name, const std::string& u_name,
              const std::string& out, const std::string& format) {
  std::vector<int> ns;
  ManufacturedSolution u;
  try {
    if (k < 1) throw InvalidOrder("k must be >= 1");
    ns = parse_n_list(nlist);
    u = solution_preset(u_name);
    coefficient_preset(a_name);  // validates the name
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }

  StudyResult res;
  try {
    res = convergence ? convergence_study(k, q, ns, a_name, u)
                      : consistency_study(k, ns, a_name, u);
  } catch (const IndefiniteSystem& e) {
    std::cerr << e.what() << "\n";
    return kExitSolver;
  } catch (const SingularSystem& e) {
    std::cerr << e.what() << "\n";
    return kExitSolver;
  }

  std::ostringstream os;
  if (format == "json")
    write_json(res, os);
  else
    write_csv(res, os);
  emit(out, os.str());

  std::ostream& rates = out.empty() ? std::cerr : std::cout;
  rates.precision(6);
  if (convergence)
    rates << "fitted rates: l2 " << res.fitted_l2 << ", h1 " << res.fitted_h1
          << "\n";
  else
    rates << "fitted consistency rate: " << res.fitted_consistency << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"high-order pyramidal finite element kernel"};
  app.require_subcommand(1);

  int k = 1, k_max = 3, q = -1, s = 0;
  unsigned seed = 1;
  std::string nlist = "1,2,4", a_name = "identity", u_name = "sin3";
  std::string out, format = "csv";

  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_option("--k-max", k_max);
  verify->add_option("--seed", seed);
  verify->add_option("--out", out);

  auto* spaces = app.add_subcommand("spaces", "dimension and rank tables");
  spaces->add_option("--k-max", k_max);
  spaces->add_option("--k", k);
  spaces->add_option("--s", s);
  spaces->add_option("--out", out);

  auto* quadtable = app.add_subcommand("quadtable", "conical rule table");
  quadtable->add_option("--k", k);
  quadtable->add_option("--out", out);
  quadtable->add_option("--format", format)
      ->check(CLI::IsMember({"csv", "json"}));

  auto* conv = app.add_subcommand("convergence", "Poisson convergence study");
  conv->add_option("--k", k);
  conv->add_option("--q", q);
  conv->add_option("--n", nlist);
  conv->add_option("--A", a_name);
  conv->add_option("--u", u_name);
  conv->add_option("--out", out);
  conv->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

  auto* cons = app.add_subcommand("consistency", "quadrature consistency study");
  cons->add_option("--k", k);
  cons->add_option("--n", nlist);
  cons->add_option("--A", a_name);
  cons->add_option("--u", u_name);
  cons->add_option("--out", out);
  cons->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (verify->parsed()) return cmd_verify(k_max, seed, out);
    if (spaces->parsed()) {
      // --k selects a single order, otherwise report 1..k-max
      if (spaces->count("--k")) return cmd_spaces(k, k, out);
      return cmd_spaces(1, k_max, out);
    }
    if (quadtable->parsed()) return cmd_quadtable(k, out, format);
    if (conv->parsed()) {
      if (q < 0) q = k;  // default: order-matched rule
      return run_study(true, k, q, nlist, a_name, u_name, out, format);
    }
    if (cons->parsed())
      return run_study(false, k, 0, nlist, a_name, u_name, out, format);
  } catch (const InvalidOrder& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitFail;
  }
  return kExitConfig;
}
