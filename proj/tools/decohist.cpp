// decohist <validate|classop|branch|dfunc|sweep|oracle> --scenario <file>
//          [--out <dir>] [--threads N] [--budget <nodes>]
//
// Exit status: 0 ok, 2 invalid input, 3 numerical budget, 4 oracle disagreement.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>

#include "decohist/decohist.hpp"

namespace fs = std::filesystem;
using namespace decohist;

namespace {

constexpr int exit_ok = 0, exit_validation = 2, exit_numerical = 3, exit_oracle = 4;

struct Context {
  Scenario sc;
  std::string hash;
  fs::path out;
  HistoriesOptions opt;
  bool budget_given = false;

  CsvWriter csv(const std::vector<std::string>& columns) const {
    return CsvWriter(artifact_version, hash, columns);
  }
  void write(const std::string& file, const std::string& text) const {
    write_file((out / file).string(), text);
    std::cerr << "wrote " << (out / file).string() << "\n";
  }
};

void print_issues(const std::vector<ValidationIssue>& issues) {
  std::cout << issues_json(issues).dump(2) << "\n";
}

nlohmann::json regime_json(const Scenario& sc) {
  const HistoriesProblem& p = sc.problem;
  const RegimeReport r = regime_report(p.params, p.particle, p.cg);
  return {{"t_spread", r.t_spread},
          {"ell", r.ell},
          {"delta_over_ell", r.delta_over_ell},
          {"d_over_ell", r.d_over_ell},
          {"regime", r.classical ? "classical" : "quantum"}};
}

int cmd_validate(const Context& c) {
  const HistoriesProblem& p = c.sc.problem;
  nlohmann::json j = issues_json({});
  j["scenario"] = c.sc.name;
  j["hash"] = c.hash;
  j["system"] = to_string(p.params.kind);
  j["regime"] = regime_json(c.sc);
  const CoarseGraining cg = p.resolved_branches();
  j["branches"] = {cg.alpha_min, cg.alpha_max};
  if (!p.pointer.sharp || !p.grid.automatic) {
    const GridSpec g = p.resolved_grid();
    j["grid"] = {{"nx", g.nx}, {"nX", g.nX}, {"x_center", g.x_center}, {"X_center", g.X_center},
                 {"Lx", g.Lx}, {"LX", g.LX}};
  }
  std::cout << j.dump(2) << "\n";
  return exit_ok;
}

int cmd_classop(const Context& c) {
  const HistoriesProblem& p = c.sc.problem;
  const ClassOpTable& t = c.sc.classop;
  const CoarseGraining cg = p.resolved_branches();
  CsvWriter w = c.csv({"x_in", "x_out", "X_in", "X_out", "Z", "alpha", "re", "im", "abs"});
  for (int a = 0; a < t.x_in.n; ++a)
    for (int b = 0; b < t.x_out.n; ++b)
      for (int k = 0; k < t.X_in.n; ++k)
        for (int l = 0; l < t.X_out.n; ++l) {
          const Endpoints ep{t.x_in.at(a), t.x_out.at(b), t.X_in.at(k), t.X_out.at(l)};
          const double Z = system_length_Z(p.params, ep);
          for (int alpha = cg.alpha_min; alpha <= cg.alpha_max; ++alpha) {
            const cplx v = system_class_op_element(p.params, cg, alpha, ep);
            w.cell(ep.x_in).cell(ep.x_out).cell(ep.X_in).cell(ep.X_out).cell(Z).cell(alpha);
            w.cell(v.real()).cell(v.imag()).cell(std::abs(v));
          }
        }
  c.write("classop.csv", w.str());
  return exit_ok;
}

nlohmann::json diagnostics_json(const BranchSet& set) {
  const HistoriesDiagnostics& d = set.diagnostics;
  const GridSpec& g = set.evolved.grid;
  return {{"nx", g.nx},
          {"nX", g.nX},
          {"x_center", g.x_center},
          {"X_center", g.X_center},
          {"Lx", g.Lx},
          {"LX", g.LX},
          {"x_refine", d.x_refine},
          {"X_refine", d.X_refine},
          {"work", d.work},
          {"evolved_norm", d.evolved_norm},
          {"completeness_defect", completeness_defect(set)},
          {"alpha_min", set.cg.alpha_min},
          {"alpha_max", set.cg.alpha_max}};
}

BranchSet branches_of(const Context& c) {
  const HistoriesProblem& p = c.sc.problem;
  p.validate();
  return compute_branches(p.params, p.resolved_branches(), p.particle, p.pointer, p.resolved_grid(), c.opt);
}

int cmd_branch(const Context& c) {
  const BranchSet set = branches_of(c);
  const CoarseGraining& cg = set.cg;
  CsvWriter table = c.csv({"alpha", "lower", "upper", "probability"});
  for (const BranchGrid& b : set.branches)
    table.cell(b.alpha).cell(cg.lower(b.alpha)).cell(cg.upper(b.alpha)).cell(b.norm2());
  c.write("probabilities.csv", table.str());

  CsvWriter grids = c.csv({"alpha", "x", "X", "re", "im"});
  for (const BranchGrid& b : set.branches) {
    const GridSpec& g = b.grid;
    for (int i = 0; i < g.nx; ++i)
      for (int k = 0; k < g.nX; ++k) {
        const cplx v = b.at(i, k);
        grids.cell(b.alpha).cell(g.x(i)).cell(g.X(k)).cell(v.real()).cell(v.imag());
      }
  }
  c.write("branches.csv", grids.str());

  nlohmann::json j = diagnostics_json(set);
  j["scenario"] = c.sc.name;
  j["hash"] = c.hash;
  j["version"] = artifact_version;
  c.write("branch_summary.json", j.dump(2) + "\n");
  return exit_ok;
}

int cmd_dfunc(const Context& c) {
  const BranchSet set = branches_of(c);
  const DecoherenceMatrix D = decoherence_matrix(set.branches, c.opt.threads);
  const double eps = decoherence_metric(D);

  CsvWriter w = c.csv({"alpha", "alpha_prime", "re", "im", "abs", "normalized_abs"});
  std::vector<double> absD(static_cast<std::size_t>(D.n) * D.n);
  for (int a = 0; a < D.n; ++a)
    for (int b = 0; b < D.n; ++b) {
      const int alpha = D.alpha_min + a, alpha_p = D.alpha_min + b;
      const cplx v = D(alpha, alpha_p);
      const double pa = D.probability(alpha), pb = D.probability(alpha_p);
      const double norm = (pa >= empty_branch_threshold && pb >= empty_branch_threshold)
                              ? std::abs(v) / std::sqrt(pa * pb)
                              : 0.0;
      w.cell(alpha).cell(alpha_p).cell(v.real()).cell(v.imag()).cell(std::abs(v)).cell(norm);
      absD[static_cast<std::size_t>(a) * D.n + b] = std::abs(v);
    }
  c.write("dfunc.csv", w.str());
  c.write("dfunc_abs.svg", svg::heatmap(artifact_version, c.hash, "|D(alpha, alpha')|  " + c.sc.name, absD,
                                        D.n, D.alpha_min));

  nlohmann::json j = diagnostics_json(set);
  j["scenario"] = c.sc.name;
  j["hash"] = c.hash;
  j["version"] = artifact_version;
  j["epsilon"] = eps;
  j["total_re"] = D.total.real();
  j["total_im"] = D.total.imag();
  j["probability_sum"] = D.probability_sum();
  j["off_diagonal_sum_re"] = D.off_diagonal_sum().real();
  j["hermiticity_defect"] = D.hermiticity_defect();
  j["min_diagonal"] = D.min_diagonal();
  c.write("dfunc_summary.json", j.dump(2) + "\n");
  std::cout << "epsilon " << fmt_number(eps) << "\n";
  return exit_ok;
}

int cmd_sweep(const Context& c) {
  if (!c.sc.sweep) {
    print_issues({{"/sweep", "the scenario has no sweep section"}});
    return exit_validation;
  }
  const auto rows = run_sweep(*c.sc.sweep, c.opt);
  CsvWriter w = c.csv({"factor", "hbar", "delta", "ell", "ell_over_delta", "t_spread", "epsilon",
                       "window_deviation", "completeness", "branch_count", "nx", "nX", "x_refine",
                       "X_refine", "work", "budget_limited", "computed"});
  std::vector<double> f, eps;
  for (const SweepRow& r : rows) {
    w.cell(r.factor).cell(r.hbar).cell(r.delta).cell(r.ell).cell(r.ell_over_delta).cell(r.t_spread);
    w.cell(r.epsilon).cell(r.window_deviation).cell(r.completeness).cell(r.branch_count);
    w.cell(r.nx).cell(r.nX).cell(r.x_refine).cell(r.X_refine).cell(r.work);
    w.cell(r.budget_limited).cell(r.computed);
    f.push_back(r.factor);
    eps.push_back(r.epsilon);
  }
  c.write("sweep.csv", w.str());
  c.write("sweep_epsilon.svg", svg::loglog_plot(artifact_version, c.hash, "epsilon vs " + to_string(c.sc.sweep->axis) +
                                                " factor  " + c.sc.name, to_string(c.sc.sweep->axis) + " factor",
                                                "epsilon", f, eps));
  for (const SweepRow& r : rows)
    std::cout << "factor " << fmt_number(r.factor) << " epsilon " << fmt_number(r.epsilon)
              << (r.budget_limited ? " budget-limited" : "") << "\n";
  for (const SweepRow& r : rows)
    if (!r.computed) return exit_numerical;
  return exit_ok;
}

// The oracle report: k-quadrature against the closed form, classical-path
// certification and, when designated, the lattice path integral.
struct OracleRow {
  std::string check;
  double reference = 0.0, value = 0.0, error = 0.0, tolerance = 0.0;
  std::string status;  // pass, fail, budget
};

int cmd_oracle(const Context& c) {
  const HistoriesProblem& p = c.sc.problem;
  const ClassOpTable& t = c.sc.classop;
  const CoarseGraining cg = p.resolved_branches();
  std::mt19937_64 gen(c.sc.seed);
  const auto pick = [&](const AxisRange& r) {
    return r.n == 1 ? r.lo : std::uniform_real_distribution<double>(r.lo, r.hi)(gen);
  };
  oracle::AdaptiveOptions aopt;
  if (c.budget_given) aopt.max_nodes = static_cast<long>(std::min(c.opt.node_budget, 9e18));

  std::vector<OracleRow> rows;
  const auto judge = [&](std::string name, double ref, double val, double err, double tol) {
    rows.push_back({std::move(name), ref, val, err, tol, err <= tol ? "pass" : "fail"});
  };

  for (int i = 0; i < c.sc.oracle_samples; ++i) {
    const Endpoints ep{pick(t.x_in), pick(t.x_out), pick(t.X_in), pick(t.X_out)};
    const double Z = system_length_Z(p.params, ep);
    int alpha = std::clamp(cg.branch_of(Z) + (i % 3) - 1, cg.alpha_min, cg.alpha_max);
    const std::string tag = "classop_k sample " + std::to_string(i) + " alpha " + std::to_string(alpha);
    const cplx closed = system_class_op_element(p.params, cg, alpha, ep);
    try {
      const auto rep = oracle::classop_k_quadrature(p.params, cg, alpha, ep, aopt);
      const double scale = std::max(std::abs(closed), 1e-300);
      judge(tag, std::abs(closed), std::abs(rep.value), std::abs(rep.value - closed) / scale, 1e-6);
    } catch (const BudgetError& e) {
      rows.push_back({tag, std::abs(closed), std::abs(e.partial_estimate()), NAN, 1e-6, "budget"});
    }

    const auto certify = [&](const auto& line, const auto& dense) {
      const std::string s = " sample " + std::to_string(i);
      judge("eom_residual" + s, 0.0, oracle::eom_residual(line, p.params), oracle::eom_residual(line, p.params), 1e-5);
      const auto d = oracle::path_diagnostics(dense, p.params);
      judge("action" + s, dense.S_cl, d.action, std::abs(d.action - dense.S_cl) / std::abs(dense.S_cl), 1e-8);
      judge("xbar" + s, dense.xbar_cl, d.xbar, std::abs(d.xbar - dense.xbar_cl), 1e-8);
    };
    if (p.params.kind == SystemKind::free)
      certify(free_particle::classical_solution(p.params, ep, 10001),
              free_particle::classical_solution(p.params, ep, 100001));
    else
      certify(oscillator::classical_solution(p.params, ep, 10001),
              oscillator::classical_solution(p.params, ep, 100001));
  }

  if (c.sc.lattice.present) {
    const LatticeCheck& l = c.sc.lattice;
    const CoarseGraining& lcg = p.cg;
    const cplx two = oracle::lattice_constrained_propagator(p.params, lcg, l.alpha, l.ep, 2).value;
    const cplx en = oracle::lattice_enumerated_two_slice(p.params, lcg, l.alpha, l.ep).value;
    judge("lattice n=2 enumeration", std::abs(en), std::abs(two), std::abs(two - en) / std::max(1.0, std::abs(en)),
          1e-12);
    const cplx closed = free_particle::class_op_element(p.params, lcg, l.alpha, l.ep);
    const cplx lat = oracle::lattice_constrained_propagator(p.params, lcg, l.alpha, l.ep, l.n_slices).value;
    judge("lattice n=" + std::to_string(l.n_slices) + " continuum", std::abs(closed), std::abs(lat),
          std::abs(lat - closed) / std::abs(closed), 0.05);
  }

  CsvWriter w = c.csv({"check", "reference", "value", "error", "tolerance", "status"});
  int failed = 0, budget = 0;
  for (const OracleRow& r : rows) {
    w.raw(r.check).cell(r.reference).cell(r.value).cell(r.error).cell(r.tolerance).raw(r.status);
    failed += r.status == "fail";
    budget += r.status == "budget";
  }
  c.write("oracle.csv", w.str());
  std::cout << rows.size() << " checks, " << failed << " failed, " << budget << " over budget\n";
  if (failed) return exit_oracle;
  if (budget) return exit_numerical;
  return exit_ok;
}

int run(const std::string& command, Context& c) {
  if (command == "validate") return cmd_validate(c);
  fs::create_directories(c.out);
  if (command == "classop") return cmd_classop(c);
  if (command == "branch") return cmd_branch(c);
  if (command == "dfunc") return cmd_dfunc(c);
  if (command == "sweep") return cmd_sweep(c);
  return cmd_oracle(c);
}

int exit_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::numerical: return exit_numerical;
    case ErrorCategory::oracle: return exit_oracle;
    default: return exit_validation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoherence functionals for time-averaged position histories"};
  std::string command, scenario_path, out_dir;
  int threads = 1;
  double budget = 0.0;
  app.add_option("command", command, "validate, classop, branch, dfunc, sweep or oracle")
      ->required()
      ->check(CLI::IsMember({"validate", "classop", "branch", "dfunc", "sweep", "oracle"}));
  app.add_option("--scenario", scenario_path, "scenario JSON file")->required();
  app.add_option("--out", out_dir, "output directory (default from the scenario)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--budget", budget, "node budget for the histories sums and the oracle quadratures")
      ->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_validation;
  }

  const ParseResult parsed = load_scenario(scenario_path);
  if (!parsed.ok()) {
    print_issues(parsed.issues);
    return exit_validation;
  }
  Context c;
  c.sc = parsed.scenario;
  c.hash = hash_hex(scenario_hash(c.sc.source));
  c.out = out_dir.empty() ? fs::path(c.sc.output) : fs::path(out_dir);
  c.opt.threads = threads;
  if (budget > 0) {
    c.opt.node_budget = budget;
    c.budget_given = true;
  }

  const auto t0 = std::chrono::steady_clock::now();
  int rc = exit_ok;
  try {
    c.sc.problem.validate();
    rc = run(command, c);
  } catch (const GridTooSmallError& e) {
    std::cerr << "error: " << e.what() << " (widen the grid by " << fmt_number(e.suggested_scale()) << ")\n";
    rc = exit_numerical;
  } catch (const Error& e) {
    rc = exit_for(e);
    if (rc == exit_validation)
      print_issues({{"", e.what()}});
    else
      std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    rc = 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::fprintf(stderr, "%s finished in %.2f s\n", command.c_str(), secs);
  return rc;
}
