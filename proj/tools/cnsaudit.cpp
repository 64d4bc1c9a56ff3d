// Command-line harness: one subcommand per study, CSV out, exit code 0 iff
// every asserted property held.
//
// Exit codes: 0 pass, 1 assertion failed, 2 configuration error, 3 I/O
// error, 4 any other module error.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>

#include "cnsaudit/cli.hpp"

using namespace cnsaudit;

namespace {

struct FluidFlags {
  double gamma = 1.4, mu = 0.01, lambda = 0.0;
};

struct SolverFlags {
  std::size_t N = 64;
  double dt = 0.0, T = 0.5, cfl = 0.4, floor = 1e-6;
  std::size_t outputs = 0;
  std::string initial = "swirl";
};

void add_geometry(CLI::App* app, GeometrySpec& g) {
  app->add_option("--shape", g.shape, "disk, annulus or box");
  app->add_option("--size", g.size, "disk radius, annulus outer radius or box side");
  app->add_option("--nodes", g.nodes, "grid nodes per axis across the bounding box");
  app->add_option("--nt", g.nt, "time nodes (1 = static)");
  app->add_option("--T", g.T, "end time");
}

void add_fluid(CLI::App* app, FluidFlags& f) {
  app->add_option("--gamma", f.gamma, "adiabatic exponent");
  app->add_option("--mu", f.mu, "shear viscosity");
  app->add_option("--lambda", f.lambda, "bulk viscosity coefficient");
}

void add_solver(CLI::App* app, SolverFlags& s) {
  app->add_option("--N", s.N, "solver cells per side");
  app->add_option("--dt", s.dt, "time step (0 = largest stable)");
  app->add_option("--T", s.T, "end time");
  app->add_option("--cfl", s.cfl, "CFL safety factor");
  app->add_option("--outputs", s.outputs, "stored intervals (0 = N/2)");
  app->add_option("--density-floor", s.floor, "density floor");
  app->add_option("--initial", s.initial, "rest, swirl or bump");
}

SolverConfig make_solver(const SolverFlags& s, const FluidFlags& f) {
  SolverConfig c;
  c.params = FluidParams::make(f.gamma, f.mu, f.lambda);
  c.N = s.N;
  c.dt = s.dt;
  c.T = s.T;
  c.cfl = s.cfl;
  c.outputs = s.outputs;
  c.density_floor = s.floor;
  c.initial = parse_initial_condition(s.initial);
  return c;
}

// `key=value` lines ('#' comments, blank lines ignored) become `--key value`
// arguments unless the same flag was given on the command line.
std::vector<std::string> config_arguments(const std::string& path, const std::set<std::string>& given) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path);
  std::vector<std::string> out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError, path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key.empty() || key == "config")
      throw Error(ErrorCode::ConfigError, path + ":" + std::to_string(lineno) + ": bad key");
    if (given.count(key)) continue;
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

// Resolved configuration of the active subcommand as `# key=value` lines.
void embed_config(CsvTable& table, CLI::App* sub) {
  table.comment("command", sub->get_name());
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name == "out") continue;
    const auto& res = opt->results();
    table.comment(name, res.empty() ? opt->get_default_str() : join(res));
  }
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError: return 2;
    case ErrorCode::IoError: return 3;
    default: return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-equality audit studies for compressible flow fields"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  std::string config_path, out_path;
  FluidFlags fluid;
  SolverFlags solver;
  auto common = [&](CLI::App* s) {
    s->add_option("--config", config_path, "key=value file; flags override it");
    s->add_option("--out", out_path, "CSV output path (default stdout)");
  };

  MollifyStudy moll;
  auto* s_moll = app.add_subcommand("mollify-convergence", "global mollification error along an eps ladder");
  common(s_moll);
  add_geometry(s_moll, moll.geo);
  s_moll->add_option("--eps", moll.eps, "strictly decreasing scales")->delimiter(',');
  s_moll->add_option("--family", moll.family, "manufactured family");
  s_moll->add_option("--seed", moll.seed, "seed for the random family");
  s_moll->add_option("--charts", moll.charts, "boundary charts");
  s_moll->add_option("--p", moll.p, "Lebesgue exponent");
  s_moll->add_option("--min-order", moll.min_order, "required fitted order");

  CommutatorStudy comm;
  auto* s_comm = app.add_subcommand("commutator-study", "interior, shifted or product commutator ladders");
  common(s_comm);
  add_geometry(s_comm, comm.geo);
  s_comm->add_option("--kind", comm.kind, "interior, shifted or product");
  s_comm->add_option("--eps", comm.eps, "strictly decreasing scales")->delimiter(',');
  s_comm->add_option("--axes", comm.axes, "derivative axes among t, x1, x2")->delimiter(',');
  s_comm->add_option("--family", comm.family, "manufactured family");
  s_comm->add_option("--seed", comm.seed, "first seed");
  s_comm->add_option("--seeds", comm.seeds, "number of consecutive seeds");
  s_comm->add_option("--charts", comm.charts, "boundary charts (shifted)");
  s_comm->add_option("--r", comm.r, "lhs exponent");
  s_comm->add_option("--r1", comm.r1, "density exponent");
  s_comm->add_option("--r2", comm.r2, "velocity exponent");
  s_comm->add_option("--max-ratio", comm.max_ratio, "ratio bound (0 = kind default)");
  s_comm->add_option("--decay", comm.decay, "required last/first lhs factor");

  CutoffStudy cut;
  auto* s_cut = app.add_subcommand("cutoff-check", "max |grad phi_delta| dist over interior nodes");
  common(s_cut);
  add_geometry(s_cut, cut.geo);
  s_cut->add_option("--deltas", cut.deltas, "strictly decreasing cut-off widths")->delimiter(',');
  s_cut->add_option("--bound", cut.bound, "bound on |grad phi| dist");

  HardyStudy hardy;
  auto* s_hardy = app.add_subcommand("hardy-check", "Hardy ratios of the bump family and the distance field");
  common(s_hardy);
  add_geometry(s_hardy, hardy.geo);
  s_hardy->add_option("--p", hardy.p, "Lebesgue exponent");
  s_hardy->add_option("--bumps", hardy.bumps, "bumps in the family");
  s_hardy->add_option("--baseline-nodes", hardy.baseline_nodes, "resolution of the C_emp baseline");
  s_hardy->add_option("--slack", hardy.slack, "allowed factor over C_emp");

  EnergyStudy energy;
  std::vector<std::size_t> refine = energy.refine;
  auto* s_energy = app.add_subcommand("energy-audit", "tested energy terms (m3) or window defect refinement (window)");
  common(s_energy);
  add_fluid(s_energy, fluid);
  add_solver(s_energy, solver);
  s_energy->add_option("--in", energy.source.in, "run file; omitted: solve first");
  s_energy->add_option("--domain", energy.source.shape, "shape of the run file grid");
  s_energy->add_option("--mode", energy.mode, "m3 or window");
  s_energy->add_option("--deltas", energy.deltas, "strictly decreasing cut-off widths")->delimiter(',');
  s_energy->add_option("--tau", energy.tau, "time weight offset");
  s_energy->add_option("--alpha", energy.alpha, "trapezoid ramp length (window)");
  s_energy->add_option("--t0", energy.t0, "trapezoid ramp-down start (window)");
  s_energy->add_option("--decay", energy.decay, "required first/last boundary production");
  s_energy->add_option("--refine", refine, "solver resolutions (window)")->delimiter(',');
  s_energy->add_option("--min-order", energy.min_order, "required fitted order (window)");
  s_energy->add_option("--ledger", energy.ledger_out, "optional t,E,D CSV (m3)");

  DoubleLimitStudy dl;
  auto* s_dl = app.add_subcommand("double-limit", "resolved residual against the eps -> 0 limit for each delta");
  common(s_dl);
  add_fluid(s_dl, fluid);
  add_solver(s_dl, solver);
  s_dl->add_option("--in", dl.source.in, "run file; omitted: --family, else solve first");
  s_dl->add_option("--domain", dl.source.shape, "shape of the run file grid");
  s_dl->add_option("--family", dl.family, "manufactured family instead of a flow");
  s_dl->add_option("--seed", dl.seed, "seed for the random family");
  s_dl->add_option("--shape", dl.geo.shape, "manufactured grid shape");
  s_dl->add_option("--size", dl.geo.size, "manufactured grid size");
  s_dl->add_option("--nodes", dl.geo.nodes, "manufactured grid nodes per axis");
  s_dl->add_option("--nt", dl.geo.nt, "manufactured grid time nodes");
  s_dl->add_option("--eps", dl.eps, "strictly decreasing mollifier scales")->delimiter(',');
  s_dl->add_option("--deltas", dl.deltas, "strictly decreasing cut-off widths")->delimiter(',');
  s_dl->add_option("--tau", dl.tau, "time weight offset");
  s_dl->add_option("--charts", dl.charts, "boundary charts");

  GenerateStudy gen;
  auto* s_gen = app.add_subcommand("generate-flow", "run the solver, write the field and its metadata");
  common(s_gen);
  add_fluid(s_gen, fluid);
  add_solver(s_gen, solver);
  s_gen->add_option("--field-out", gen.field_out, "CNSF output for [rho, u1, u2]");

  CriterionStudy crit;
  auto* s_crit = app.add_subcommand("criterion-check", "norms and flags of the regularity criterion");
  common(s_crit);
  add_fluid(s_crit, fluid);
  add_solver(s_crit, solver);
  s_crit->add_option("--in", crit.source.in, "run file; omitted: solve first");
  s_crit->add_option("--domain", crit.source.shape, "shape of the run file grid");
  s_crit->add_option("--p", crit.p, "time exponent");
  s_crit->add_option("--q", crit.q, "space exponent");
  s_crit->add_option("--q0", crit.q0, "initial-datum exponent");

  try {
    // pass 1: find --config and the flags given explicitly
    std::vector<std::string> args(argv + 1, argv + argc);
    std::set<std::string> given;
    std::string cfg_file;
    for (std::size_t i = 0; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (a.rfind("--", 0) != 0) continue;
      const auto eq = a.find('=');
      const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
      given.insert(key);
      if (key == "config") cfg_file = eq == std::string::npos ? (i + 1 < args.size() ? args[i + 1] : "") : a.substr(eq + 1);
    }
    if (!cfg_file.empty()) {
      const auto extra = config_arguments(cfg_file, given);
      auto at = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
        for (const auto* s : app.get_subcommands({})) if (s->get_name() == a) return true;
        return false;
      });
      if (at != args.end()) args.insert(at + 1, extra.begin(), extra.end());
    }
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::cerr << "error: ConfigError: " << e.what() << '\n';
      return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    StudyResult result{CsvTable({})};
    if (sub == s_moll) {
      result = run_mollify_convergence(moll);
    } else if (sub == s_comm) {
      result = run_commutator_study(comm);
    } else if (sub == s_cut) {
      result = run_cutoff_check(cut);
    } else if (sub == s_hardy) {
      result = run_hardy_check(hardy);
    } else if (sub == s_energy) {
      energy.source.solver = make_solver(solver, fluid);
      energy.refine = refine;
      result = run_energy_audit(energy);
    } else if (sub == s_dl) {
      dl.source.solver = make_solver(solver, fluid);
      dl.geo.T = solver.T;
      result = run_double_limit(dl);
    } else if (sub == s_gen) {
      gen.solver = make_solver(solver, fluid);
      result = run_generate_flow(gen);
    } else {
      crit.source.solver = make_solver(solver, fluid);
      result = run_criterion_check(crit);
    }

    CsvTable table({});
    {
      // config comments first, then the study's rows
      CsvTable framed(result.table.columns());
      embed_config(framed, sub);
      for (const auto& row : result.table.rows()) {
        auto r = framed.row();
        for (const auto& cell : row) r.add(cell);
      }
      table = std::move(framed);
    }
    if (out_path.empty()) std::cout << table.str();
    else table.write(out_path);
    if (!result.pass) std::cerr << sub->get_name() << ": at least one assertion failed (rows with pass=0)\n";
    return result.pass ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
