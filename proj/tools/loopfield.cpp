// loopfield: batch front end for planar edge-measure decomposition, forward
// field evaluation, TV-penalized inversion and minimality certification.
//
// Exit codes: 0 ok, 1 usage/parse/self-test failure, 2 divergence failure,
// 3 solver non-convergence, 4 experiment criterion failure.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "loopfield/experiments.hpp"

using namespace loopfield;

namespace {

struct CliError {
  int code;
  std::string message;
};

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

// ------------------------------------------------------------- self tests

void self_test_decompose() {
  Rng rng(11);
  const Grid grid(16, 16, 1.0);
  for (int n = 0; n < 3; ++n) {
    const CellFunction phi = random_cell_function(grid, rng, -2, 3, n % 2 == 0);
    const EdgeMeasure nu = rotated_gradient(phi);
    if (!(reconstruct(decompose(nu)) == nu)) throw CliError{1, "self-test: round trip failed"};
    double checksum = 0.0;
    for (const CoareaBand& b : coarea_profile(phi)) checksum += (b.t_hi - b.t_lo) * b.perimeter;
    if (checksum != tv_norm(nu)) throw CliError{1, "self-test: co-area identity failed"};
  }
}

void self_test_forward() {
  const UnitSquareFixture fx = make_unit_square();
  EdgeMeasure loop = fx.mu0;
  loop.add(fx.mu1, -1.0);
  for (double v : forward_edges(loop, fx.setup).values)
    if (std::abs(v) > 1e-13) throw CliError{1, "self-test: loop is not silent"};
  DipoleField d({Dipole{{0.0, 0.0}, {0.0, 0.0, 1.0}}});
  MeasurementSetup s({{0.0, 0.0, 1.0}}, {0.0, 0.0, 1.0}, {1.0}, 1.0);
  const double want = 1.0 / (2.0 * std::numbers::pi);
  if (std::abs(forward_dipoles(d, s).values[0] - want) > 1e-15)
    throw CliError{1, "self-test: dipole reading off"};
}

void self_test_invert() {
  const UnitSquareFixture fx = make_unit_square();
  Reading zero;
  zero.values.assign(static_cast<size_t>(fx.setup.size()), 0.0);
  SolveOptions opts;
  opts.lambda = 0.5;
  const Solution sol = solve_ep2(zero, fx.setup, fx.support, opts);
  if (sol.weights.lpNorm<Eigen::Infinity>() != 0.0 || !sol.converged)
    throw CliError{1, "self-test: zero data must give the zero solution"};
}

void self_test_certify() {
  const UnitSquareFixture fx = make_unit_square();
  const auto verdict = [&](const EdgeMeasure& m) {
    return certify_tv_minimal({m, DipoleField{}}, fx.support, CertifyMode::Exhaustive).verdict;
  };
  EdgeMeasure bottom(fx.grid);
  bottom.add_weight({EdgeKind::H, 0, 0}, 1.0);
  EdgeMeasure three = bottom;
  three.add_weight({EdgeKind::V, 1, 0}, 1.0);
  three.add_weight({EdgeKind::H, 0, 1}, -1.0);
  if (verdict(fx.mu0) != MinimalityVerdict::Minimal ||
      verdict(bottom) != MinimalityVerdict::Strict ||
      verdict(three) != MinimalityVerdict::Violated)
    throw CliError{1, "self-test: certifier verdicts off on the square"};
}

void self_test_basis() {
  const UnitSquareFixture fx = make_unit_square();
  if (silent_basis(fx.support).size() != 1) throw CliError{1, "self-test: square basis size != 1"};
  const Grid g3(3, 3, 1.0);
  Rng rng(3);
  if (!silent_basis(random_tree_support(g3, rng)).empty())
    throw CliError{1, "self-test: tree basis not empty"};
}

// ------------------------------------------------------------- commands

int cmd_decompose(const std::string& input, const std::string& out_dir) {
  const EdgeMeasure nu = edge_measure_from_json(load_json(input));
  LoopDecomposition d;
  try {
    d = decompose(nu);
  } catch (const divergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  ensure_dir(out_dir);
  save_json(to_json(d), out_dir + "/decomposition.json");
  json atoms = json::array();
  for (const RepresentingAtom& a : representing_measure(d))
    atoms.push_back({{"mass", a.mass}, {"loop", to_json(a.loop)}, {"normalized_tv", a.normalized_tv}});
  save_json(json{{"atoms", atoms}, {"total_mass", d.total_mass()}, {"tv", tv_norm(nu)}},
            out_dir + "/representing_measure.json");
  EdgeMeasure diff = reconstruct(d);
  diff.add(nu, -1.0);
  std::cout << "levels " << d.levels.size() << "\n";
  std::cout << "total_mass " << d.total_mass() << "\n";
  std::cout << "reconstruction_residual " << tv_norm(diff) << "\n";
  return 0;
}

int cmd_forward(const std::string& input, const std::string& setup_path,
                const std::string& out_dir) {
  const Magnetization m = magnetization_from_measure_file(load_json(input));
  const MeasurementSetup s = setup_from_json(load_json(setup_path));
  const Reading r = forward(m, s);
  ensure_dir(out_dir);
  json j = to_json(r);
  j["meta"] = {{"v", {s.direction.x, s.direction.y, s.direction.z}},
               {"mu0", s.mu0},
               {"points", s.size()}};
  save_json(j, out_dir + "/reading.json");
  std::cout << "points " << s.size() << "\n";
  return 0;
}

int cmd_invert(const std::string& input, const std::string& setup_path,
               const std::string& support_path, const SolveOptions& opts,
               const std::string& out_dir) {
  const Reading f = reading_from_json(load_json(input));
  const MeasurementSetup s = setup_from_json(load_json(setup_path));
  const EdgeSupport support = support_from_json(load_json(support_path));
  const Solution sol = solve_ep2(f, s, support, opts);
  ensure_dir(out_dir);
  save_json(to_json(sol), out_dir + "/solution.json");
  std::cout << "objective " << sol.objective << "\n";
  std::cout << "iterations " << sol.iterations << "\n";
  std::cout << "certificate_passed " << (sol.certificate.passed ? "true" : "false") << "\n";
  if (!sol.certificate.passed) {
    std::cerr << "error: certificate failed at max_iters (partial solution written)\n";
    return 3;
  }
  return 0;
}

int cmd_certify(const std::string& input, const std::string& support_path, const std::string& mode,
                int samples, std::uint64_t seed, const std::string& out_dir) {
  const Magnetization m = magnetization_from_measure_file(load_json(input));
  const EdgeSupport support = support_from_json(load_json(support_path));
  const CertifyMode cm = mode == "sampled" ? CertifyMode::Sampled : CertifyMode::Exhaustive;
  const MinimalityReport rep = certify_tv_minimal(m, support, cm, samples, seed);
  const VariationalReport vr = variational_certify(m, support, samples, seed);
  ensure_dir(out_dir);
  save_json(json{{"minimality", to_json(rep)},
                 {"variational", to_json(vr)},
                 {"treelike", treelike_check(support)}},
            out_dir + "/certify.json");
  std::cout << "verdict " << to_string(rep.verdict) << "\n";
  std::cout << "min_pairing " << vr.min_pairing << "\n";
  return 0;
}

int cmd_silent_basis(const std::string& support_path, const std::string& setup_path,
                     double threshold, bool export_matrix, const std::string& out_dir) {
  const EdgeSupport support = support_from_json(load_json(support_path));
  const std::vector<EdgeMeasure> basis = silent_basis(support);
  ensure_dir(out_dir);
  json jb = json::array();
  for (const EdgeMeasure& b : basis) jb.push_back(to_json(b));
  json out{{"count", basis.size()}, {"treelike", treelike_check(support)}, {"basis", jb}};
  if (!setup_path.empty()) {
    const MeasurementSetup s = setup_from_json(load_json(setup_path));
    const KernelReport kr = kernel_dimension_check(s, support, threshold);
    out["kernel"] = to_json(kr);
    if (export_matrix)
      write_operator_matrix(operator_matrix(s, support), support, out_dir + "/operator");
    std::cout << "nullity " << kr.nullity << "\n";
    std::cout << "sufficient " << (kr.sufficient ? "true" : "false") << "\n";
  }
  save_json(out, out_dir + "/basis.json");
  std::cout << "cycles " << basis.size() << "\n";
  return 0;
}

int cmd_experiment(std::string name, std::uint64_t seed, std::string out_dir,
                   const std::string& config_path) {
  if (!config_path.empty()) {
    const json cfg = load_json(config_path);
    name = cfg.value("name", name);
    seed = cfg.value("seed", seed);
    if (cfg.contains("outputs")) out_dir = cfg.at("outputs").get<std::string>();
  }
  if (name.empty()) throw CliError{1, "experiment: --name or config with name required"};
  const ExperimentReport rep = run_experiment(name, seed, out_dir);
  for (const CheckLine& c : rep.checks)
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << rep.name << ": " << c.name
              << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
  if (!rep.passed()) {
    for (const CheckLine& c : rep.checks)
      if (!c.passed) {
        std::cerr << "error: criterion failed: " << c.name << "\n";
        break;
      }
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loopfield: planar magnetization decomposition and TV inversion"};
  app.require_subcommand(1);

  std::string input, setup_path, support_path, out_dir = ".", mode = "exhaustive";
  std::string name, config_path;
  double threshold = 1e-8;
  int samples = 200;
  bool self_test = false, export_matrix = false;
  SolveOptions opts;

  auto* dec = app.add_subcommand("decompose", "loop decomposition of a divergence-free measure");
  dec->add_option("--input", input, "EdgeMeasure JSON")->required();
  dec->add_option("--out-dir", out_dir, "output directory");
  dec->add_flag("--self-test", self_test, "run invariant checks first");

  auto* fwd = app.add_subcommand("forward", "field readings of a measure file");
  fwd->add_option("--input", input, "EdgeMeasure or Magnetization JSON")->required();
  fwd->add_option("--setup", setup_path, "MeasurementSetup JSON")->required();
  fwd->add_option("--out-dir", out_dir, "output directory");
  fwd->add_flag("--self-test", self_test, "run invariant checks first");

  auto* inv = app.add_subcommand("invert", "TV-penalized inversion of a reading");
  inv->add_option("--input", input, "Reading JSON")->required();
  inv->add_option("--setup", setup_path, "MeasurementSetup JSON")->required();
  inv->add_option("--support", support_path, "EdgeSupport JSON")->required();
  inv->add_option("--lambda", opts.lambda, "regularization parameter")->required();
  inv->add_option("--tol", opts.tol, "certificate tolerance");
  inv->add_option("--max-iters", opts.max_iters, "iteration cap");
  inv->add_option("--restarts", opts.restarts, "multi-start count");
  inv->add_option("--seed", opts.seed, "rng seed");
  inv->add_option("--out-dir", out_dir, "output directory");
  inv->add_flag("--self-test", self_test, "run invariant checks first");

  auto* cert = app.add_subcommand("certify", "TV-minimality certification");
  cert->add_option("--input", input, "EdgeMeasure or Magnetization JSON")->required();
  cert->add_option("--support", support_path, "EdgeSupport JSON")->required();
  cert->add_option("--mode", mode, "exhaustive|sampled")
      ->check(CLI::IsMember({"exhaustive", "sampled"}));
  cert->add_option("--samples", samples, "sampled-mode cycle draws");
  cert->add_option("--seed", opts.seed, "rng seed");
  cert->add_option("--out-dir", out_dir, "output directory");
  cert->add_flag("--self-test", self_test, "run invariant checks first");

  auto* sb = app.add_subcommand("silent-basis", "cycle-space basis and kernel analysis");
  sb->add_option("--support", support_path, "EdgeSupport JSON")->required();
  sb->add_option("--setup", setup_path, "MeasurementSetup JSON (enables SVD check)");
  sb->add_option("--threshold", threshold, "relative singular-value threshold");
  sb->add_flag("--export-matrix", export_matrix, "write operator matrix (bin + sidecar)");
  sb->add_option("--out-dir", out_dir, "output directory");
  sb->add_flag("--self-test", self_test, "run invariant checks first");

  auto* exp = app.add_subcommand("experiment", "run a named acceptance scenario");
  exp->add_option("--name", name,
                  "unit_square|separated_segments|tree_like|coarea_fuzz|uniqueness_multistart");
  exp->add_option("--seed", opts.seed, "rng seed");
  exp->add_option("--config", config_path, "ExperimentConfig JSON");
  exp->add_option("--out-dir", out_dir, "output directory");
  exp->add_flag("--self-test", self_test, "run invariant checks first");

  CLI11_PARSE(app, argc, argv);

  try {
    if (self_test) {
      if (dec->parsed()) self_test_decompose();
      if (fwd->parsed()) self_test_forward();
      if (inv->parsed()) self_test_invert();
      if (cert->parsed()) self_test_certify();
      if (sb->parsed()) self_test_basis();
      if (exp->parsed()) self_test_decompose();
      std::cout << "self-test ok\n";
    }
    if (dec->parsed()) return cmd_decompose(input, out_dir);
    if (fwd->parsed()) return cmd_forward(input, setup_path, out_dir);
    if (inv->parsed()) return cmd_invert(input, setup_path, support_path, opts, out_dir);
    if (cert->parsed()) return cmd_certify(input, support_path, mode, samples, opts.seed, out_dir);
    if (sb->parsed())
      return cmd_silent_basis(support_path, setup_path, threshold, export_matrix, out_dir);
    if (exp->parsed()) return cmd_experiment(name, opts.seed, out_dir, config_path);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const divergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
