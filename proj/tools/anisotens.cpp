// Command line front end: tensor bases, invariant spaces, max-entropy
// reconstruction, symmetry classification, and density sampling.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "anisotens/classifier.hpp"
#include "anisotens/io.hpp"
#include "anisotens/maxent.hpp"
#include "anisotens/point_groups.hpp"
#include "anisotens/traceless_bases.hpp"

namespace {

using namespace anisotens;

void write_out(const std::string& payload, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw std::invalid_argument("cannot write output file: " + out_path);
  f << payload;
}

int threads_default() {
  if (const char* env = std::getenv("ANISOTENS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symmetric traceless tensor toolkit for orientational order analysis"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string format = "json";
  int threads = threads_default();
  std::uint64_t seed = 20240;
  app.add_option("--format", format, "output format: json or text")
      ->check(CLI::IsMember({"json", "text"}));
  app.add_option("--threads", threads, "worker thread count (env ANISOTENS_THREADS)");
  app.add_option("--seed", seed, "random seed for sampling");

  // basis ---------------------------------------------------------------
  auto* basis_cmd = app.add_subcommand("basis", "emit a traceless tensor basis");
  int basis_order = 2;
  std::string basis_kind = "orthogonal";
  std::string basis_out;
  basis_cmd->add_option("--order", basis_order, "tensor order")->required();
  basis_cmd->add_option("--kind", basis_kind, "monomial or orthogonal")
      ->check(CLI::IsMember({"monomial", "orthogonal"}));
  basis_cmd->add_option("--out", basis_out, "output file (default stdout)");

  // invariants ----------------------------------------------------------
  auto* inv_cmd = app.add_subcommand("invariants", "invariant tensors of a point group");
  std::string inv_group = "Dinf";
  int inv_order = 2;
  std::string inv_check;
  std::string inv_out;
  inv_cmd->add_option("--group", inv_group, "group label, e.g. C3, D4, Cinf, T, O, I")->required();
  inv_cmd->add_option("--order", inv_order, "tensor order")->required();
  inv_cmd->add_option("--check", inv_check, "'numeric': cross-validate the closed forms");
  inv_cmd->add_option("--out", inv_out, "output file (default stdout)");

  // reconstruct ----------------------------------------------------------
  auto* rec_cmd = app.add_subcommand("reconstruct", "max-entropy density from tensor moments");
  std::string rec_targets;
  std::string rec_out = "solution.json";
  double rec_tol = 1e-9;
  double rec_moment_tol = 1e-8;
  rec_cmd->add_option("--targets", rec_targets, "targets JSON file")->required();
  rec_cmd->add_option("--tol", rec_tol, "gradient norm tolerance");
  rec_cmd->add_option("--moment-tol", rec_moment_tol, "moment reproduction tolerance");
  rec_cmd->add_option("--out", rec_out, "solution output file");

  // classify --------------------------------------------------------------
  auto* cls_cmd = app.add_subcommand("classify", "detect the mesoscopic symmetry group");
  io::PipelineOptions popts;
  std::string cls_samples_format = "quat";
  cls_cmd->add_option("--tensors", popts.tensors_arg,
                      "tensor JSON file, or comma list of kinds with --samples")
      ->required();
  cls_cmd->add_option("--samples", popts.samples_path, "orientation sample file");
  cls_cmd->add_option("--samples-format", cls_samples_format, "quat, matrix, or euler")
      ->check(CLI::IsMember({"quat", "quaternion", "matrix", "euler"}));
  cls_cmd->add_option("--molecule", popts.molecule, "molecular point group label");
  cls_cmd->add_option("--tol", popts.tol, "detection tolerance");
  cls_cmd->add_flag("--graph", popts.graph, "emit the symmetry breaking graph");
  cls_cmd->add_option("--out", popts.out_path, "output file (default stdout)");

  // sample -----------------------------------------------------------------
  auto* smp_cmd = app.add_subcommand("sample", "draw orientations from a solved density");
  std::string smp_solution;
  std::size_t smp_count = 1000;
  std::string smp_format = "quat";
  std::string smp_out;
  smp_cmd->add_option("--solution", smp_solution, "solution JSON from 'reconstruct'")->required();
  smp_cmd->add_option("--count", smp_count, "number of samples");
  smp_cmd->add_option("--samples-format", smp_format, "quat, matrix, or euler")
      ->check(CLI::IsMember({"quat", "quaternion", "matrix", "euler"}));
  smp_cmd->add_option("--out", smp_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (basis_cmd->parsed()) {
      const auto& space = basis_kind == "monomial" ? bases::monomial_basis(basis_order)
                                                   : bases::orthogonal_basis(basis_order);
      write_out(io::tensor_space_to_json(space), basis_out);
      return 0;
    }
    if (inv_cmd->parsed()) {
      const groups::PointGroup g = groups::parse_group(inv_group);
      const groups::InvariantSpace analytic = groups::invariant_space_analytic(g, inv_order);
      if (inv_check == "numeric") {
        const groups::InvariantSpace numeric = groups::invariant_space_numeric(g, inv_order);
        const double angle = bases::max_principal_angle(analytic.space, numeric.space);
        write_out(io::invariant_check_to_json(analytic, numeric, angle), inv_out);
        return (analytic.dimension() == numeric.dimension() && angle < 1e-8) ? 0 : 2;
      }
      write_out(io::invariant_space_to_json(analytic), inv_out);
      return 0;
    }
    if (rec_cmd->parsed()) {
      const maxent::MomentTargets targets = io::targets_from_json_file(rec_targets);
      maxent::SolverOptions sopts;
      sopts.grad_tol = rec_tol;
      sopts.moment_tol = rec_moment_tol;
      sopts.threads = threads;
      const maxent::MaxEntSolution sol = maxent::solve_maxent(targets, sopts);
      write_out(io::solution_to_json(sol), rec_out);
      return 0;
    }
    if (cls_cmd->parsed()) {
      popts.sample_format = io::sample_format_from_string(cls_samples_format);
      popts.format = format;
      popts.threads = threads;
      return io::run_classify(popts, std::cout, std::cerr);
    }
    if (smp_cmd->parsed()) {
      const maxent::MaxEntSolution sol = io::solution_from_json_file(smp_solution);
      const auto rotations = io::sample_density(sol, smp_count, seed);
      write_out(io::sample_to_json(rotations, io::sample_format_from_string(smp_format)), smp_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
