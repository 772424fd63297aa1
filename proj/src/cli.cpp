#include "rrmfem/cli.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrmfem/mesh_io.hpp"
#include "rrmfem/postproc.hpp"
#include "rrmfem/problems.hpp"
#include "rrmfem/solve.hpp"

namespace rrm {

namespace {

SpaceKind parse_element(const std::string& name) {
  if (name == "q1") return SpaceKind::Q1;
  if (name == "wilson") return SpaceKind::Wilson;
  if (name == "mc") return SpaceKind::MC;
  if (name == "rm") return SpaceKind::RM;
  if (name == "rrm") return SpaceKind::RRM;
  throw PreconditionError("unknown element: " + name);
}

struct CommonOpts {
  std::string element = "rrm";
  std::string domain = "unit-square";
  double rect_w = 1.0, rect_h = 1.0;
  std::string mesh_file;
  std::string out_path;
  std::string format = "csv";
  std::string problem = "example1";
  double rho = 1.0;
  int jobs = 1;
  bool dump_matrices = false;
};

Domain make_domain(const CommonOpts& o) {
  if (o.domain == "unit-square") return Domain::unit_square();
  if (o.domain == "rect") return Domain::rectangle(o.rect_w, o.rect_h);
  if (o.domain == "l-shape") return Domain::lshape();
  throw PreconditionError("unknown domain: " + o.domain);
}

int cells_for(double extent, double h) {
  const double c = extent / h;
  const int ci = (int)std::llround(c);
  if (ci < 1 || std::abs(c - ci) > 1e-9 * std::max(1.0, c))
    throw PreconditionError("mesh size does not divide the domain extent");
  return ci;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw PreconditionError("empty list argument");
  return out;
}

struct OutputSink {
  std::ofstream file;
  std::ostream* os = nullptr;

  OutputSink(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      os = &fallback;
    } else {
      file.open(path);
      if (!file) throw PreconditionError("cannot open output file: " + path);
      os = &file;
    }
  }
};

void dump_system(const AssembledSystem& sys, const std::string& base) {
  auto write = [&](const std::string& suffix, auto&& fn) {
    std::ofstream f(base + suffix);
    if (!f) throw PreconditionError("cannot open dump file: " + base + suffix);
    fn(f);
  };
  write(".K.txt", [&](std::ostream& f) { write_coordinate(f, sys.K); });
  write(".M.txt", [&](std::ostream& f) { write_coordinate(f, sys.M); });
  write(".F.txt", [&](std::ostream& f) { write_coordinate(f, sys.F); });
  if (sys.B) write(".B.txt", [&](std::ostream& f) { write_coordinate(f, sys.B->B); });
}

// Runs level jobs, optionally in parallel, propagating the first exception.
template <typename Fn>
void run_levels(int count, int jobs, Fn&& fn) {
  if (jobs <= 1) {
    for (int l = 0; l < count; ++l) fn(l);
    return;
  }
  std::string first_error;
  bool numerical = false;
#pragma omp parallel for num_threads(jobs) schedule(dynamic, 1)
  for (int l = 0; l < count; ++l) {
    try {
      fn(l);
    } catch (const NumericalError& e) {
#pragma omp critical
      {
        if (first_error.empty()) first_error = e.what();
        numerical = true;
      }
    } catch (const std::exception& e) {
#pragma omp critical
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!first_error.empty()) {
    if (numerical) throw NumericalError(first_error);
    throw PreconditionError(first_error);
  }
}

struct SourceSolution {
  DiscreteField field;
  DiscreteField reduced_field;  // only for formulation "both"
  bool has_reduced = false;
  AssembledSystem sys;
};

SourceSolution solve_source_on(SpaceKind element, const RectGrid& grid,
                               const ManufacturedProblem& prob, const ScalarField& rho,
                               const std::string& formulation) {
  SourceSolution out;
  switch (element) {
    case SpaceKind::Q1:
    case SpaceKind::Wilson:
    case SpaceKind::RM: {
      out.sys = assemble(element, grid, rho, prob.f, true);
      out.field = expand_solution(grid, out.sys.map, solve_source_direct(out.sys));
      break;
    }
    case SpaceKind::MC: {
      out.sys = assemble(SpaceKind::MC, grid, rho, prob.f, true);
      const ExplicitBasis basis = build_mc_basis(grid, true);
      const ReducedSystem red = reduce(out.sys, basis);
      out.field = expand_reduced_solution(grid, out.sys.map, red, solve_source_reduced(red));
      break;
    }
    case SpaceKind::RRM: {
      out.sys = assemble(SpaceKind::RRM, grid, rho, prob.f, true);
      const bool want_saddle = formulation == "saddle" || formulation == "both";
      const bool want_reduced = formulation == "reduced" || formulation == "both";
      if (want_reduced && grid.active_cell_count() != grid.m * grid.n)
        throw PreconditionError("reduced formulation is not available on the L-shape");
      DiscreteField saddle_field, reduced_field;
      if (want_saddle)
        saddle_field = expand_solution(grid, out.sys.map, solve_source_saddle(out.sys).u);
      if (want_reduced) {
        const ExplicitBasis basis = build_rrm_basis(grid);
        const ReducedSystem red = reduce(out.sys, basis);
        reduced_field = expand_reduced_solution(grid, out.sys.map, red, solve_source_reduced(red));
      }
      if (formulation == "reduced") {
        out.field = std::move(reduced_field);
      } else {
        out.field = std::move(saddle_field);
        if (want_reduced) {
          out.reduced_field = std::move(reduced_field);
          out.has_reduced = true;
        }
      }
      break;
    }
    default:
      throw PreconditionError("unsupported element for the source problem");
  }
  return out;
}

std::vector<double> eigen_on(SpaceKind element, const RectGrid& grid, const ScalarField& rho,
                             int k, const std::string& formulation, AssembledSystem* sys_out) {
  const ScalarField zero = constant_field(0.0);
  const bool lshape = grid.active_cell_count() != grid.m * grid.n;
  EigenResult res;
  AssembledSystem sys;
  switch (element) {
    case SpaceKind::Q1:
    case SpaceKind::Wilson: {
      sys = assemble(element, grid, rho, zero, true);
      res = eig_system(sys.K, sys.M, k);
      break;
    }
    case SpaceKind::RM: {
      sys = assemble(SpaceKind::RM, grid, rho, zero, true);
      res = eig_rm(sys, k);
      break;
    }
    case SpaceKind::MC: {
      sys = assemble(SpaceKind::MC, grid, rho, zero, true);
      res = eig_smallest(reduce(sys, build_mc_basis(grid, true)), k);
      break;
    }
    case SpaceKind::RRM: {
      sys = assemble(SpaceKind::RRM, grid, rho, zero, true);
      if (formulation == "reduced" && lshape)
        throw PreconditionError("reduced formulation is not available on the L-shape");
      if (formulation == "saddle" || lshape)
        res = eig_constrained(sys, k);
      else
        res = eig_smallest(reduce(sys, build_rrm_basis(grid)), k);
      break;
    }
    default:
      throw PreconditionError("unsupported element for the eigenvalue problem");
  }
  if (sys_out) *sys_out = std::move(sys);
  return res.lambdas;
}

int cmd_dims(const CommonOpts& o, int m, int n, std::ostream& out) {
  RectGrid grid = o.mesh_file.empty() ? build_uniform(m, n, make_domain(o)) : load_grid(o.mesh_file);
  const DimsReport rep = compute_dims(grid);
  nlohmann::ordered_json j;
  j["m"] = rep.m;
  j["n"] = rep.n;
  j["dim_wilson"] = rep.dim_wilson;
  j["n_constraints"] = rep.n_constraints;
  j["rank"] = rep.rank;
  j["dim_rrm"] = rep.dim_rrm;
  if (rep.dim_mc_hom >= 0) {
    j["dim_mc_hom"] = rep.dim_mc_hom;
    j["dim_mc"] = rep.dim_mc;
  }
  OutputSink sink(o.out_path, out);
  *sink.os << j.dump(2) << "\n";
  return 0;
}

int cmd_verify(const CommonOpts& o, int m, int n, std::ostream& out) {
  RectGrid grid = o.mesh_file.empty() ? build_uniform(m, n, make_domain(o)) : load_grid(o.mesh_file);
  const ExplicitBasis basis = build_rrm_basis(grid);
  const auto seq = verify_exact_sequence(basis, grid);
  const ConstraintMatrix B = build_constraints_rrm(grid, basis.map);

  bool member_ok = true;
  for (const auto& v : basis.members)
    member_ok = member_ok && membership_rrm(B, dense_coeffs(v.coeffs));

  const int rank = numerical_rank(Eigen::MatrixXd(basis.matrix()));
  const bool independent = rank == basis.count();

  double bubble_max = 0.0;
  for (int j = 0; j < grid.n; ++j)
    for (int i = 0; i < grid.m; ++i) {
      const CellGeom geom = cell_geom(grid, i, j);
      const LocalQuad b = bubble_phi0(geom);
      for (CellSide s : {CellSide::Bottom, CellSide::Right, CellSide::Top, CellSide::Left})
        for (const auto& p : edge_gauss_points(geom, s))
          bubble_max = std::max(bubble_max, std::abs(b.eval(p.x(), p.y())));
    }

  std::map<std::string, int> counts;
  for (const auto& v : basis.members) counts[pattern_name(v.kind)]++;

  const bool count_ok = basis.count() == grid.m * grid.n + 1;
  const bool pass = count_ok && independent && member_ok && seq.max_violation() < 1e-10 &&
                    bubble_max < 1e-12;

  nlohmann::ordered_json j;
  j["m"] = grid.m;
  j["n"] = grid.n;
  j["basis_count"] = basis.count();
  j["expected_count"] = grid.m * grid.n + 1;
  j["independent"] = independent;
  j["n_constraints"] = (int)B.B.rows();
  j["membership_ok"] = member_ok;
  j["exact_sequence"] = {{"max_nonlinear", seq.max_nonlinear},
                         {"max_ps_jump", seq.max_ps_jump},
                         {"max_boundary_normal", seq.max_boundary_normal},
                         {"max_divergence", seq.max_divergence},
                         {"max_violation", seq.max_violation()}};
  j["bubble_gauss_max"] = bubble_max;
  j["pattern_counts"] = counts;
  j["pass"] = pass;
  OutputSink sink(o.out_path, out);
  *sink.os << j.dump(2) << "\n";
  return pass ? 0 : 3;
}

int cmd_source(const CommonOpts& o, const std::string& mode, const std::string& levels_arg,
               double aspect_in, const std::string& formulation, std::ostream& out,
               std::ostream& err) {
  const double aspect = aspect_in > 0.0 ? aspect_in : 1.0;
  const SpaceKind element = parse_element(o.element);
  if (o.problem != "example1") throw PreconditionError("unknown problem selector: " + o.problem);
  const ManufacturedProblem prob = example1();
  const ScalarField rho = constant_field(o.rho);
  const Domain domain = make_domain(o);
  if (domain.kind == DomainKind::LShape && (formulation == "reduced" || formulation == "both"))
    throw PreconditionError("reduced formulation is not available on the L-shape");

  std::vector<RectGrid> grids;
  if (!o.mesh_file.empty()) {
    grids.push_back(load_grid(o.mesh_file));
  } else if (mode == "nonuniform") {
    const auto vals = parse_list(levels_arg);
    if (vals.size() == 1) {
      for (int l = 1; l <= (int)vals[0]; ++l) grids.push_back(build_nonuniform_pattern(l));
    } else {
      for (double v : vals) grids.push_back(build_nonuniform_pattern((int)v));
    }
  } else {
    for (double v : parse_list(levels_arg)) {
      const int m = (int)v;
      const int n = std::max(1, (int)std::llround(v / aspect));
      grids.push_back(build_uniform(m, n, domain));
    }
  }

  std::vector<LevelError> rows(grids.size());
  std::vector<double> agreement(grids.size(), 0.0);
  AssembledSystem last_sys;

  run_levels((int)grids.size(), o.jobs, [&](int l) {
    const auto sol = solve_source_on(element, grids[l], prob, rho, formulation);
    const Norms norms = error_norms(sol.field, prob.u, prob.grad_u, rho);
    rows[l] = {l + 1, grids[l].max_h(), grids[l].max_hx(), norms.energy, norms.l2, 0.0, 0.0};
    if (sol.has_reduced) {
      const double dist = broken_energy_distance(sol.field, sol.reduced_field);
      agreement[l] = dist / std::max(1e-300, broken_energy_norm(sol.field));
    }
    if (o.dump_matrices && l == (int)grids.size() - 1) last_sys = sol.sys;
  });

  ErrorReport rep;
  rep.rows = rows;
  fill_eoc(rep);

  OutputSink sink(o.out_path, out);
  if (o.format == "json") {
    write_error_json(*sink.os, rep);
  } else {
    write_error_csv(*sink.os, rep);
  }
  if (formulation == "both") {
    nlohmann::ordered_json j;
    j["cross_check_max_rel_energy_distance"] =
        *std::max_element(agreement.begin(), agreement.end());
    err << j.dump() << "\n";
  }
  if (o.dump_matrices)
    dump_system(last_sys, o.out_path.empty() ? "system" : o.out_path);
  return 0;
}

int cmd_eigen(const CommonOpts& o, const std::string& mode, const std::string& hx_arg,
              const std::string& levels_arg, double aspect_in, int k,
              const std::string& formulation, std::ostream& out) {
  const SpaceKind element = parse_element(o.element);
  const ScalarField rho = constant_field(o.rho);
  const Domain domain = make_domain(o);
  const double aspect =
      aspect_in > 0.0 ? aspect_in : (domain.kind == DomainKind::LShape ? 0.5 : 1.0);

  std::vector<RectGrid> grids;
  if (!o.mesh_file.empty()) {
    grids.push_back(load_grid(o.mesh_file));
  } else if (mode == "nonuniform") {
    if (levels_arg.empty()) throw PreconditionError("nonuniform eigen runs need --levels");
    const auto vals = parse_list(levels_arg);
    if (vals.size() == 1) {
      for (int l = 1; l <= (int)vals[0]; ++l) grids.push_back(build_nonuniform_pattern(l));
    } else {
      for (double v : vals) grids.push_back(build_nonuniform_pattern((int)v));
    }
  } else {
    // --hx is the published tables' row label: the larger cell dimension;
    // --aspect is the ratio h_y/h_x of the two cell sizes
    for (double h : parse_list(hx_arg)) {
      const double chx = aspect >= 1.0 ? h / aspect : h;
      const double chy = aspect >= 1.0 ? h : h * aspect;
      const int m = cells_for(domain.width, chx);
      const int n = cells_for(domain.height, chy);
      grids.push_back(build_uniform(m, n, domain));
    }
  }

  std::vector<EigenLevel> rows(grids.size());
  AssembledSystem last_sys;
  run_levels((int)grids.size(), o.jobs, [&](int l) {
    AssembledSystem sys;
    rows[l] = {l + 1, grids[l].max_h(), grids[l].max_hx(),
               eigen_on(element, grids[l], rho, k, formulation, &sys)};
    if (o.dump_matrices && l == (int)grids.size() - 1) last_sys = std::move(sys);
  });

  // exact reference values are known analytically on the unit square
  std::vector<double> exact;
  const std::vector<double>* exact_ptr = nullptr;
  if (o.domain == "unit-square" && o.rho == 1.0) {
    exact = unit_square_eigenvalues(k);
    exact_ptr = &exact;
  }

  OutputSink sink(o.out_path, out);
  if (o.format == "json") {
    write_eigen_json(*sink.os, rows, exact_ptr);
  } else {
    write_eigen_csv(*sink.os, rows, exact_ptr);
  }
  if (o.dump_matrices)
    dump_system(last_sys, o.out_path.empty() ? "system" : o.out_path);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadratic nonconforming elements on rectangular grids"};
  app.name("rrmfem");

  CommonOpts o;
  int m = 0, n = 0, k = 6;
  std::string levels_arg, hx_arg;
  std::string mode = "uniform";
  std::string formulation_source = "saddle", formulation_eigen;
  double aspect = -1.0;
  bool homogeneous = false;

  auto add_common = [&](CLI::App* cmd, bool with_format) {
    cmd->add_option("--element", o.element)->check(CLI::IsMember({"q1", "wilson", "mc", "rm", "rrm"}));
    cmd->add_option("--domain", o.domain)->check(CLI::IsMember({"unit-square", "rect", "l-shape"}));
    cmd->add_option("--rect-w", o.rect_w);
    cmd->add_option("--rect-h", o.rect_h);
    cmd->add_option("--mesh-file", o.mesh_file);
    cmd->add_option("--out", o.out_path);
    cmd->add_option("--rho", o.rho);
    cmd->add_option("--jobs", o.jobs)->check(CLI::PositiveNumber);
    cmd->add_flag("--dump-matrices", o.dump_matrices);
    if (with_format) cmd->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* dims = app.add_subcommand("dims", "Space dimensions and constraint rank");
  dims->add_option("--m", m);
  dims->add_option("--n", n);
  dims->add_flag("--homogeneous", homogeneous);
  add_common(dims, false);

  CLI::App* source = app.add_subcommand("source", "Source-problem convergence study");
  source->add_option("--levels", levels_arg);
  source->add_option("--aspect", aspect, "cell aspect ratio h_y / h_x on uniform grids");
  source->add_flag_callback("--uniform", [&] { mode = "uniform"; });
  source->add_flag_callback("--nonuniform", [&] { mode = "nonuniform"; });
  source->add_option("--formulation", formulation_source)
      ->check(CLI::IsMember({"saddle", "reduced", "both"}));
  source->add_option("--problem", o.problem);
  add_common(source, true);

  CLI::App* eigen = app.add_subcommand("eigen", "Smallest eigenvalues");
  eigen->add_option("--hx", hx_arg,
                    "mesh sizes, one per study row (the larger cell dimension)");
  eigen->add_option("--aspect", aspect, "cell aspect ratio h_y / h_x");
  eigen->add_option("--levels", levels_arg);
  eigen->add_flag_callback("--uniform", [&] { mode = "uniform"; });
  eigen->add_flag_callback("--nonuniform", [&] { mode = "nonuniform"; });
  eigen->add_option("--k", k)->check(CLI::PositiveNumber);
  eigen->add_option("--formulation", formulation_eigen)
      ->check(CLI::IsMember({"saddle", "reduced"}));
  add_common(eigen, true);

  CLI::App* verify = app.add_subcommand("verify", "RRM basis and exact-sequence checks");
  verify->add_option("--m", m);
  verify->add_option("--n", n);
  add_common(verify, false);

  app.require_subcommand(1);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help
      out << app.help();
      return 0;
    }
    nlohmann::ordered_json j;
    j["error"] = e.what();
    j["kind"] = "usage";
    err << j.dump() << "\n";
    return 2;
  }

  try {
    if (dims->parsed()) {
      if (o.mesh_file.empty() && (m < 1 || n < 1))
        throw PreconditionError("dims requires --m and --n (or --mesh-file)");
      return cmd_dims(o, m, n, out);
    }
    if (source->parsed()) {
      if (o.mesh_file.empty() && levels_arg.empty())
        throw PreconditionError("source requires --levels (or --mesh-file)");
      return cmd_source(o, mode, levels_arg, aspect, formulation_source, out, err);
    }
    if (eigen->parsed()) {
      if (o.mesh_file.empty() && hx_arg.empty() && levels_arg.empty())
        throw PreconditionError("eigen requires --hx or --levels (or --mesh-file)");
      const std::string formulation =
          formulation_eigen.empty()
              ? (o.domain == "l-shape" ? std::string("saddle") : std::string("reduced"))
              : formulation_eigen;
      return cmd_eigen(o, mode, hx_arg, levels_arg, aspect, k, formulation, out);
    }
    if (verify->parsed()) {
      if (o.mesh_file.empty() && (m < 1 || n < 1))
        throw PreconditionError("verify requires --m and --n (or --mesh-file)");
      return cmd_verify(o, m, n, out);
    }
  } catch (const PreconditionError& e) {
    nlohmann::ordered_json j;
    j["error"] = e.what();
    j["kind"] = "precondition";
    err << j.dump() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    nlohmann::ordered_json j;
    j["error"] = e.what();
    j["kind"] = "numerical";
    err << j.dump() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace rrm
