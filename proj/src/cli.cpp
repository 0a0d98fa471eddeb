#include "hessmooth/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <variant>

#include "hessmooth/error.hpp"
#include "hessmooth/io.hpp"
#include "hessmooth/solve.hpp"

namespace hessmooth {

namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::string mesh_path;
  std::string grid_path;
  double h = 0.0;
  int threshold = 128;
  std::string energy = "hessian";
  double alpha = 0.5;
  double weight = 1.0;
  double lambda = 1e-3;
  std::string constraints_path;
  std::string handles_path;
  std::string field_path;
  int k = 10;
  int levels = 3;
  int steps = 3;
  std::string method = "fd";
  std::string out_dir;
  std::uint64_t seed = 1;
  std::vector<double> range;
};

/// Raised for flag-level problems that CLI11 cannot see (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Domain = std::variant<GridDomain, TriMesh>;

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw UsageError(what + ": file not found");
}

Domain load_domain(const RunConfig& cfg) {
  if (cfg.mesh_path.empty() == cfg.grid_path.empty())
    throw UsageError("domain: give exactly one of --mesh or --grid");
  if (!cfg.mesh_path.empty()) {
    require_file(cfg.mesh_path, "mesh");
    return parse_mesh(read_file(cfg.mesh_path),
                      mesh_format_from_path(cfg.mesh_path));
  }
  require_file(cfg.grid_path, "grid");
  if (!(cfg.h > 0.0)) throw UsageError("grid: --h must be positive");
  return grid_from_mask(parse_pgm(read_file(cfg.grid_path)), cfg.h,
                        cfg.threshold);
}

Index domain_size(const Domain& d) {
  if (const auto* g = std::get_if<GridDomain>(&d)) return g->num_nodes();
  return std::get<TriMesh>(d).num_vertices();
}

DenseMatrix domain_positions(const Domain& d) {
  if (const auto* g = std::get_if<GridDomain>(&d)) return grid_positions(*g);
  return std::get<TriMesh>(d).positions();
}

DiscreteEnergy build_energy(const Domain& d, const RunConfig& cfg) {
  const std::string& e = cfg.energy;
  if (e == "blend" && !(cfg.alpha >= 0.0 && cfg.alpha <= 1.0))
    throw UsageError("energy: --alpha must lie in [0, 1]");
  if (const auto* g = std::get_if<GridDomain>(&d)) {
    if (e == "hessian") return fd_hessian_energy(build_fd_hessian(*g));
    if (e == "laplacian-neumann")
      return build_fd_laplacian_energy(*g, LaplacianBc::ZeroNeumann);
    if (e == "laplacian-natural")
      return build_fd_laplacian_energy(*g, LaplacianBc::Natural);
    if (e == "blend")
      return blend_energy(fd_hessian_energy(build_fd_hessian(*g)),
                          build_fd_laplacian_energy(*g, LaplacianBc::Natural),
                          cfg.alpha);
    throw UsageError("energy: '" + e + "' is not available on grids");
  }
  const TriMesh& mesh = std::get<TriMesh>(d);
  if (e == "cr") return cr_energy(mesh);
  const FemOperators ops = build_fem_operators(mesh);
  if (e == "hessian") return fem_hessian_energy(ops);
  if (e == "laplacian-neumann")
    return fem_laplacian_energy(ops, LaplacianBc::ZeroNeumann);
  if (e == "laplacian-natural")
    return fem_laplacian_energy(ops, LaplacianBc::Natural);
  DiscreteEnergy b = blend_energy(fem_hessian_energy(ops),
                                  fem_laplacian_energy(ops, LaplacianBc::Natural),
                                  cfg.alpha);
  return b;
}

std::optional<std::array<double, 2>> heat_range(const RunConfig& cfg) {
  if (cfg.range.empty()) return std::nullopt;
  if (!(cfg.range[0] < cfg.range[1]))
    throw UsageError("range: LO must be below HI");
  return std::array<double, 2>{cfg.range[0], cfg.range[1]};
}

class Output {
 public:
  explicit Output(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_))
      fail(ErrorKind::Io, "output: cannot create directory " + dir);
  }
  void write(const std::string& name, std::string_view contents) const {
    write_file((dir_ / name).string(), contents);
  }
  /// `<stem>.csv` plus a heatmap (grid) or colored PLY (mesh).
  void field(const std::string& stem, const Domain& d, const Vector& u,
             const RunConfig& cfg) const {
    write(stem + ".csv", field_csv(u));
    if (const auto* g = std::get_if<GridDomain>(&d))
      write(stem + ".pgm", grid_heatmap_pgm(*g, u, heat_range(cfg)));
    else
      write(stem + ".ply", mesh_scalar_ply(std::get<TriMesh>(d), u, heat_range(cfg)));
  }

 private:
  fs::path dir_;
};

ConstraintSet snap(const Domain& d, const PointSamples& s) {
  if (const auto* g = std::get_if<GridDomain>(&d))
    return snap_points(*g, s.points, s.values);
  return snap_points(std::get<TriMesh>(d), s.points, s.values);
}

/// Smooth pattern plus uniform noise in [-0.1, 0.1], reproducible per seed.
Vector synthetic_field(const DenseMatrix& p, std::uint64_t seed, bool creased) {
  std::mt19937_64 rng(seed);
  Vector f(p.rows());
  const Eigen::VectorXd lo = p.colwise().minCoeff();
  const Eigen::VectorXd hi = p.colwise().maxCoeff();
  for (Index v = 0; v < p.rows(); ++v) {
    const double x = (p(v, 0) - lo[0]) / std::max(hi[0] - lo[0], 1e-300);
    const double y = (p(v, 1) - lo[1]) / std::max(hi[1] - lo[1], 1e-300);
    const double base = creased
                            ? 1.0 - std::abs(2.0 * x - 1.0) + 0.5 * y
                            : std::sin(2.0 * std::numbers::pi * x) *
                                  std::cos(std::numbers::pi * y);
    const double noise = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    f[v] = base + 0.2 * (noise - 0.5);
  }
  return f;
}

Vector data_field(const Domain& d, const RunConfig& cfg, bool creased) {
  if (!cfg.field_path.empty()) {
    require_file(cfg.field_path, "field");
    return parse_field_csv(read_file(cfg.field_path), domain_size(d));
  }
  return synthetic_field(domain_positions(d), cfg.seed, creased);
}

// ------------------------------------------------------------ subcommands

void cmd_interpolate(const RunConfig& cfg) {
  if (cfg.constraints_path.empty())
    throw UsageError("constraints: --constraints is required");
  require_file(cfg.constraints_path, "constraints");
  const Domain d = load_domain(cfg);
  const DiscreteEnergy e = build_energy(d, cfg);
  const ConstraintSet cs =
      snap(d, parse_point_csv(read_file(cfg.constraints_path), true));
  const Output out(cfg.out_dir);
  out.field("field", d, interpolate(e, cs), cfg);
}

void cmd_smooth(const RunConfig& cfg) {
  if (!(cfg.weight > 0.0)) throw UsageError("smooth: --weight must be positive");
  const Domain d = load_domain(cfg);
  const DiscreteEnergy e = build_energy(d, cfg);
  const Vector f = data_field(d, cfg, false);
  const Output out(cfg.out_dir);
  out.field("input", d, f, cfg);
  out.field("field", d, smooth(e, f, cfg.weight), cfg);
}

void cmd_modes(const RunConfig& cfg) {
  if (cfg.k < 1) throw UsageError("modes: -k must be at least 1");
  const Domain d = load_domain(cfg);
  const DiscreteEnergy e = build_energy(d, cfg);
  if (cfg.k >= e.size()) throw UsageError("modes: -k must be below the node count");
  const EigenPairs ep = modes(e, cfg.k);
  const Output out(cfg.out_dir);
  std::string csv = "index,eigenvalue\n";
  for (Index i = 0; i < ep.values.size(); ++i)
    csv += std::to_string(i) + "," + format_double(ep.values[i]) + "\n";
  out.write("spectrum.csv", csv);
  for (Index i = 0; i < ep.values.size(); ++i)
    out.field("mode_" + std::to_string(i), d, ep.vectors.col(i), cfg);
}

void cmd_weights(const RunConfig& cfg) {
  if (cfg.handles_path.empty()) throw UsageError("handles: --handles is required");
  require_file(cfg.handles_path, "handles");
  const Domain d = load_domain(cfg);
  const DiscreteEnergy e = build_energy(d, cfg);
  PointSamples s = parse_point_csv(read_file(cfg.handles_path), false);
  s.values.assign(s.points.size(), 0.0);
  const ConstraintSet cs = snap(d, s);
  std::vector<Index> handles;
  for (const auto& c : cs.entries) handles.push_back(c.index);
  const WeightMatrix wm = subspace_weights(e, handles, domain_positions(d));
  const double residual = wm.max_rowsum_residual();
  const Output out(cfg.out_dir);
  for (Index i = 0; i < wm.W.cols(); ++i)
    out.field("weight_" + std::to_string(i), d, wm.W.col(i), cfg);
  out.write("rowsum_residual.txt", format_double(residual) + "\n");
  if (!(residual <= 1e-8))
    fail(ErrorKind::SolverFailure,
         "weights: partition of unity violated (" + format_double(residual) + ")");
}

void cmd_l1(const RunConfig& cfg) {
  if (!(cfg.lambda > 0.0)) throw UsageError("l1: --lambda must be positive");
  const Domain d = load_domain(cfg);
  L1Problem p;
  if (const auto* g = std::get_if<GridDomain>(&d)) {
    if (cfg.energy == "hessian") {
      p.op = build_fd_hessian(*g).elementwise();
    } else if (cfg.energy == "laplacian-neumann") {
      p.op = build_fd_laplacian(*g, LaplacianBc::ZeroNeumann);
    } else {
      throw UsageError("l1: --energy must be hessian or laplacian-neumann");
    }
    p.mass = Vector::Constant(g->num_nodes(), g->h() * g->h());
  } else {
    const FemOperators ops = build_fem_operators(std::get<TriMesh>(d));
    p.mass = ops.M.diagonal_entries();
    if (cfg.energy == "hessian") {
      p.op = fem_hessian_operator(ops);
    } else if (cfg.energy == "laplacian-neumann") {
      p.op.H = ops.L.row_scaled(p.mass.cwiseInverse());
      p.op.weights = p.mass;
    } else {
      throw UsageError("l1: --energy must be hessian or laplacian-neumann");
    }
  }
  p.f = data_field(d, cfg, true);
  p.options.lambda = cfg.lambda;
  const L1Result r = l1_smooth(p);
  const Output out(cfg.out_dir);
  out.field("input", d, p.f, cfg);
  out.field("field", d, r.u, cfg);
  std::string log = "iteration,objective,primal_residual,dual_residual\n";
  for (std::size_t i = 0; i < r.objective_history.size(); ++i)
    log += std::to_string(i + 1) + "," + format_double(r.objective_history[i]) +
           "," + format_double(r.primal_history[i]) + "," +
           format_double(r.dual_history[i]) + "\n";
  out.write("admm.csv", log);
}

void cmd_flow(const RunConfig& cfg) {
  if (cfg.mesh_path.empty()) throw UsageError("flow: --mesh is required");
  if (cfg.steps < 1) throw UsageError("flow: --steps must be at least 1");
  if (!(cfg.lambda > 0.0)) throw UsageError("flow: --lambda must be positive");
  FlowOperator kind;
  if (cfg.energy == "hessian")
    kind = FlowOperator::Hessian;
  else if (cfg.energy == "laplacian-neumann")
    kind = FlowOperator::Laplacian;
  else
    throw UsageError("flow: --energy must be hessian or laplacian-neumann");
  const Domain d = load_domain(cfg);
  TriMesh mesh = std::get<TriMesh>(d);
  if (mesh.dim() == 2) mesh = lift_to_3d(mesh);
  const auto seq = l1_flow(mesh, cfg.lambda, cfg.steps, kind);
  const Output out(cfg.out_dir);
  for (std::size_t s = 0; s < seq.size(); ++s) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "%03zu", s);
    out.write(std::string("mesh_") + stem + ".off", serialize_off(seq[s].mesh));
    out.write(std::string("energy_density_") + stem + ".csv",
              field_csv(seq[s].energy_density));
  }
}

void cmd_annulus(const RunConfig& cfg) {
  if (cfg.levels < 1 || cfg.levels > 5)
    throw UsageError("annulus: --levels must lie in [1, 5]");
  AnnulusMethod method;
  if (cfg.method == "fd")
    method = AnnulusMethod::FiniteDifference;
  else if (cfg.method == "fem")
    method = AnnulusMethod::MixedFem;
  else if (cfg.method == "cr")
    method = AnnulusMethod::CrouzeixRaviart;
  else
    throw UsageError("annulus: --method must be fd, fem or cr");
  const auto rows = annulus_convergence(method, cfg.levels);
  std::string csv = "h,Linf_error,rate\n";
  for (const auto& r : rows)
    csv += format_double(r.h) + "," + format_double(r.linf_error) + "," +
           format_double(r.rate) + "\n";
  const Output out(cfg.out_dir);
  out.write("convergence.csv", csv);
}

void add_domain_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--mesh", cfg.mesh_path, "OFF or OBJ triangle mesh");
  sub->add_option("--grid", cfg.grid_path, "PGM mask image");
  sub->add_option("--h", cfg.h, "grid spacing");
  sub->add_option("--threshold", cfg.threshold, "PGM inside threshold")
      ->capture_default_str();
  sub->add_option("--energy", cfg.energy,
                  "hessian|laplacian-neumann|laplacian-natural|cr|blend")
      ->capture_default_str();
  sub->add_option("--alpha", cfg.alpha, "blend weight in [0, 1]")
      ->capture_default_str();
  sub->add_option("--range", cfg.range, "heatmap range LO HI")->expected(2);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Smoothness energies on grids and triangle meshes", "hessmooth"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    void (*run)(const RunConfig&);
  };
  const Sub subs[] = {
      {"interpolate", "interpolate scattered values", cmd_interpolate},
      {"smooth", "smooth a dense field", cmd_smooth},
      {"modes", "lowest generalized eigenmodes", cmd_modes},
      {"weights", "subspace deformation weights", cmd_weights},
      {"l1", "L1 (crease-preserving) smoothing", cmd_l1},
      {"flow", "L1 geometric flow of a 3D mesh", cmd_flow},
      {"annulus", "annulus convergence study", cmd_annulus},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> registered;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--out", cfg.out_dir, "output directory")->required();
    sub->add_option("--seed", cfg.seed, "seed for synthetic data")
        ->capture_default_str();
    const std::string name = s.name;
    if (name != "annulus") add_domain_flags(sub, cfg);
    if (name == "interpolate")
      sub->add_option("--constraints", cfg.constraints_path, "CSV x,y[,z],value");
    if (name == "smooth")
      sub->add_option("--weight", cfg.weight, "smoothness weight")->capture_default_str();
    if (name == "smooth" || name == "l1")
      sub->add_option("--field", cfg.field_path, "CSV index,value input field");
    if (name == "modes") sub->add_option("-k", cfg.k, "number of modes")->capture_default_str();
    if (name == "weights")
      sub->add_option("--handles", cfg.handles_path, "CSV x,y[,z] handle points");
    if (name == "l1" || name == "flow")
      sub->add_option("--lambda", cfg.lambda, "L1 weight")->capture_default_str();
    if (name == "flow")
      sub->add_option("--steps", cfg.steps, "flow steps")->capture_default_str();
    if (name == "annulus") {
      sub->add_option("--levels", cfg.levels, "dyadic refinements")->capture_default_str();
      sub->add_option("--method", cfg.method, "fd|fem|cr")->capture_default_str();
    }
    registered.emplace_back(sub, &s);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "hessmooth: " << e.what() << "\n";
    return kExitInvalid;
  }

  try {
    for (const auto& [sub, s] : registered)
      if (sub->parsed()) s->run(cfg);
    return kExitOk;
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    err << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::InvalidInput: return kExitInvalid;
      case ErrorKind::Io: return kExitIo;
      default: return kExitSolver;
    }
  } catch (const std::exception& e) {
    err << "hessmooth: " << e.what() << "\n";
    return kExitSolver;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace hessmooth
