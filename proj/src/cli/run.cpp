#include "dedem/cli/run.hpp"

#include "dedem/config/scenario.hpp"
#include "dedem/elasticity/energy.hpp"
#include "dedem/fracture/propagation.hpp"
#include "dedem/fracture/sif.hpp"
#include "dedem/optim/gradcheck.hpp"
#include "dedem/optim/solve.hpp"
#include "dedem/quadrature/grid.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>

namespace dedem::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

struct Options {
  std::string verb;
  std::string scenario;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::string grid;
  bool deterministic = false;
  std::string warm_start;
  std::string params;
  std::string lattice;
  std::size_t coords = 20;
  int log_every = 1000;
  std::vector<std::string> argv;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& m) : Error("cli", m) {}
};

std::pair<int, int> parse_pair(const std::string& s, const std::string& flag) {
  const auto comma = s.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(s);
    std::size_t p1 = 0, p2 = 0;
    const int a = std::stoi(s.substr(0, comma), &p1);
    const int b = std::stoi(s.substr(comma + 1), &p2);
    if (p1 != comma || p2 != s.size() - comma - 1) throw std::invalid_argument(s);
    return {a, b};
  } catch (const std::exception&) {
    throw UsageError(flag + " expects NX,NY, got '" + s + "'");
  }
}

config::Scenario load(const Options& o, std::string& text) {
  if (!fs::exists(o.scenario)) throw UsageError("scenario file '" + o.scenario + "' does not exist");
  text = config::read_text_file(o.scenario);
  config::Scenario sc = config::parse_scenario(text);
  if (o.seed) sc.seed = *o.seed;
  if (o.epochs) {
    sc.train.max_epochs = *o.epochs;
    sc.propagation.max_epochs = *o.epochs;
    sc.train.patience = std::min(sc.train.patience, std::max(*o.epochs, 1));
  }
  if (!o.grid.empty()) std::tie(sc.grid.nx, sc.grid.ny) = parse_pair(o.grid, "--grid");
  if (o.deterministic) sc.train.deterministic = true;
  sc.validate();
  return sc;
}

json train_echo(const optim::TrainConfig& t) {
  return {{"lr0", t.lr0},           {"decay_factor", t.decay_factor},
          {"decay_every", t.decay_every}, {"patience", t.patience},
          {"max_epochs", t.max_epochs}, {"beta1", t.beta1},
          {"beta2", t.beta2},       {"adam_eps", t.adam_eps},
          {"improvement_tol", t.improvement_tol}, {"deterministic", t.deterministic},
          {"displacement_scale", t.displacement_scale}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw Error("cli", "cannot write '" + path.string() + "'");
  f << j.dump(2) << '\n';
}

void write_manifest(const Options& o, const config::Scenario* sc, const std::string& text) {
  json m;
  m["verb"] = o.verb;
  m["argv"] = o.argv;
  m["scenario_path"] = o.scenario;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  m["scenario_fnv1a"] = hash;
  m["scenario_text"] = text;
  if (sc != nullptr) {
    m["seed"] = sc->seed;
    m["grid"] = {sc->grid.nx, sc->grid.ny};
    m["network"] = {{"width", sc->network.width},
                    {"residual_blocks", sc->network.residual_blocks},
                    {"embedding_scale", sc->network.embedding_scale},
                    {"embed_interfaces", sc->network.embed_interfaces}};
    m["train"] = train_echo(sc->train);
  }
  m["overrides"] = {{"seed", o.seed ? json(*o.seed) : json(nullptr)},
                    {"epochs", o.epochs ? json(*o.epochs) : json(nullptr)},
                    {"grid", o.grid.empty() ? json(nullptr) : json(o.grid)},
                    {"deterministic", o.deterministic},
                    {"warm_start", o.warm_start.empty() ? json(nullptr) : json(o.warm_start)}};
  write_json(fs::path(o.out_dir) / "manifest.json", m);
}

nn::ParamSnapshot snapshot_of(const nn::TrialSpace& space, std::uint64_t seed,
                              const nn::ParamVector& p) {
  return {space.config, seed, space.output_scale, space.embedding_scale, p};
}

std::vector<Vec2> output_points(const Options& o, const config::Scenario& sc) {
  int nx = sc.grid.nx, ny = sc.grid.ny;
  if (!o.lattice.empty()) std::tie(nx, ny) = parse_pair(o.lattice, "--lattice");
  return elastic::lattice_points(sc.domain, nx, ny);
}

optim::EpochCallback progress(const Options& o, std::ostream& out, std::string prefix) {
  if (o.log_every <= 0) return {};
  return [&out, every = o.log_every, prefix = std::move(prefix)](int e, double loss) {
    if (e % every == 0) out << prefix << "epoch " << e << " loss " << loss << std::endl;
    return true;
  };
}

void emit_sif(const nn::ParamVector& p, const nn::TrialSpace& space, const config::Scenario& sc,
              const fs::path& dir, std::ostream& out) {
  const geometry::CrackPath& crack = fracture::active_crack(sc);
  const fracture::TipSif t = fracture::extract_sif(p, space, sc, crack);
  fracture::write_sif_csv(dir / "sif.csv", {0}, {t.a}, {t.sif});
  out << "K1 " << t.sif.k1 << " K2 " << t.sif.k2 << " MPa*sqrt(mm)"
      << (t.bimaterial ? " (interface)" : "") << '\n';
}

bool has_active_crack(const config::Scenario& sc) {
  try {
    fracture::active_crack(sc);
    return true;
  } catch (const Error&) {
    return false;
  }
}

int cmd_solve(const Options& o, const config::Scenario& sc, std::ostream& out) {
  std::optional<nn::ParamVector> init;
  const nn::TrialSpace space = nn::make_trial_space(sc);
  if (!o.warm_start.empty()) init = nn::warm_start(nn::load_snapshot(o.warm_start), space.config);
  const optim::Solution s = optim::solve(sc, init, progress(o, out, ""));
  const fs::path dir(o.out_dir);
  optim::write_loss_history(s.report, dir / "loss_history.csv");
  nn::save_snapshot(snapshot_of(s.space, sc.seed, s.report.best_params), dir / "params.json");
  const std::vector<Vec2> pts = output_points(o, sc);
  config::export_field(elastic::field_snapshot(s.report.best_params, sc, s.space, pts),
                       dir / "field.csv");
  write_json(dir / "summary.json", {{"epochs_run", s.report.epochs_run()},
                                    {"best_epoch", s.report.best_epoch},
                                    {"best_loss", s.report.best_loss},
                                    {"early_stopped", s.report.early_stopped},
                                    {"flagged_epochs", s.report.flagged_epochs},
                                    {"wall_seconds", s.report.wall_seconds},
                                    {"quadrature_nodes", s.grid.nodes.size()},
                                    {"parameters", s.space.config.param_count()}});
  out << "best loss " << s.report.best_loss << " J/m at epoch " << s.report.best_epoch << " ("
      << s.report.epochs_run() << " epochs, " << s.report.wall_seconds << " s)\n";
  if (has_active_crack(sc)) emit_sif(s.report.best_params, s.space, sc, dir, out);
  return 0;
}

int cmd_sif(const Options& o, const config::Scenario& sc, std::ostream& out) {
  if (o.params.empty()) throw UsageError("sif needs --params <snapshot>");
  const nn::TrialSpace space = nn::make_trial_space(sc);
  const nn::ParamSnapshot snap = nn::load_snapshot(o.params);
  nn::TrialSpace used = space;
  used.output_scale = snap.output_scale;
  used.embedding_scale = snap.embedding_scale;
  emit_sif(nn::warm_start(snap, space.config), used, sc, o.out_dir, out);
  return 0;
}

int cmd_propagate(const Options& o, const config::Scenario& sc, std::ostream& out) {
  fracture::PropagationOptions opt;
  opt.steps = sc.propagation.steps;
  opt.step_length = sc.propagation.step_length;
  opt.max_epochs = sc.propagation.max_epochs;
  if (!o.warm_start.empty()) {
    opt.initial_params =
        nn::warm_start(nn::load_snapshot(o.warm_start), nn::make_trial_space(sc).config);
  }
  const fs::path dir(o.out_dir);
  opt.on_epoch = progress(o, out, "  ");
  opt.on_step = [&](const fracture::PropagationStep& s, const fracture::PropagationState& st) {
    const config::Scenario cur = fracture::with_crack(sc, st.history[static_cast<std::size_t>(s.step)]);
    const nn::TrialSpace space = nn::make_trial_space(cur);
    nn::save_snapshot(snapshot_of(space, sc.seed, s.params),
                      dir / ("params_step" + std::to_string(s.step) + ".json"));
    optim::write_loss_history(s.report, dir / ("loss_step" + std::to_string(s.step) + ".csv"));
    out << "step " << s.step << " K1 " << s.k1 << " K2 " << s.k2 << " theta_c "
        << s.kink * 180.0 / std::numbers::pi << " deg\n";
    return true;
  };
  const fracture::PropagationState st = fracture::propagate(sc, opt);
  fracture::write_path_csv(st, dir / "path.csv");
  std::vector<int> steps;
  std::vector<double> a;
  std::vector<fracture::SifResult> sifs;
  for (const auto& s : st.steps) {
    steps.push_back(s.step);
    a.push_back(s.crack_length);
    sifs.push_back(s.sif);
  }
  fracture::write_sif_csv(dir / "sif.csv", steps, a, sifs);
  json hist = json::array();
  for (const auto& c : st.history) {
    json v = json::array();
    for (const auto& p : c.vertices()) v.push_back({p.x(), p.y()});
    hist.push_back(v);
  }
  write_json(dir / "cracks.json", {{"crack", st.crack_id}, {"left_domain", st.left_domain},
                                   {"history", hist}});
  if (st.left_domain) out << "crack reached the domain boundary\n";
  return 0;
}

int cmd_check_grad(const Options& o, const config::Scenario& sc, std::ostream& out) {
  const nn::TrialSpace space = nn::make_trial_space(sc);
  const quad::QuadGrid grid = quad::build_scenario_grid(sc);
  const elastic::EnergyModel model(sc, grid, space);
  nn::ParamVector p = nn::init_params(space.config, sc.seed);
  if (!o.params.empty()) p = nn::warm_start(nn::load_snapshot(o.params), space.config);
  const optim::GradCheckReport rep = optim::check_gradient(model, p, o.coords, sc.seed);
  std::ofstream f(fs::path(o.out_dir) / "gradcheck.csv");
  if (!f) throw Error("cli", "cannot write gradcheck.csv");
  f.precision(17);
  f << "index,analytic,finite_difference,tape,rel_error\n";
  for (const auto& e : rep.entries) {
    f << e.index << ',' << e.analytic << ',' << e.finite_difference << ',' << e.tape << ','
      << e.rel_error << '\n';
  }
  const json summary = {{"parameters", p.size()},
                        {"checked", rep.entries.size()},
                        {"max_rel_error", rep.max_rel_error},
                        {"max_tape_rel_error", rep.max_tape_rel_error}};
  out << summary.dump() << '\n';
  return 0;
}

int cmd_validate(const Options&, const config::Scenario& sc, std::ostream& out) {
  const nn::TrialSpace space = nn::make_trial_space(sc);
  const quad::QuadGrid grid = quad::build_scenario_grid(sc);
  json cracks = json::array();
  for (const auto& c : sc.cracks) {
    cracks.push_back({{"id", c.id()}, {"length", c.length()}, {"tips", c.tip_count()}});
  }
  out << json{{"ok", true},
              {"name", sc.name},
              {"materials", sc.regions.size()},
              {"cracks", cracks},
              {"interfaces", sc.interfaces.size()},
              {"embeddings", space.specs.size()},
              {"parameters", space.config.param_count()},
              {"quadrature_nodes", grid.nodes.size()},
              {"output_scale", space.output_scale}}
             .dump()
      << '\n';
  return 0;
}

int cmd_export_grid(const Options& o, const config::Scenario& sc, std::ostream& out) {
  const quad::QuadGrid grid = quad::build_scenario_grid(sc);
  quad::write_grid_csv(grid, fs::path(o.out_dir) / "grid.csv");
  out << grid.nodes.size() << " nodes, total weight " << grid.total_weight() << '\n';
  return 0;
}

void print_error(std::ostream& err, const std::string& module, const std::string& message) {
  err << json{{"error", {{"module", module}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  o.argv = args;
  CLI::App app{"Deep energy method solver for 2D fracture problems", "dedem"};
  app.require_subcommand(1, 1);
  auto add_common = [&o](CLI::App* c) {
    c->add_option("--scenario", o.scenario, "Scenario file")->required();
    c->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
    c->add_option("--seed", o.seed, "Override the scenario seed");
    c->add_option("--epochs", o.epochs, "Override train.max_epochs")->check(CLI::NonNegativeNumber);
    c->add_option("--grid", o.grid, "Override the quadrature grid as NX,NY");
    c->add_flag("--deterministic", o.deterministic, "Ordered reductions");
  };
  struct Verb {
    const char* name;
    const char* help;
    int (*fn)(const Options&, const config::Scenario&, std::ostream&);
  };
  const Verb verbs[] = {
      {"solve", "Train the scenario and write loss history, parameters and field", cmd_solve},
      {"propagate", "Grow the active crack step by step", cmd_propagate},
      {"sif", "Extract stress intensity factors from a parameter snapshot", cmd_sif},
      {"check-grad", "Compare the energy gradient with finite differences", cmd_check_grad},
      {"validate", "Parse and lint a scenario", cmd_validate},
      {"export-grid", "Write the quadrature points", cmd_export_grid},
  };
  for (const auto& v : verbs) {
    CLI::App* c = app.add_subcommand(v.name, v.help);
    add_common(c);
    const std::string name = v.name;
    if (name == "solve" || name == "propagate") {
      c->add_option("--warm-start", o.warm_start, "Initial parameter snapshot");
      c->add_option("--log-every", o.log_every, "Progress interval in epochs (0 = quiet)");
    }
    if (name == "solve") c->add_option("--lattice", o.lattice, "Field output lattice NX,NY");
    if (name == "sif" || name == "check-grad") c->add_option("--params", o.params, "Parameter snapshot");
    if (name == "check-grad") c->add_option("--coords", o.coords, "Coordinates to check");
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "cli", e.what());
    return 2;
  }
  const Verb* verb = nullptr;
  for (const auto& v : verbs) {
    if (app.got_subcommand(v.name)) {
      verb = &v;
      o.verb = v.name;
    }
  }

  std::string text;
  try {
    fs::create_directories(o.out_dir);
    std::optional<config::Scenario> sc;
    try {
      sc = load(o, text);
    } catch (...) {
      // Still leave a manifest behind for failed lint runs.
      if (!text.empty()) write_manifest(o, nullptr, text);
      throw;
    }
    write_manifest(o, &*sc, text);
    return verb->fn(o, *sc, out);
  } catch (const UsageError& e) {
    print_error(err, e.module(), e.what());
    return 2;
  } catch (const Error& e) {
    print_error(err, e.module(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "cli", e.what());
    return 1;
  }
}

}  // namespace dedem::cli
