#include "qfluct/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qfluct/ensemble.hpp"
#include "qfluct/io.hpp"
#include "qfluct/rng.hpp"
#include "qfluct/tilted.hpp"

#ifndef QFLUCT_VERSION
#define QFLUCT_VERSION "0.0.0"
#endif

namespace qfluct {

using json = nlohmann::json;

std::string version() { return QFLUCT_VERSION; }

std::string to_string(Engines e) {
  switch (e) {
    case Engines::exact: return "exact";
    case Engines::qmc: return "qmc";
    case Engines::both: return "both";
  }
  return "both";
}

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::diagonal: return "diagonal";
    case InitialKind::coherent_thermal: return "coherent_thermal";
    case InitialKind::gibbs: return "gibbs";
    case InitialKind::matrix: return "matrix";
  }
  return "diagonal";
}

bool InitialStateSpec::operator==(const InitialStateSpec& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case InitialKind::diagonal: return weights == o.weights;
    case InitialKind::coherent_thermal: return h == o.h;
    case InitialKind::gibbs: return beta == o.beta;
    case InitialKind::matrix:
      return matrix.rows() == o.matrix.rows() && matrix.cols() == o.matrix.cols() && matrix == o.matrix;
  }
  return false;
}

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers can be rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<document>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, double fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(field(key), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(field(key), "must be finite");
    return x;
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer()) throw ConfigError(field(key), "must be nonnegative");
    throw ConfigError(field(key), "expected a nonnegative integer");
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(field(key), "expected a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      if (!e.is_number()) throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Section child(const std::string& key) {
    const json* v = get(key);
    static const json kEmpty = json::object();
    return Section(v ? *v : kEmpty, field(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Eigen::MatrixXd read_square(Section& s, const std::string& key, Index d, bool required) {
  const json* v = s.get(key);
  if (!v) {
    if (required) throw ConfigError(s.field(key), "required for kind \"matrix\"");
    return Eigen::MatrixXd::Zero(d, d);
  }
  if (!v->is_array() || v->size() != static_cast<std::size_t>(d)) {
    throw ConfigError(s.field(key), "expected a " + std::to_string(d) + "x" + std::to_string(d) + " array");
  }
  Eigen::MatrixXd m(d, d);
  for (Index r = 0; r < d; ++r) {
    const json& row = (*v)[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(d)) {
      throw ConfigError(s.field(key) + "[" + std::to_string(r) + "]", "expected " + std::to_string(d) + " numbers");
    }
    for (Index c = 0; c < d; ++c) {
      const json& e = row[static_cast<std::size_t>(c)];
      if (!e.is_number()) {
        throw ConfigError(s.field(key) + "[" + std::to_string(r) + "][" + std::to_string(c) + "]",
                          "expected a number");
      }
      m(r, c) = e.get<double>();
    }
  }
  return m;
}

template <class Enum>
Enum parse_choice(const std::string& field, const std::string& value,
                  std::initializer_list<std::pair<const char*, Enum>> choices) {
  std::string names;
  for (const auto& [name, e] : choices) {
    if (value == name) return e;
    names += names.empty() ? name : std::string("|") + name;
  }
  throw ConfigError(field, "expected one of " + names + ", got \"" + value + "\"");
}

std::string to_string(DriftScheme d) { return d == DriftScheme::rk4 ? "rk4" : "first_order"; }

constexpr Index kDim = 4;

ExperimentConfig from_json(const json& root) {
  ExperimentConfig cfg;
  Section top(root, "");

  Section m = top.child("model");
  cfg.model.J = m.number("J", cfg.model.J);
  cfg.model.h0 = m.number("h0", cfg.model.h0);
  cfg.model.h1 = m.number("h1", cfg.model.h1);
  cfg.model.t_f = m.number("t_f", cfg.model.t_f);
  cfg.model.T_a = m.number("T_a", cfg.model.T_a);
  cfg.model.T_b = m.number("T_b", cfg.model.T_b);
  cfg.model.g = m.number("g", cfg.model.g);
  m.finish();

  Section is = top.child("initial_state");
  auto& st = cfg.initial_state;
  st.kind = parse_choice<InitialKind>(is.field("kind"), is.string("kind", "diagonal"),
                                      {{"diagonal", InitialKind::diagonal},
                                       {"coherent_thermal", InitialKind::coherent_thermal},
                                       {"gibbs", InitialKind::gibbs},
                                       {"matrix", InitialKind::matrix}});
  // Only the keys belonging to the chosen kind are accepted.
  switch (st.kind) {
    case InitialKind::diagonal: st.weights = is.numbers("weights", st.weights); break;
    case InitialKind::coherent_thermal: st.h = is.number("h", st.h); break;
    case InitialKind::gibbs: st.beta = is.number("beta", 1.0 / cfg.model.T_a); break;
    case InitialKind::matrix: {
      const Eigen::MatrixXd re = read_square(is, "re", kDim, true);
      const Eigen::MatrixXd im = read_square(is, "im", kDim, false);
      st.matrix = re.cast<Complex>() + kI * im.cast<Complex>();
      break;
    }
  }
  is.finish();

  Section r = top.child("run");
  auto& run = cfg.run;
  run.dt = r.number("dt", run.dt);
  run.output_dt = r.number("output_dt", run.output_dt);
  run.n_traj = r.unsigned_int("n_traj", run.n_traj);
  run.seed = r.unsigned_int("seed", run.seed);
  run.engines = parse_choice<Engines>(r.field("engines"), r.string("engines", to_string(run.engines)),
                                      {{"exact", Engines::exact}, {"qmc", Engines::qmc}, {"both", Engines::both}});
  run.initial_basis =
      parse_choice<InitialBasis>(r.field("initial_basis"), r.string("initial_basis", to_string(run.initial_basis)),
                                 {{"eigen", InitialBasis::eigen}, {"jump", InitialBasis::jump}});
  run.xi = r.numbers("xi", run.xi);
  run.variant_x = r.boolean("variant_x", run.variant_x);
  run.drift = parse_choice<DriftScheme>(r.field("drift"), r.string("drift", to_string(run.drift)),
                                        {{"rk4", DriftScheme::rk4}, {"first_order", DriftScheme::first_order}});
  const std::uint64_t workers = r.unsigned_int("workers", run.workers);
  if (workers > 4096) throw ConfigError(r.field("workers"), "at most 4096");
  run.workers = static_cast<unsigned>(workers);
  run.chunk = r.unsigned_int("chunk", run.chunk);
  r.finish();

  Section o = top.child("output");
  cfg.output.dir = o.string("dir", cfg.output.dir);
  cfg.output.events = o.boolean("events", cfg.output.events);
  o.finish();

  top.finish();
  validate_config(cfg);
  return cfg;
}

json to_json_value(const ExperimentConfig& cfg) {
  json j;
  j["model"] = {{"J", cfg.model.J},     {"h0", cfg.model.h0},   {"h1", cfg.model.h1}, {"t_f", cfg.model.t_f},
                {"T_a", cfg.model.T_a}, {"T_b", cfg.model.T_b}, {"g", cfg.model.g}};
  const auto& st = cfg.initial_state;
  json is = {{"kind", to_string(st.kind)}};
  switch (st.kind) {
    case InitialKind::diagonal: is["weights"] = st.weights; break;
    case InitialKind::coherent_thermal: is["h"] = st.h; break;
    case InitialKind::gibbs: is["beta"] = st.beta; break;
    case InitialKind::matrix: {
      json re = json::array(), im = json::array();
      for (Index row = 0; row < st.matrix.rows(); ++row) {
        json rr = json::array(), ir = json::array();
        for (Index c = 0; c < st.matrix.cols(); ++c) {
          rr.push_back(st.matrix(row, c).real());
          ir.push_back(st.matrix(row, c).imag());
        }
        re.push_back(rr);
        im.push_back(ir);
      }
      is["re"] = re;
      is["im"] = im;
      break;
    }
  }
  j["initial_state"] = is;
  const auto& run = cfg.run;
  j["run"] = {{"dt", run.dt},
              {"output_dt", run.output_dt},
              {"n_traj", run.n_traj},
              {"seed", run.seed},
              {"engines", to_string(run.engines)},
              {"initial_basis", to_string(run.initial_basis)},
              {"xi", run.xi},
              {"variant_x", run.variant_x},
              {"drift", to_string(run.drift)},
              {"workers", run.workers},
              {"chunk", run.chunk}};
  j["output"] = {{"dir", cfg.output.dir}, {"events", cfg.output.events}};
  return j;
}

bool integer_ratio(double num, double den) {
  const double n = num / den;
  return std::abs(n - std::round(n)) <= 1e-9 * std::max(1.0, n);
}

}  // namespace

ExperimentConfig load_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
  }
  return from_json(root);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

void validate_config(const ExperimentConfig& cfg) {
  const auto& m = cfg.model;
  auto finite = [](const char* f, double v) {
    if (!std::isfinite(v)) throw ConfigError(f, "must be finite");
  };
  finite("model.J", m.J);
  finite("model.h0", m.h0);
  finite("model.h1", m.h1);
  if (!(m.t_f > 0.0) || !std::isfinite(m.t_f)) throw ConfigError("model.t_f", "must be positive");
  if (!(m.T_a > 0.0) || !std::isfinite(m.T_a)) throw ConfigError("model.T_a", "must be positive");
  if (!(m.T_b > 0.0) || !std::isfinite(m.T_b)) throw ConfigError("model.T_b", "must be positive");
  if (!(m.g > 0.0) || !std::isfinite(m.g)) throw ConfigError("model.g", "must be positive");

  const auto& st = cfg.initial_state;
  switch (st.kind) {
    case InitialKind::diagonal: {
      if (st.weights.size() != static_cast<std::size_t>(kDim)) {
        throw ConfigError("initial_state.weights", "expected " + std::to_string(kDim) + " entries");
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < st.weights.size(); ++i) {
        if (!(st.weights[i] >= 0.0) || !std::isfinite(st.weights[i])) {
          throw ConfigError("initial_state.weights[" + std::to_string(i) + "]", "must be nonnegative");
        }
        sum += st.weights[i];
      }
      if (std::abs(sum - 1.0) > 1e-8) throw ConfigError("initial_state.weights", "must sum to 1");
      break;
    }
    case InitialKind::coherent_thermal:
      if (!std::isfinite(st.h)) throw ConfigError("initial_state.h", "must be finite");
      break;
    case InitialKind::gibbs:
      if (!(st.beta > 0.0) || !std::isfinite(st.beta)) throw ConfigError("initial_state.beta", "must be positive");
      break;
    case InitialKind::matrix:
      if (st.matrix.rows() != kDim || st.matrix.cols() != kDim) {
        throw ConfigError("initial_state.re", "expected a 4x4 matrix");
      }
      try {
        DensityMatrix::from_operator(st.matrix);
      } catch (const Error& e) {
        throw ConfigError("initial_state.re", e.what());
      }
      break;
  }

  const auto& run = cfg.run;
  if (!(run.dt > 0.0) || !std::isfinite(run.dt)) throw ConfigError("run.dt", "must be positive");
  if (!integer_ratio(m.t_f, run.dt)) throw ConfigError("run.dt", "model.t_f must be an integer multiple of dt");
  if (!(run.output_dt > 0.0) || !std::isfinite(run.output_dt)) throw ConfigError("run.output_dt", "must be positive");
  if (run.output_dt < run.dt * (1.0 - 1e-12) || !integer_ratio(run.output_dt, run.dt)) {
    throw ConfigError("run.output_dt", "must be an integer multiple of run.dt");
  }
  if (cfg.runs_qmc() && run.n_traj < 1) throw ConfigError("run.n_traj", "must be at least 1 when QMC runs");
  if (run.chunk < 1) throw ConfigError("run.chunk", "must be at least 1");
  for (std::size_t i = 0; i < run.xi.size(); ++i) {
    if (!std::isfinite(run.xi[i])) throw ConfigError("run.xi[" + std::to_string(i) + "]", "must be finite");
  }
  try {
    check_step_size(build_two_spin_model(m), time_grid(cfg));
  } catch (const IntegrationError& e) {
    throw ConfigError("run.dt", e.what());
  }
}

std::string to_json(const ExperimentConfig& cfg) { return to_json_value(cfg).dump(2); }

std::string config_hash(const ExperimentConfig& cfg) {
  json j = to_json_value(cfg);
  j["output"].erase("dir");
  j["run"].erase("workers");
  return hex64(fnv1a64(j.dump()));
}

DensityMatrix coherent_thermal_state(double h) {
  const Index d = kDim;
  const Operator one = identity(2);
  Operator h0 = -0.5 * projector(d, 0) - 0.25 * projector(d, 3) - (1.0 / 3.0) * projector(d, 1) -
                h * tensor(pauli::x(), one) + h * tensor(one, pauli::x());
  Operator rho = hermitian_function(h0, [](double e) { return std::exp(-0.5 * e); });
  rho /= rho.trace().real();
  return DensityMatrix::from_operator(rho);
}

DensityMatrix initial_state(const ExperimentConfig& cfg) {
  const auto& st = cfg.initial_state;
  switch (st.kind) {
    case InitialKind::diagonal: return DensityMatrix::diagonal(st.weights);
    case InitialKind::coherent_thermal: return coherent_thermal_state(st.h);
    case InitialKind::gibbs: return DensityMatrix::gibbs(build_two_spin_model(cfg.model).hamiltonian(0.0), st.beta);
    case InitialKind::matrix: return DensityMatrix::from_operator(st.matrix);
  }
  throw Error("initial_state: unknown kind");
}

TimeGrid time_grid(const ExperimentConfig& cfg) {
  const auto stride = static_cast<std::size_t>(std::llround(cfg.run.output_dt / cfg.run.dt));
  return TimeGrid::covering(cfg.model.t_f, cfg.run.dt, stride);
}

namespace {

bool equal_temperatures(const TwoSpinParams& m) { return std::abs(m.T_a - m.T_b) <= 1e-12 * m.T_a; }

// Trajectory Jarzynski estimator applies when rho0 is the Gibbs state of H(0) at the common bath temperature.
bool jarzynski_qmc_applies(const ExperimentConfig& cfg) {
  return equal_temperatures(cfg.model) && cfg.initial_state.kind == InitialKind::gibbs &&
         std::abs(cfg.initial_state.beta * cfg.model.T_a - 1.0) <= 1e-12;
}

std::string xi_column(double xi) { return "gf_xi_" + format_double(xi); }

ResultSeries exact_series(const LindbladModel& model, const ExperimentConfig& cfg, const DensityMatrix& rho0,
                          const TimeGrid& grid, const StateSeries& density, json& diag) {
  const std::vector<double> times = grid.output_times();
  const std::size_t n = times.size();
  ResultSeries ex(times);

  const PsiBarReport bar = psi_bar_one(model, grid);
  ex.set("psi_bar_dev", bar.deviation);
  ex.set("ft_value", ft_functional_series(model, rho0, density.rho, grid));

  std::vector<double> jl(n, std::nan("")), jr(n, std::nan(""));
  if (equal_temperatures(cfg.model)) {
    const JarzynskiExact jz = jarzynski_lhs(model, 1.0 / cfg.model.T_a, grid);
    jl = jz.lhs;
    jr = jz.rhs;
    diag["jarzynski_lhs_jump_basis_final"] = jz.lhs_jump_basis.back();
  }
  ex.set("jarzynski_lhs", jl);
  ex.set("jarzynski_rhs", jr);
  ex.set("second_law_gap", second_law_gap(density));
  ex.set("mean_exp_neg_SB_exact", generating_function(model, rho0, 1.0, grid));
  for (std::size_t a = 0; a < density.heat.size(); ++a) {
    ex.set("Q_D_" + model.baths()[a].label, density.heat[a]);
  }
  std::vector<double> svn;
  for (const auto& r : density.rho) svn.push_back(von_neumann_entropy(r));
  ex.set("S_vn", svn);
  for (double xi : cfg.run.xi) ex.set(xi_column(xi), generating_function(model, rho0, xi, grid));

  diag["psi_bar_max_deviation"] = bar.max_deviation;
  double gap_min = 0.0;
  for (double g : ex.column("second_law_gap")) gap_min = std::min(gap_min, g);
  diag["second_law_gap_min"] = gap_min;
  return ex;
}

ResultSeries qmc_series(const LindbladModel& model, const ExperimentConfig& cfg, const DensityMatrix& rho0,
                        const TimeGrid& grid, const StateSeries& density,
                        std::vector<std::pair<std::uint64_t, JumpEvent>>& events, json& diag) {
  const std::vector<double> times = grid.output_times();
  const InitialEnsemble initial(rho0, cfg.run.initial_basis);
  const PropagationTable table(model, grid, cfg.run.drift);
  const EntropyReference reference(rho0.matrix(), density.rho);

  std::optional<JarzynskiReference> jref;
  if (jarzynski_qmc_applies(cfg)) jref.emplace(model, cfg.initial_state.beta, rho0, times);

  EnsembleOptions opts;
  opts.n_traj = cfg.run.n_traj;
  opts.seed = cfg.run.seed;
  opts.workers = cfg.run.workers;
  opts.chunk = cfg.run.chunk;
  opts.jarzynski = jref ? &*jref : nullptr;
  opts.events = cfg.output.events;
  EnsembleResult res = run_ensemble(table, initial, &reference, opts);

  ResultSeries s = res.ft->result(times, cfg.run.variant_x);
  if (jref) {
    std::vector<double> mean, se, ratio;
    for (std::size_t k = 0; k < times.size(); ++k) {
      mean.push_back(res.jarzynski[k].mean);
      se.push_back(res.jarzynski[k].stderr_mean());
      ratio.push_back(jref->ratio(k));
    }
    s.set("jarzynski_qmc", mean);
    s.set("se_jarzynski", se);
    s.set("jarzynski_rhs", ratio);
  }
  const FloorCounter& f = res.ft->floors();
  diag["floored_overlaps"] = f.floored;
  diag["overlap_evaluations"] = f.evaluated;
  diag["floor_flagged"] = f.flagged();
  diag["n_events"] = res.events.size();
  events = std::move(res.events);
  return s;
}

// Writes every file under a temporary name first, then renames; removes everything on failure.
std::vector<std::string> write_outputs(const std::string& dir,
                                       const std::vector<std::pair<std::string, std::string>>& files) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  fs::create_directories(root);
  std::vector<fs::path> staged, done;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& p : staged) fs::remove(p, ec);
    for (const auto& p : done) fs::remove(p, ec);
  };
  try {
    for (const auto& [name, body] : files) {
      const fs::path tmp = root / (name + ".partial");
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      staged.push_back(tmp);
      out << body;
      out.close();
      if (!out) throw Error("cannot write " + tmp.string());
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
      const fs::path final_path = root / files[i].first;
      fs::rename(staged[i], final_path);
      done.push_back(final_path);
    }
  } catch (...) {
    cleanup();
    throw;
  }
  std::vector<std::string> out;
  for (const auto& p : done) out.push_back(p.string());
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const LindbladModel model = build_two_spin_model(cfg.model);
  const DensityMatrix rho0 = initial_state(cfg);
  const TimeGrid grid = time_grid(cfg);

  ExperimentResult result;
  result.config_hash = config_hash(cfg);

  json diag = json::object();
  const ValidationReport report = validate_model(model, grid.output_times());
  json checks = json::array();
  for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  diag["model_checks"] = checks;
  if (!report.ok()) throw Error("model validation failed; see `validate` for details");

  // rho(t) is needed by both engines (system entropy of trajectories, final states of the FT functional).
  result.density = evolve_density(model, rho0, grid);
  diag["max_trace_drift"] = result.density.max_trace_drift;
  diag["min_eigenvalue"] = result.density.min_eigenvalue;

  if (cfg.runs_exact()) result.exact = exact_series(model, cfg, rho0, grid, result.density, diag);
  if (cfg.runs_qmc()) {
    result.summary = qmc_series(model, cfg, rho0, grid, result.density, result.events, diag);
    result.summary->metadata["config_hash"] = result.config_hash;
    result.summary->metadata["seed"] = std::to_string(cfg.run.seed);
  }
  result.exact.metadata["config_hash"] = result.config_hash;

  json meta;
  meta["config"] = to_json_value(cfg);
  meta["config_hash"] = result.config_hash;
  meta["seed"] = cfg.run.seed;
  meta["rng"] = kRngName;
  meta["versions"] = {{"qfluct", version()},
                      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION)},
                      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  meta["diagnostics"] = diag;
  meta["notes"] = {
      "jump probabilities per step are first order in dt",
      "trajectory system entropy uses -log(<psi_t|rho_t|psi_t>/<psi_0|rho_0|psi_0>); overlaps are floored at 1e-30",
      "standard errors are sample standard errors of the mean over independent trajectories"};
  result.meta_json = meta.dump(2) + "\n";

  if (!cfg.output.dir.empty()) {
    std::vector<std::pair<std::string, std::string>> files;
    const std::vector<std::string> labels{model.baths()[0].label, model.baths()[1].label};
    if (result.summary) {
      std::ostringstream os;
      write_series_csv(os, *result.summary, result.config_hash);
      files.emplace_back("summary.csv", os.str());
      if (cfg.output.events) {
        std::ostringstream ev;
        write_events_csv(ev, result.events, labels, result.config_hash);
        files.emplace_back("events.csv", ev.str());
      }
    }
    if (cfg.runs_exact()) {
      std::ostringstream os;
      write_series_csv(os, result.exact, result.config_hash);
      files.emplace_back("exact.csv", os.str());
      std::ostringstream ds;
      write_state_csv(ds, result.density, labels, result.config_hash);
      files.emplace_back("density.csv", ds.str());
    }
    files.emplace_back("meta.json", result.meta_json);
    result.files = write_outputs(cfg.output.dir, files);
  }
  return result;
}

ExperimentConfig panel_config(const std::string& name) {
  ExperimentConfig cfg;
  auto& m = cfg.model;
  m.T_a = 1.0;
  m.g = 0.1;
  m.t_f = 15.0;
  if (name == "a") {
    m.J = 0.0;
    m.T_b = 1.0;
  } else if (name == "b") {
    m.J = 0.1;
    m.T_b = 1.2;
  } else if (name == "c") {
    m.J = 0.1;
    m.T_b = 1.2;
    cfg.initial_state.kind = InitialKind::coherent_thermal;
    cfg.initial_state.h = 0.2;
  } else if (name == "d") {
    m.J = 0.2;
    m.T_b = 1.2;
    m.h0 = 0.0;
    m.h1 = 0.4;
  } else {
    throw Error("unknown panel \"" + name + "\"; expected a, b, c, d, app2 or app3");
  }
  return cfg;
}

std::vector<std::pair<std::string, ExperimentConfig>> panel_runs(const std::string& name, const std::string& out_dir,
                                                                 std::optional<std::size_t> n_traj,
                                                                 std::optional<std::uint64_t> seed) {
  namespace fs = std::filesystem;
  std::vector<std::pair<std::string, ExperimentConfig>> runs;
  auto add = [&](const std::string& label, ExperimentConfig cfg) {
    if (n_traj) cfg.run.n_traj = *n_traj;
    if (seed) cfg.run.seed = *seed;
    cfg.output.dir = out_dir.empty() ? std::string() : (fs::path(out_dir) / label).lexically_normal().string();
    runs.emplace_back(label, std::move(cfg));
  };
  if (name == "app2") {
    for (const char* p : {"a", "b", "c", "d"}) {
      ExperimentConfig cfg = panel_config(p);
      cfg.run.variant_x = true;
      add(std::string("app2/") + p, cfg);
    }
  } else if (name == "app3") {
    for (InitialBasis b : {InitialBasis::eigen, InitialBasis::jump}) {
      ExperimentConfig cfg = panel_config("c");
      cfg.run.initial_basis = b;
      add("app3/" + to_string(b), cfg);
    }
  } else {
    ExperimentConfig cfg = panel_config(name);
    add(name, cfg);
    // A single panel writes straight into out_dir.
    runs.back().second.output.dir = out_dir;
  }
  return runs;
}

std::vector<PanelRun> reproduce_panel(const std::string& name, const std::string& out_dir,
                                      std::optional<std::size_t> n_traj, std::optional<std::uint64_t> seed,
                                      unsigned workers) {
  std::vector<PanelRun> out;
  for (auto& [label, cfg] : panel_runs(name, out_dir, n_traj, seed)) {
    cfg.run.workers = workers;
    out.push_back({label, run_experiment(cfg)});
  }
  return out;
}

}  // namespace qfluct
