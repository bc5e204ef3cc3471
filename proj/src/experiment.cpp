#include "qspec/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Core>
#include <fftw3.h>
#include <fmt/format.h>
#include <gsl/gsl_version.h>

#include "qspec/ed.hpp"
#include "qspec/resources.hpp"

namespace qspec {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(PrepKind kind) {
  switch (kind) {
    case PrepKind::ExactFreeFermion: return "exact_ff";
    case PrepKind::Dga: return "dga";
    case PrepKind::HubbardGround: return "fh_ground";
  }
  return "?";
}

namespace {

// Object reader that remembers which keys were consumed so leftovers can be rejected.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json* child(const std::string& key) {
    seen_.insert(key);
    return has(key) ? &j_.at(key) : nullptr;
  }

  double number(const std::string& key, double fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(at(key), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(at(key), "must be finite");
    return x;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
    return v->get<std::int64_t>();
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0))
      throw ConfigError(at(key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(at(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError(at(item.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Fn>
auto parse_enum(const std::string& path, const std::string& value, Fn fn) {
  try {
    return fn(value);
  } catch (const std::invalid_argument&) {
    throw ConfigError(path, "unrecognized value '" + value + "'");
  }
}

PrepKind prep_kind_from_string(const std::string& s) {
  if (s == "exact_ff") return PrepKind::ExactFreeFermion;
  if (s == "dga") return PrepKind::Dga;
  if (s == "fh_ground") return PrepKind::HubbardGround;
  throw std::invalid_argument(s);
}

std::string ordering_key(OrderingKind k) { return k == OrderingKind::Interleaved ? "interleaved" : "all_up_all_down"; }

OrderingKind ordering_from_key(const std::string& s) {
  if (s == "interleaved") return OrderingKind::Interleaved;
  if (s == "all_up_all_down") return OrderingKind::AllUpAllDown;
  throw std::invalid_argument(s);
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const fs::path& base_dir) {
  ExperimentConfig c;
  Node root(doc, "");
  {
    const json* v = root.child("schema_version");
    if (!v) throw ConfigError("schema_version", "required");
    if (!v->is_number_integer() || v->get<int>() != kSchemaVersion)
      throw ConfigError("schema_version", fmt::format("unsupported, expected {}", kSchemaVersion));
  }
  c.resources_only = root.boolean("resources_only", false);
  c.output = root.string("output", c.output);

  if (const json* m = root.child("model")) {
    Node n(*m, "model");
    c.model.L = static_cast<int>(n.integer("L", c.model.L));
    c.model.J = n.number("J", c.model.J);
    c.model.U = n.number("U", c.model.U);
    c.model.Ne = static_cast<int>(n.integer("Ne", c.model.Ne));
    n.finish();
  }
  if (c.model.L < 2) throw ConfigError("model.L", "must be >= 2");
  if (c.model.Ne <= 0 || c.model.Ne > 2 * c.model.L || c.model.Ne % 2)
    throw ConfigError("model.Ne", "must be even and in (0, 2L]");
  if (!c.resources_only && c.model.n_qubits() > kMaxQubits)
    throw ConfigError("model.L", fmt::format("{} qubits exceed the {}-qubit simulation ceiling", c.model.n_qubits(),
                                             kMaxQubits));

  if (const json* p = root.child("prep")) {
    Node n(*p, "prep");
    c.prep.kind = parse_enum("prep.kind", n.string("kind", "dga"), prep_kind_from_string);
    c.prep.n_layers = static_cast<int>(n.integer("n_layers", c.prep.n_layers));
    if (n.has("objective"))
      c.prep.objective = parse_enum("prep.objective", n.string("objective", ""), dga_objective_from_string);
    else
      n.child("objective");
    c.prep.seed = n.seed("seed", c.prep.seed);
    c.prep.restarts = static_cast<int>(n.integer("restarts", c.prep.restarts));
    c.prep.ansatz_file = n.string("ansatz_file", "");
    n.finish();
  }
  if (c.prep.n_layers < 1) throw ConfigError("prep.n_layers", "must be >= 1");
  if (c.prep.restarts < 1) throw ConfigError("prep.restarts", "must be >= 1");
  if (!c.prep.ansatz_file.empty()) {
    fs::path f = c.prep.ansatz_file;
    if (f.is_relative() && !base_dir.empty()) f = base_dir / f;
    if (!fs::exists(f)) throw ConfigError("prep.ansatz_file", "file not found: " + f.string());
    c.prep.ansatz_file = f.string();
  }
  if (c.prep.kind == PrepKind::HubbardGround && c.model.L > 8)
    throw ConfigError("prep.kind", "fh_ground needs exact diagonalization (L <= 8)");

  if (const json* l = root.child("layout")) {
    Node n(*l, "layout");
    c.layout.ordering = parse_enum("layout.ordering", n.string("ordering", "interleaved"), ordering_from_key);
    c.layout.final_fswap = n.boolean("final_fswap", true);
    n.finish();
  }

  if (const json* d = root.child("dynamics")) {
    Node n(*d, "dynamics");
    c.dynamics.T = n.number("T", c.dynamics.T);
    c.dynamics.trotter.n_trotter = static_cast<int>(n.integer("n_trotter", c.dynamics.trotter.n_trotter));
    c.dynamics.trotter.order = parse_enum("dynamics.order", n.string("order", "first"), trotter_order_from_string);
    c.dynamics.trotter.fixed_step = n.boolean("fixed_step", false);
    c.dynamics.time_points = static_cast<int>(n.integer("time_points", c.dynamics.time_points));
    n.finish();
  }
  if (!(c.dynamics.T > 0)) throw ConfigError("dynamics.T", "must be positive");
  if (c.dynamics.trotter.n_trotter < 1) throw ConfigError("dynamics.n_trotter", "must be >= 1");
  if (c.dynamics.time_points < 4) throw ConfigError("dynamics.time_points", "must be >= 4");

  if (const json* e = root.child("execution")) {
    Node n(*e, "execution");
    c.execution.mode = parse_enum("execution.mode", n.string("mode", "exact"), execution_mode_from_string);
    const auto shots = n.integer("shots", static_cast<std::int64_t>(c.execution.shots));
    if (shots < 1) throw ConfigError("execution.shots", "must be >= 1");
    c.execution.shots = static_cast<std::uint64_t>(shots);
    c.execution.seed = n.seed("seed", c.execution.seed);
    c.execution.postselect = n.boolean("postselect", true);
    n.finish();
  }
  if (c.execution.mode == ExecutionMode::Sampled && c.layout.ordering == OrderingKind::AllUpAllDown &&
      !c.layout.final_fswap)
    throw ConfigError("execution.mode", "shot sampling needs layout.final_fswap for pair measurements");

  if (const json* z = root.child("noise")) {
    Node n(*z, "noise");
    NoiseModel nm;
    const int nq = c.model.n_qubits();
    if (const json* b = n.child("bit_flip")) {
      if (b->is_number()) {
        nm.bit_flip.assign(static_cast<std::size_t>(nq), b->get<double>());
      } else if (b->is_array()) {
        for (const auto& x : *b) {
          if (!x.is_number()) throw ConfigError("noise.bit_flip", "expected numbers");
          nm.bit_flip.push_back(x.get<double>());
        }
      } else {
        throw ConfigError("noise.bit_flip", "expected a number or an array");
      }
    }
    if (n.has("site_bit_flip")) {
      if (!nm.bit_flip.empty()) throw ConfigError("noise.site_bit_flip", "conflicts with noise.bit_flip");
      nm.bit_flip = site_bit_flips(c.model.L, n.number("site_bit_flip", 0.0));
    } else {
      n.child("site_bit_flip");
    }
    nm.two_qubit_depolarizing = n.number("two_qubit_depolarizing", 0.0);
    nm.readout_flip = n.number("readout_flip", 0.0);
    nm.coherent_rx = n.number("coherent_rx", 0.0);
    nm.twirling = n.boolean("twirling", false);
    nm.exact_channel = n.boolean("exact_channel", true);
    nm.trajectories = static_cast<int>(n.integer("trajectories", nm.trajectories));
    nm.rng_seed = n.seed("seed", nm.rng_seed);
    n.finish();
    try {
      nm.validate(nq);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("noise", e.what());
    }
    if (c.execution.mode == ExecutionMode::ExactPropagator && !nm.is_noiseless())
      throw ConfigError("noise", "the exact propagator mode is noiseless");
    c.noise = nm;
  }

  if (const json* a = root.child("analysis")) {
    Node n(*a, "analysis");
    c.analysis.omega_max = n.number("omega_max", c.analysis.omega_max);
    c.analysis.ridge = n.boolean("ridge", true);
    c.analysis.bootstrap = static_cast<int>(n.integer("bootstrap", c.analysis.bootstrap));
    if (const json* refs = n.child("references")) {
      if (!refs->is_array()) throw ConfigError("analysis.references", "expected an array");
      for (std::size_t i = 0; i < refs->size(); ++i) {
        const std::string path = fmt::format("analysis.references[{}]", i);
        Node r((*refs)[i], path);
        ReferenceConfig ref;
        ref.name = r.string("name", "");
        ref.run_dir = r.string("run", "");
        ref.builtin = r.string("builtin", "");
        r.finish();
        if (ref.run_dir.empty() == ref.builtin.empty())
          throw ConfigError(path, "give exactly one of 'run' or 'builtin'");
        if (!ref.builtin.empty() && ref.builtin != "exact_propagator")
          throw ConfigError(path + ".builtin", "unknown builtin '" + ref.builtin + "'");
        if (!ref.run_dir.empty()) {
          fs::path dir = ref.run_dir;
          if (dir.is_relative() && !base_dir.empty()) dir = base_dir / dir;
          if (!fs::exists(dir / "timeseries.csv"))
            throw ConfigError(path + ".run", "no timeseries.csv under " + dir.string());
          ref.run_dir = dir.string();
        }
        if (ref.name.empty()) ref.name = ref.builtin.empty() ? ref.run_dir : ref.builtin;
        c.analysis.references.push_back(ref);
      }
    }
    n.finish();
  }
  if (!(c.analysis.omega_max > 0)) throw ConfigError("analysis.omega_max", "must be positive");
  if (c.analysis.bootstrap < 0) throw ConfigError("analysis.bootstrap", "must be >= 0");
  root.finish();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("parse error: ") + e.what());
  }
  if (doc.is_object() && doc.contains("manifest_version")) {
    if (!doc.contains("config")) throw ConfigError("config", "manifest without an embedded config");
    doc = doc.at("config");
  }
  return parse_config(doc, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["resources_only"] = c.resources_only;
  j["output"] = c.output;
  j["model"] = {{"L", c.model.L}, {"J", c.model.J}, {"U", c.model.U}, {"Ne", c.model.Ne}};
  j["prep"] = {{"kind", to_string(c.prep.kind)},
               {"n_layers", c.prep.n_layers},
               {"objective", to_string(c.prep.objective.value_or(default_objective(c.model.L)))},
               {"seed", c.prep.seed},
               {"restarts", c.prep.restarts}};
  if (!c.prep.ansatz_file.empty()) j["prep"]["ansatz_file"] = c.prep.ansatz_file;
  j["layout"] = {{"ordering", ordering_key(c.layout.ordering)}, {"final_fswap", c.layout.final_fswap}};
  j["dynamics"] = {{"T", c.dynamics.T},
                   {"n_trotter", c.dynamics.trotter.n_trotter},
                   {"order", to_string(c.dynamics.trotter.order)},
                   {"fixed_step", c.dynamics.trotter.fixed_step},
                   {"time_points", c.dynamics.time_points}};
  j["execution"] = {{"mode", to_string(c.execution.mode)},
                    {"shots", c.execution.shots},
                    {"seed", c.execution.seed},
                    {"postselect", c.execution.postselect}};
  if (c.noise) {
    const auto& n = *c.noise;
    j["noise"] = {{"bit_flip", n.bit_flip},
                  {"two_qubit_depolarizing", n.two_qubit_depolarizing},
                  {"readout_flip", n.readout_flip},
                  {"coherent_rx", n.coherent_rx},
                  {"twirling", n.twirling},
                  {"exact_channel", n.exact_channel},
                  {"trajectories", n.trajectories},
                  {"seed", n.rng_seed}};
  }
  json refs = json::array();
  for (const auto& r : c.analysis.references) {
    json e{{"name", r.name}};
    if (!r.builtin.empty()) e["builtin"] = r.builtin;
    if (!r.run_dir.empty()) e["run"] = r.run_dir;
    refs.push_back(e);
  }
  j["analysis"] = {{"omega_max", c.analysis.omega_max},
                   {"ridge", c.analysis.ridge},
                   {"bootstrap", c.analysis.bootstrap},
                   {"references", refs}};
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

void override_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.prep.seed = seed;
  config.execution.seed = seed;
  if (config.noise) config.noise->rng_seed = seed;
}

json RunManifest::to_json() const {
  json t = json::object();
  for (const auto& [stage, sec] : timings) t[stage] = sec;
  return {{"manifest_version", 1}, {"config_hash", config_hash}, {"config", config}, {"seeds", seeds},
          {"versions", versions},   {"timings", t},                {"derived", derived}};
}

PreparedInitial prepare_initial(const ExperimentConfig& config) {
  const auto& model = config.model;
  switch (config.prep.kind) {
    case PrepKind::ExactFreeFermion: {
      Preparation prep = exact_preparation(model);
      Statevector s = prepare_state(prep.up, prep.down);
      return {std::move(s), std::move(prep), std::nullopt};
    }
    case PrepKind::Dga: {
      DgaAnsatz ansatz;
      if (!config.prep.ansatz_file.empty()) {
        std::ifstream in(config.prep.ansatz_file);
        ansatz = read_ansatz(in);
        if (ansatz.L != model.L || ansatz.Ne != model.Ne || ansatz.n_layers != config.prep.n_layers)
          throw ConfigError("prep.ansatz_file", "ansatz was built for a different L, Ne or n_layers");
      } else {
        OptimizerConfig oc;
        oc.restarts = config.prep.restarts;
        oc.seed = config.prep.seed;
        ansatz = dga_optimize(model, config.prep.n_layers, config.prep.objective.value_or(default_objective(model.L)),
                              oc);
      }
      Preparation prep = dga_preparation(ansatz);
      Statevector s = prepare_state(prep.up, prep.down);
      return {std::move(s), std::move(prep), std::move(ansatz)};
    }
    case PrepKind::HubbardGround: {
      const EdOracle ed(model);
      const GroundState gs = ground_state(ed);
      return {ed.to_statevector(gs.vector, OrderingKind::AllUpAllDown), std::nullopt, std::nullopt};
    }
  }
  throw std::logic_error("unknown preparation");
}

Comparison compare_grids(const std::string& name, const TimeSeriesGrid& a, const TimeSeriesGrid& b,
                         double omega_max) {
  if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols())
    throw std::invalid_argument(fmt::format("incompatible grids: {}x{} vs {}x{}", a.values.rows(), a.values.cols(),
                                            b.values.rows(), b.values.cols()));
  for (std::size_t m = 0; m < a.times.size(); ++m)
    if (std::abs(a.times[m] - b.times[m]) > 1e-9 * std::max(1.0, std::abs(a.times[m])))
      throw std::invalid_argument("incompatible grids: time axes differ");
  Comparison c;
  c.reference = name;
  c.ssim_time = ssim(a, b);
  c.rmse_time = rmse(a, b);
  const QsfGrid qa = qsf_transform(a, omega_max), qb = qsf_transform(b, omega_max);
  c.ssim_qsf = ssim(qa, qb);
  c.rmse_qsf = rmse(qa, qb);
  return c;
}

Comparison compare_runs(const fs::path& run_a, const fs::path& run_b, double omega_max) {
  auto load = [](const fs::path& dir) {
    const fs::path f = fs::is_directory(dir) ? dir / "timeseries.csv" : dir;
    std::ifstream in(f);
    if (!in) throw std::invalid_argument("cannot open " + f.string());
    return read_timeseries_csv(in);
  };
  return compare_grids(run_b.string(), load(run_a), load(run_b), omega_max);
}

json to_json(const Comparison& c) {
  json j{{"reference", c.reference},
         {"ssim_time", c.ssim_time},
         {"rmse_time", c.rmse_time},
         {"ssim_qsf", c.ssim_qsf},
         {"rmse_qsf", c.rmse_qsf}};
  if (c.ssim_qsf_bootstrap)
    j["ssim_qsf_bootstrap"] = {{"mean", c.ssim_qsf_bootstrap->mean},
                               {"stderr", c.ssim_qsf_bootstrap->stderr_estimate}};
  if (c.rmse_qsf_bootstrap)
    j["rmse_qsf_bootstrap"] = {{"mean", c.rmse_qsf_bootstrap->mean},
                               {"stderr", c.rmse_qsf_bootstrap->stderr_estimate}};
  return j;
}

namespace {

class StageTimer {
 public:
  explicit StageTimer(std::vector<std::pair<std::string, double>>& out) : out_(out) {}
  void mark(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    out_.emplace_back(stage, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  std::vector<std::pair<std::string, double>>& out_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json versions() {
  return {{"qspec", kVersion},
          {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
          {"fftw", std::string(fftw_version)},
          {"gsl", GSL_VERSION},
          {"compiler", __VERSION__}};
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
}

template <class Fn>
std::string render(Fn fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

// Resample each time point's kept shots and redo the spectrum.
std::pair<BootstrapResult, BootstrapResult> bootstrap_qsf(const ProtocolRun& run, const QsfGrid& reference, int L,
                                                          double omega_max, int n_boot, std::uint64_t seed) {
  std::vector<double> s_vals, r_vals;
  TimeSeriesGrid g = run.series;
  for (int b = 0; b < n_boot; ++b) {
    std::mt19937_64 rng(derive_seed(seed, 0xB0075712ULL, static_cast<std::uint64_t>(b)));
    for (std::size_t m = 0; m < run.records.size(); ++m) {
      const auto& recs = run.records[m];
      const std::uint64_t total = total_shots(recs);
      std::vector<ShotRecord> draw;
      if (total > 0) {
        std::vector<double> w;
        for (const auto& r : recs) w.push_back(static_cast<double>(r.count));
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        std::vector<std::uint64_t> counts(recs.size(), 0);
        for (std::uint64_t s = 0; s < total; ++s) ++counts[pick(rng)];
        for (std::size_t i = 0; i < recs.size(); ++i) draw.push_back({recs[i].bits, counts[i]});
      }
      const auto sx = estimate_spin_x(draw, L);
      for (int i = 0; i < L; ++i) g.values(i, static_cast<Eigen::Index>(m)) = sx[static_cast<std::size_t>(i)];
    }
    const QsfGrid q = qsf_transform(g, omega_max);
    s_vals.push_back(ssim(q, reference));
    r_vals.push_back(rmse(q, reference));
  }
  auto summarize = [](const std::vector<double>& v) {
    BootstrapResult r;
    for (double x : v) r.mean += x;
    r.mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - r.mean) * (x - r.mean);
    r.stderr_estimate = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    return r;
  };
  return {summarize(s_vals), summarize(r_vals)};
}

RunResult resources_run(const ExperimentConfig& config, const RunOptions& options, RunManifest manifest) {
  const auto& m = config.model;
  const int N = config.dynamics.trotter.n_trotter, n = config.prep.n_layers;
  const bool exact = config.prep.kind != PrepKind::Dga;
  json derived;
  if (config.layout.ordering == OrderingKind::Interleaved && !exact) {
    const auto f = estimate_interleaved(m.L, N, n);
    derived["formula"] = {{"depth", f.two_qubit_depth}, {"gates", f.two_qubit_gates}};
    json seg = json::array();
    for (const auto& s : f.breakdown) seg.push_back({{"segment", s.name}, {"depth", s.depth}, {"gates", s.gates}});
    derived["breakdown"] = seg;
  } else if (config.layout.ordering == OrderingKind::AllUpAllDown) {
    const auto f = estimate_all_up_all_down(m.L, N, n, config.layout.final_fswap, exact, m.Ne);
    derived["formula"] = {{"depth", f.two_qubit_depth}, {"gates", f.two_qubit_gates}};
    derived["post_selection_available"] = f.post_selection_available;
  }
  // Walk the real circuit shape; DGA angles are irrelevant for the layering.
  Preparation prep;
  if (exact) {
    prep = exact_preparation(m);
  } else {
    DgaAnsatz shape;
    shape.L = m.L;
    shape.Ne = m.Ne;
    shape.n_layers = n;
    shape.angles.assign(static_cast<std::size_t>(2 * (m.L - 1) * n), 0.0);
    shape.occupied_modes = initial_occupation(m.L, m.Ne);
    prep = dga_preparation(shape);
  }
  const ProtocolCircuit circuit = build_full_circuit(m, prep, config.dynamics.trotter, config.dynamics.T, config.layout);
  const auto w = walk_circuit(circuit);
  derived["walked"] = {{"depth", w.two_qubit_depth}, {"gates", w.two_qubit_gates}};
  manifest.derived = derived;
  if (options.write_files) {
    const fs::path out = config.output;
    fs::create_directories(out);
    write_text(out / "resources.txt", render([&](std::ostream& os) {
                 write_resource_table(os, {{m.L, N, n, m.Ne, config.dynamics.T}}, false);
               }));
    write_text(out / "resources.csv", render([&](std::ostream& os) {
                 write_resource_table(os, {{m.L, N, n, m.Ne, config.dynamics.T}}, true);
               }));
    write_text(out / "circuit.txt", render([&](std::ostream& os) { write_circuit(os, circuit); }));
    write_text(out / "manifest.json", manifest.to_json().dump(2) + "\n");
  }
  RunResult r;
  r.manifest = std::move(manifest);
  return r;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  RunManifest manifest;
  manifest.config = to_json(config);
  manifest.config_hash = config_hash(config);
  manifest.seeds = {{"prep", config.prep.seed}, {"execution", config.execution.seed}};
  if (config.noise) manifest.seeds["noise"] = config.noise->rng_seed;
  manifest.versions = versions();
  if (config.resources_only) return resources_run(config, options, std::move(manifest));

  StageTimer timer(manifest.timings);
  const auto& model = config.model;
  RunResult result;
  json derived;

  PreparedInitial init = prepare_initial(config);
  if (init.ansatz) {
    derived["F_DGA"] = init.ansatz->sector_fidelity;
    derived["F_state"] = init.ansatz->fidelity;
    derived["dga_energy"] = init.ansatz->energy;
    derived["dga_converged"] = init.ansatz->converged;
  }
  result.ansatz = init.ansatz;
  timer.mark("prep");

  const QuenchedState start = quench_state(model, init.state, config.layout);
  const auto times = uniform_times(config.dynamics.T, config.dynamics.time_points);
  const NoiseModel noise = config.noise.value_or(NoiseModel{});
  ProtocolRun run = run_noisy_protocol(model, start, config.dynamics.trotter, config.dynamics.T, times,
                                       config.execution, noise, options.threads);
  timer.mark("evolve");

  const QsfGrid qsf = qsf_transform(run.series, config.analysis.omega_max);
  derived["padding"] = {{"n_samples", qsf.padding.n_samples},
                        {"n_padded", qsf.padding.n_padded},
                        {"d_omega", qsf.padding.d_omega},
                        {"d_omega_fine", qsf.padding.d_omega_fine},
                        {"padded_window", qsf.padding.padded_window}};
  derived["qsf_all_zero"] = qsf.all_zero;
  if (config.analysis.ridge) {
    SpectralRidge ridge = extract_ridge(qsf);
    const double two_kf = 2.0 * model.fermi_momentum();
    json cusps = json::array();
    std::optional<double> nearest;
    for (const auto& c : ridge.cusps) {
      cusps.push_back({{"k", c.momentum}, {"omega", c.omega}, {"dk", c.momentum_uncertainty}});
      if (c.momentum > 0 && (!nearest || std::abs(c.momentum - two_kf) < std::abs(*nearest - two_kf)))
        nearest = c.momentum;
    }
    derived["cusps"] = cusps;
    derived["two_k_fermi"] = two_kf;
    if (nearest) derived["cusp_offset_from_2kF"] = *nearest - two_kf;
    result.ridge = std::move(ridge);
  }
  timer.mark("transform");

  for (const auto& ref : config.analysis.references) {
    TimeSeriesGrid other;
    if (ref.builtin == "exact_propagator") {
      ExecutionConfig ec;
      ec.mode = ExecutionMode::ExactPropagator;
      other = run_protocol(model, start, config.dynamics.trotter, config.dynamics.T, times, ec).series;
    } else {
      std::ifstream in(fs::path(ref.run_dir) / "timeseries.csv");
      other = read_timeseries_csv(in);
    }
    Comparison c;
    try {
      c = compare_grids(ref.name, run.series, other, config.analysis.omega_max);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("analysis.references", ref.name + ": " + e.what());
    }
    if (config.execution.mode == ExecutionMode::Sampled && config.analysis.bootstrap > 0) {
      const auto [s, r] = bootstrap_qsf(run, qsf_transform(other, config.analysis.omega_max), model.L,
                                        config.analysis.omega_max, config.analysis.bootstrap, config.execution.seed);
      c.ssim_qsf_bootstrap = s;
      c.rmse_qsf_bootstrap = r;
    }
    result.comparisons.push_back(c);
  }
  json comps = json::array();
  for (const auto& c : result.comparisons) comps.push_back(to_json(c));
  derived["comparisons"] = comps;
  timer.mark("compare");

  if (config.execution.mode == ExecutionMode::Sampled) {
    double lo = 1.0, mean = 0.0;
    for (double k : run.kept_fraction) {
      lo = std::min(lo, k);
      mean += k / static_cast<double>(run.kept_fraction.size());
    }
    derived["kept_fraction_min"] = lo;
    derived["kept_fraction_mean"] = mean;
    derived["empty_postselection"] = run.empty_postselection;
  } else {
    double res = 0.0, dn = 0.0;
    for (double r : run.max_imag_residue) res = std::max(res, r);
    for (double n : run.particle_number) dn = std::max(dn, std::abs(n - model.Ne));
    derived["max_imag_residue"] = res;
    derived["max_particle_number_deviation"] = dn;
  }
  manifest.derived = derived;

  if (options.write_files) {
    const fs::path out = config.output;
    fs::create_directories(out);
    write_text(out / "timeseries.csv", render([&](std::ostream& os) { write_timeseries_csv(os, run.series); }));
    write_text(out / "qsf.csv", render([&](std::ostream& os) { write_qsf_csv(os, qsf); }));
    write_text(out / "qsf_triplets.txt", render([&](std::ostream& os) { write_qsf_triplets(os, qsf); }));
    if (result.ridge) write_text(out / "ridge.txt", render([&](std::ostream& os) { write_ridge(os, *result.ridge); }));
    if (init.preparation) {
      const auto circuit =
          build_full_circuit(model, *init.preparation, config.dynamics.trotter, config.dynamics.T, config.layout);
      write_text(out / "circuit.txt", render([&](std::ostream& os) { write_circuit(os, circuit); }));
    }
    if (init.ansatz) write_text(out / "ansatz.txt", render([&](std::ostream& os) { write_ansatz(os, *init.ansatz); }));
    timer.mark("write");
    write_text(out / "manifest.json", manifest.to_json().dump(2) + "\n");
  }
  result.manifest = std::move(manifest);
  result.protocol = std::move(run);
  result.qsf = qsf;
  return result;
}

OracleReport run_oracle(const ExperimentConfig& config, const fs::path& out_dir) {
  const auto& model = config.model;
  if (model.L > 8) throw ConfigError("model.L", "the oracle is limited to L <= 8");
  const EdOracle ed(model);
  const GroundState gs = ground_state(ed);
  OracleReport rep;
  rep.ground_energy = gs.energy;
  rep.gap = gs.gap;
  rep.degenerate = gs.degenerate;

  const PreparedInitial init = prepare_initial(config);
  rep.spin_reflection_symmetric =
      verify_spin_reflection_symmetry(init.state, OrderingKind::AllUpAllDown, model.L).symmetric;
  const Vector psi = ed.from_statevector(init.state, OrderingKind::AllUpAllDown);
  const int j = model.L / 2;
  const double theta = kQuenchAngle;
  const Vector ideal = std::cos(theta) * psi + cplx{0, std::sin(theta)} * (ed.spin_x(j) * psi);
  const QuenchedState q = quench_state(model, init.state, {OrderingKind::Interleaved, true}, theta);
  const Vector unitary = ed.from_statevector(q.state, OrderingKind::Interleaved);
  const auto times = uniform_times(config.dynamics.T, config.dynamics.time_points);

  std::ostringstream gf_csv;
  gf_csv.precision(17);
  gf_csv << "t,k,re_G,im_G,half_G_vs_ideal,half_G_vs_unitary\n";
  std::vector<std::vector<cplx>> greens;
  for (int k = 0; k < model.L; ++k) greens.push_back(retarded_spin_gf(ed, psi, j, k, times));
  for (std::size_t m = 0; m < times.size(); ++m) {
    const Vector a = ed.evolve(ideal, times[m]);
    const Vector b = ed.evolve(unitary, times[m]);
    for (int k = 0; k < model.L; ++k) {
      const cplx g = greens[static_cast<std::size_t>(k)][m];
      const double mi = a.dot(ed.spin_x(k) * a).real();
      const double mu = b.dot(ed.spin_x(k) * b).real();
      rep.quench_identity_error_ideal = std::max(rep.quench_identity_error_ideal, std::abs(mi - 0.5 * g.real()));
      rep.quench_identity_error_unitary = std::max(rep.quench_identity_error_unitary, std::abs(mu - 0.5 * g.real()));
      gf_csv << times[m] << ',' << k << ',' << g.real() << ',' << g.imag() << ',' << mi - 0.5 * g.real() << ','
             << mu - 0.5 * g.real() << "\n";
    }
  }
  rep.passed = rep.quench_identity_error_ideal < 1e-9 && rep.spin_reflection_symmetric;

  fs::create_directories(out_dir);
  write_text(out_dir / "oracle_gf.csv", gf_csv.str());
  json lehmann = json::array();
  if (ed.basis().dimension() <= 5000) {
    std::ostringstream lcsv;
    for (int mk = 0; mk < model.L; ++mk) {
      const double k = 2.0 * std::numbers::pi * mk / model.L - std::numbers::pi;
      const LehmannData d = lehmann_data(ed, gs.vector, gs.energy, k, 0.05);
      write_lehmann_csv(lcsv, d);
      lehmann.push_back({{"k", k}, {"poles", d.excitation.size()}});
    }
    write_text(out_dir / "oracle_lehmann.csv", lcsv.str());
  }
  const json report{{"ground_energy", rep.ground_energy},
                    {"gap", rep.gap},
                    {"degenerate", rep.degenerate},
                    {"spin_reflection_symmetric", rep.spin_reflection_symmetric},
                    {"quench_identity_error_ideal", rep.quench_identity_error_ideal},
                    {"quench_identity_error_unitary", rep.quench_identity_error_unitary},
                    {"lehmann", lehmann},
                    {"passed", rep.passed},
                    {"config", to_json(config)}};
  write_text(out_dir / "oracle.json", report.dump(2) + "\n");
  return rep;
}

}  // namespace qspec
