#include "zenohl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "zenohl/bounds.hpp"
#include "zenohl/errors.hpp"

namespace zenohl {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Shortest representation that parses back to the same double, matching the
// JSON serializer.
std::string fmt(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

const char* mode_name(EvolutionMode mode) {
  switch (mode) {
    case EvolutionMode::exact_kicked: return "exact_kicked";
    case EvolutionMode::trotter_kicked: return "trotter_kicked";
    case EvolutionMode::exact_zeno_oracle: return "exact_zeno_oracle";
  }
  throw InternalError("unhandled evolution mode");
}

EvolutionMode mode_from_name(const std::string& name) {
  if (name == "exact_kicked") return EvolutionMode::exact_kicked;
  if (name == "trotter_kicked") return EvolutionMode::trotter_kicked;
  if (name == "exact_zeno_oracle") return EvolutionMode::exact_zeno_oracle;
  throw InputError("unknown evolution mode: " + name);
}

const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::copies: return "copies";
    case SweepAxis::kicks: return "kicks";
    case SweepAxis::qubits: return "qubits";
  }
  throw InternalError("unhandled sweep axis");
}

SweepAxis axis_from_name(const std::string& name) {
  if (name == "copies") return SweepAxis::copies;
  if (name == "kicks") return SweepAxis::kicks;
  if (name == "qubits") return SweepAxis::qubits;
  throw InputError("unknown sweep axis: " + name);
}

void check_keys(const json& j, const std::string& what,
                const std::vector<std::string>& required,
                const std::vector<std::string>& optional) {
  if (!j.is_object()) throw InputError(what + " must be an object");
  for (const auto& key : required)
    if (!j.contains(key)) throw InputError(what + " is missing key " + key);
  for (const auto& item : j.items()) {
    const auto& key = item.key();
    const bool known =
        std::find(required.begin(), required.end(), key) != required.end() ||
        std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) throw InputError(what + " has unknown key " + key);
  }
}

double get_number(const json& j, const std::string& what, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number()) throw InputError(what + " key " + key + " must be a number");
  return v.get<double>();
}

long long get_integer(const json& j, const std::string& what, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw InputError(what + " key " + key + " must be an integer");
  return v.get<long long>();
}

std::uint64_t get_unsigned(const json& j, const std::string& what, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw InputError(what + " key " + key + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& what, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_string()) throw InputError(what + " key " + key + " must be a string");
  return v.get<std::string>();
}

bool get_bool(const json& j, const std::string& what, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_boolean()) throw InputError(what + " key " + key + " must be a boolean");
  return v.get<bool>();
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> to_std(const RealVector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

json result_json(const RunResult& res) {
  json r;
  auto basis = json::array();
  for (const auto& word : res.model.global_basis) basis.push_back(word.str());
  r["basis"] = basis;
  r["c_true"] = to_std(res.c_true);
  r["c_hat"] = to_std(res.c_hat);
  r["metrics"] = json{{"l2", res.metrics.l2},
                      {"mean_abs", res.metrics.mean_abs},
                      {"max_abs", res.metrics.max_abs},
                      {"median_rel", res.metrics.median_rel},
                      {"total_copies", res.metrics.total_copies}};
  auto estimates = json::array();
  for (const auto& e : res.estimates)
    estimates.push_back(json{{"config", e.config_index},
                             {"patch", e.patch},
                             {"lambda_raw", e.lambda_raw},
                             {"lambda_debiased", e.lambda_debiased},
                             {"coeff_error", e.coeff_error},
                             {"gap_lower", e.gap.lower},
                             {"gap_upper", e.gap.upper},
                             {"eps_channel", e.eps_channel},
                             {"corollary_applicable", e.corollary_applicable},
                             {"corollary_value", e.corollary_value}});
  r["estimates"] = estimates;
  const auto& b = res.bounds;
  r["bounds"] = json{{"zeno_c", b.zeno_c},
                     {"qpt_c", b.qpt_c},
                     {"kicks", b.kicks},
                     {"kicks_vacuous", b.kicks_vacuous},
                     {"copies", b.copies},
                     {"coeff_bound", b.coeff_bound},
                     {"corollary_applicable", b.corollary_applicable},
                     {"aggregate", json{{"n_configs", b.aggregate.n_configs},
                                        {"n_patches", b.aggregate.n_patches},
                                        {"kicks", b.aggregate.kicks},
                                        {"copies", b.aggregate.copies}}}};
  return r;
}

json report_skeleton(const RunConfig& config, const char* kind) {
  const std::string canonical = config.to_json();
  json j;
  j["format"] = "zenohl-report-v1";
  j["kind"] = kind;
  j["generated_at"] = timestamp_utc();
  j["config"] = json::parse(canonical);
  j["config_hash"] = fnv1a_hex(canonical);
  return j;
}

std::string per_term_csv_impl(const std::vector<std::string>& basis,
                              const std::vector<double>& c_true,
                              const std::vector<double>& c_hat) {
  if (basis.size() != c_true.size() || basis.size() != c_hat.size())
    throw InputError("per-term series lengths disagree");
  std::string out = "# zenohl-csv-v1\nterm,c_true,c_hat,abs_error\n";
  for (std::size_t k = 0; k < basis.size(); ++k)
    out += basis[k] + "," + fmt(c_true[k]) + "," + fmt(c_hat[k]) + "," +
           fmt(std::abs(c_hat[k] - c_true[k])) + "\n";
  return out;
}

struct SweepRow {
  double x = 0.0;
  int completed = 0;
  double mean_l2 = 0.0;
  double std_l2 = 0.0;
  double mean_abs = 0.0;
  double std_abs = 0.0;
};

std::string sweep_csv_impl(const std::string& axis, const std::vector<SweepRow>& rows) {
  std::string out = "# zenohl-csv-v1\n";
  out += axis + ",completed,mean_l2,std_l2,mean_abs,std_abs\n";
  for (const auto& r : rows)
    out += fmt(r.x) + "," + std::to_string(r.completed) + "," + fmt(r.mean_l2) + "," +
           fmt(r.std_l2) + "," + fmt(r.mean_abs) + "," + fmt(r.std_abs) + "\n";
  return out;
}

void summarize_metrics(std::ostream& out, const json& metrics) {
  out << "l2 error = " << fmt(metrics.at("l2").get<double>()) << "\n"
      << "mean abs error = " << fmt(metrics.at("mean_abs").get<double>()) << "\n"
      << "max abs error = " << fmt(metrics.at("max_abs").get<double>()) << "\n"
      << "median rel error = " << fmt(metrics.at("median_rel").get<double>()) << "\n"
      << "total copies = " << metrics.at("total_copies").get<std::uint64_t>() << "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path.string());
  out << body;
  if (!out) throw InputError("failed while writing file: " + path.string());
}

fs::path resolve_out_dir(const std::string& flag, const RunConfig* config) {
  if (!flag.empty()) return flag;
  if (config != nullptr && !config->output_dir.empty()) return config->output_dir;
  if (const char* env = std::getenv("ZENOHL_OUT_DIR"); env != nullptr && *env != '\0')
    return env;
  return ".";
}

void print_plan(std::ostream& out, int n, double xi) {
  const auto configs = plan_configurations(n, xi);
  out << "reshaping configurations for a " << n << "-qubit chain (" << configs.size()
      << " total)\n";
  for (const auto& cfg : configs) {
    out << "offset " << cfg.offset << ": frozen {";
    for (std::size_t k = 0; k < cfg.frozen.size(); ++k)
      out << (k == 0 ? "" : " ") << cfg.frozen[k];
    out << "}  patches";
    for (const auto& patch : cfg.patches) {
      out << " (";
      for (std::size_t k = 0; k < patch.size(); ++k)
        out << (k == 0 ? "" : " ") << patch[k];
      out << ")";
    }
    out << "\n";
  }
}

void print_bounds(std::ostream& out, int n_patch, double eps, double delta, int n,
                  double time, std::uint64_t seed, double zeno_fraction) {
  out << "C_QPT(" << n_patch << ") = " << fmt(qpt_constant(n_patch)) << "\n";
  out << "required copies (eps = " << fmt(eps) << ", delta = " << fmt(delta)
      << ") = " << required_copies(n_patch, eps, delta) << "\n";
  if (n <= 0) return;

  const auto h = random_2local_chain(n, seed);
  const auto configs = plan_configurations(n);
  int total_patches = 0;
  for (const auto& cfg : configs) total_patches += int(cfg.patches.size());
  const auto budget = ErrorBudget::split(eps, delta, zeno_fraction);
  const auto rep = bound_report(h, configs[0].kick, time, n_patch, budget,
                                int(configs.size()), total_patches);

  out << "bound report for a random " << n << "-qubit chain (seed " << seed
      << ", T = " << fmt(time) << ")\n";
  out << "  budget: eps_z = " << fmt(budget.epsilon_z)
      << ", eps_qpt = " << fmt(budget.epsilon_qpt)
      << ", delta = " << fmt(budget.delta) << "\n";
  out << "  kick sequence constant = " << fmt(rep.zeno_c) << "\n";
  out << "  kicks required = " << rep.kicks
      << (rep.kicks_vacuous ? " (bound vacuous at this budget)" : "") << "\n";
  out << "  copies per channel estimate = " << rep.copies << "\n";
  if (rep.corollary_applicable)
    out << "  planning coefficient bound = " << fmt(rep.coeff_bound) << "\n";
  else
    out << "  planning coefficient bound unavailable (T ||H|| exceeds 1/pi)\n";
  out << "  aggregate (" << rep.aggregate.n_configs << " configurations, "
      << rep.aggregate.n_patches << " patches): kicks = " << rep.aggregate.kicks
      << ", copies = " << rep.aggregate.copies << "\n";
}

void write_records(const fs::path& dir, const RunResult& res) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < res.records.size(); ++k) {
    const auto& e = res.estimates[k];
    const auto name = "c" + std::to_string(e.config_index) + "_p" +
                      std::to_string(e.patch_index) + ".json";
    write_file(dir / name, res.records[k].to_json());
  }
}

void do_run(std::ostream& out, const std::string& config_path, const std::string& out_flag,
            bool save_records) {
  RunConfig cfg = RunConfig::from_json(read_file(config_path));
  if (save_records) cfg.save_records = true;
  const auto h = cfg.source.build(cfg.spec.n_qubits);
  const auto res = run_protocol(h, cfg.spec);

  const fs::path dir = resolve_out_dir(out_flag, &cfg);
  fs::create_directories(dir);
  write_file(dir / "report.json", render_run_report(cfg, res));
  write_file(dir / "per_term_errors.csv", per_term_csv(res));
  if (cfg.save_records) write_records(dir / "records", res);

  out << "run complete: l2 = " << fmt(res.metrics.l2)
      << ", mean abs = " << fmt(res.metrics.mean_abs)
      << ", median rel = " << fmt(res.metrics.median_rel)
      << ", copies = " << res.metrics.total_copies << "\n";
  out << "report written to " << (dir / "report.json").string() << "\n";
}

void do_sweep(std::ostream& out, const std::string& config_path,
              const std::string& out_flag) {
  const RunConfig cfg = RunConfig::from_json(read_file(config_path));
  if (!cfg.sweep) throw InputError("config has no sweep block");
  if (cfg.source.kind != HamiltonianSource::Kind::random)
    throw InputError("sweep draws fresh random chains; hamiltonian type must be random");
  const auto points = sweep(cfg.sweep->axis, cfg.sweep->grid, cfg.spec, cfg.sweep->repeats);

  const fs::path dir = resolve_out_dir(out_flag, &cfg);
  fs::create_directories(dir);
  write_file(dir / "report.json", render_sweep_report(cfg, points));
  const std::string csv_name =
      std::string("error_vs_") + axis_name(cfg.sweep->axis) + ".csv";
  write_file(dir / csv_name, sweep_csv(cfg.sweep->axis, points));

  for (const auto& pt : points)
    out << axis_name(cfg.sweep->axis) << " = " << fmt(pt.x) << ": mean l2 = "
        << fmt(pt.mean_l2) << " (completed " << pt.completed << ")\n";
  out << "report written to " << (dir / "report.json").string() << "\n";
}

void do_ising(std::ostream& out, const std::string& config_path,
              const std::string& out_flag) {
  const RunConfig cfg = RunConfig::from_json(read_file(config_path));
  if (cfg.source.kind != HamiltonianSource::Kind::ising)
    throw InputError("ising experiment requires hamiltonian type ising");
  const auto est = ising_experiment(cfg.spec);

  const fs::path dir = resolve_out_dir(out_flag, &cfg);
  fs::create_directories(dir);
  write_file(dir / "report.json", render_ising_report(cfg, est));
  write_file(dir / "per_term_errors.csv", per_term_csv(est.run));
  if (cfg.save_records) write_records(dir / "records", est.run);

  out << "ising run complete: h_hat = " << fmt(est.h_hat)
      << ", j_hat = " << fmt(est.j_hat) << ", lambda_hat = " << fmt(est.lambda_hat)
      << ", median rel = " << fmt(est.median_rel) << "\n";
  out << "report written to " << (dir / "report.json").string() << "\n";
}

void do_report(std::ostream& out, const std::string& input, const std::string& out_flag) {
  const auto view = render_report_view(read_file(input));
  out << view.summary;
  const fs::path dir = resolve_out_dir(out_flag, nullptr);
  fs::create_directories(dir);
  for (const auto& [name, body] : view.csv_files) {
    write_file(dir / name, body);
    out << "wrote " << (dir / name).string() << "\n";
  }
}

void write_error(std::ostream& err, const char* type, const std::string& message) {
  err << json{{"error", json{{"type", type}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

PauliHamiltonian HamiltonianSource::build(int n_qubits) const {
  switch (kind) {
    case Kind::random:
      return random_2local_chain(n_qubits, random_seed);
    case Kind::terms: {
      PauliHamiltonian h(n_qubits);
      for (const auto& [word, coeff] : terms) {
        if (int(word.size()) != n_qubits)
          throw InputError("hamiltonian term " + word + " does not match n_qubits");
        h.add(PauliString(word), coeff);
      }
      if (!is_2local_chain(h))
        throw InputError("hamiltonian terms must be single-site or nearest-neighbour");
      return h;
    }
    case Kind::ising:
      return ising_chain(n_qubits, ising);
  }
  throw InternalError("unhandled hamiltonian source");
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config parse error: ") + e.what());
  }
  check_keys(j, "config", {"format", "n_qubits", "time", "kicks", "hamiltonian"},
             {"shots_per_setting", "mode", "noise_lambda", "seed", "epsilon", "delta",
              "zeno_fraction", "xi", "evolve_tol", "sweep", "output_dir",
              "save_records"});
  if (get_string(j, "config", "format") != "zenohl-config-v1")
    throw InputError("unsupported config format");

  RunConfig cfg;
  cfg.spec.n_qubits = int(get_integer(j, "config", "n_qubits"));
  cfg.spec.time = get_number(j, "config", "time");
  cfg.spec.kicks = int(get_integer(j, "config", "kicks"));
  if (j.contains("shots_per_setting"))
    cfg.spec.shots_per_setting = get_unsigned(j, "config", "shots_per_setting");
  if (j.contains("mode")) cfg.spec.mode = mode_from_name(get_string(j, "config", "mode"));
  if (j.contains("noise_lambda")) cfg.spec.noise_lambda = get_number(j, "config", "noise_lambda");
  if (j.contains("seed")) cfg.spec.seed = get_unsigned(j, "config", "seed");
  if (j.contains("epsilon")) cfg.spec.epsilon = get_number(j, "config", "epsilon");
  if (j.contains("delta")) cfg.spec.delta = get_number(j, "config", "delta");
  if (j.contains("zeno_fraction")) cfg.spec.zeno_fraction = get_number(j, "config", "zeno_fraction");
  if (j.contains("xi")) cfg.spec.xi = get_number(j, "config", "xi");
  if (j.contains("evolve_tol")) cfg.spec.evolve_tol = get_number(j, "config", "evolve_tol");
  if (j.contains("output_dir")) cfg.output_dir = get_string(j, "config", "output_dir");
  if (j.contains("save_records")) cfg.save_records = get_bool(j, "config", "save_records");

  const json& h = j.at("hamiltonian");
  const std::string type = get_string(h, "hamiltonian", "type");
  if (type == "random") {
    check_keys(h, "hamiltonian", {"type", "seed"}, {});
    cfg.source.kind = HamiltonianSource::Kind::random;
    cfg.source.random_seed = get_unsigned(h, "hamiltonian", "seed");
  } else if (type == "terms") {
    check_keys(h, "hamiltonian", {"type", "terms"}, {});
    cfg.source.kind = HamiltonianSource::Kind::terms;
    const json& terms = h.at("terms");
    if (!terms.is_array() || terms.empty())
      throw InputError("hamiltonian terms must be a non-empty array");
    for (const auto& term : terms) {
      check_keys(term, "hamiltonian term", {"word", "coefficient"}, {});
      cfg.source.terms.emplace_back(get_string(term, "hamiltonian term", "word"),
                                    get_number(term, "hamiltonian term", "coefficient"));
    }
  } else if (type == "ising") {
    check_keys(h, "hamiltonian", {"type", "h", "j"}, {});
    cfg.source.kind = HamiltonianSource::Kind::ising;
    cfg.source.ising = IsingParams{get_number(h, "hamiltonian", "h"),
                                   get_number(h, "hamiltonian", "j")};
    cfg.spec.ising = cfg.source.ising;
  } else {
    throw InputError("unknown hamiltonian type: " + type);
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, "sweep", {"axis", "grid"}, {"repeats"});
    SweepRequest req;
    req.axis = axis_from_name(get_string(s, "sweep", "axis"));
    const json& grid = s.at("grid");
    if (!grid.is_array() || grid.empty())
      throw InputError("sweep grid must be a non-empty array");
    for (const auto& v : grid) {
      if (!v.is_number()) throw InputError("sweep grid entries must be numbers");
      req.grid.push_back(v.get<double>());
    }
    if (s.contains("repeats")) req.repeats = int(get_integer(s, "sweep", "repeats"));
    if (req.repeats < 1) throw InputError("sweep repeats must be positive");
    cfg.sweep = req;
  }

  cfg.spec.validate();
  return cfg;
}

std::string RunConfig::to_json() const {
  json j;
  j["format"] = "zenohl-config-v1";
  j["n_qubits"] = spec.n_qubits;
  j["time"] = spec.time;
  j["kicks"] = spec.kicks;
  j["shots_per_setting"] = spec.shots_per_setting;
  j["mode"] = mode_name(spec.mode);
  j["noise_lambda"] = spec.noise_lambda;
  j["seed"] = spec.seed;
  j["epsilon"] = spec.epsilon;
  j["delta"] = spec.delta;
  j["zeno_fraction"] = spec.zeno_fraction;
  j["xi"] = spec.xi;
  j["evolve_tol"] = spec.evolve_tol;

  json h;
  switch (source.kind) {
    case HamiltonianSource::Kind::random:
      h["type"] = "random";
      h["seed"] = source.random_seed;
      break;
    case HamiltonianSource::Kind::terms: {
      h["type"] = "terms";
      auto arr = json::array();
      for (const auto& [word, coeff] : source.terms)
        arr.push_back(json{{"word", word}, {"coefficient", coeff}});
      h["terms"] = arr;
      break;
    }
    case HamiltonianSource::Kind::ising:
      h["type"] = "ising";
      h["h"] = source.ising.h;
      h["j"] = source.ising.j;
      break;
  }
  j["hamiltonian"] = h;

  if (sweep) {
    j["sweep"] = json{{"axis", axis_name(sweep->axis)},
                      {"grid", sweep->grid},
                      {"repeats", sweep->repeats}};
  }
  if (!output_dir.empty()) j["output_dir"] = output_dir;
  j["save_records"] = save_records;
  return j.dump();
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string render_run_report(const RunConfig& config, const RunResult& result) {
  json j = report_skeleton(config, "run");
  j["result"] = result_json(result);
  return j.dump(2) + "\n";
}

std::string render_sweep_report(const RunConfig& config,
                                const std::vector<SweepPoint>& points) {
  if (!config.sweep) throw InputError("sweep report needs a sweep block in the config");
  json j = report_skeleton(config, "sweep");
  auto arr = json::array();
  for (const auto& pt : points)
    arr.push_back(json{{"x", pt.x},
                       {"completed", pt.completed},
                       {"mean_l2", pt.mean_l2},
                       {"std_l2", pt.std_l2},
                       {"mean_abs", pt.mean_abs},
                       {"std_abs", pt.std_abs},
                       {"failures", pt.failures}});
  j["result"] = json{{"axis", axis_name(config.sweep->axis)},
                     {"repeats", config.sweep->repeats},
                     {"points", arr}};
  return j.dump(2) + "\n";
}

std::string render_ising_report(const RunConfig& config, const IsingEstimate& estimate) {
  json j = report_skeleton(config, "ising");
  j["result"] = json{{"h_hat", estimate.h_hat},
                     {"j_hat", estimate.j_hat},
                     {"lambda_hat", estimate.lambda_hat},
                     {"median_rel", estimate.median_rel},
                     {"run", result_json(estimate.run)}};
  return j.dump(2) + "\n";
}

std::string sweep_csv(SweepAxis axis, const std::vector<SweepPoint>& points) {
  std::vector<SweepRow> rows;
  rows.reserve(points.size());
  for (const auto& pt : points)
    rows.push_back({pt.x, pt.completed, pt.mean_l2, pt.std_l2, pt.mean_abs, pt.std_abs});
  return sweep_csv_impl(axis_name(axis), rows);
}

std::string per_term_csv(const RunResult& result) {
  std::vector<std::string> basis;
  basis.reserve(result.model.global_basis.size());
  for (const auto& word : result.model.global_basis) basis.push_back(word.str());
  return per_term_csv_impl(basis, to_std(result.c_true), to_std(result.c_hat));
}

ReportView render_report_view(const std::string& report_json) {
  json j;
  try {
    j = json::parse(report_json);
  } catch (const json::exception& e) {
    throw InputError(std::string("report parse error: ") + e.what());
  }
  try {
    check_keys(j, "report", {"format", "kind", "generated_at", "config", "config_hash", "result"},
               {});
    if (j.at("format").get<std::string>() != "zenohl-report-v1")
      throw InputError("unsupported report format");

    ReportView view;
    view.kind = get_string(j, "report", "kind");
    std::ostringstream sum;
    sum << "report kind = " << view.kind << ", config hash = "
        << get_string(j, "report", "config_hash") << "\n";

    if (view.kind == "run" || view.kind == "ising") {
      const json& result = j.at("result");
      const json& run = view.kind == "run" ? result : result.at("run");
      if (view.kind == "ising")
        sum << "h_hat = " << fmt(result.at("h_hat").get<double>())
            << ", j_hat = " << fmt(result.at("j_hat").get<double>())
            << ", lambda_hat = " << fmt(result.at("lambda_hat").get<double>())
            << ", median rel = " << fmt(result.at("median_rel").get<double>()) << "\n";
      summarize_metrics(sum, run.at("metrics"));
      view.csv_files.emplace_back(
          "per_term_errors.csv",
          per_term_csv_impl(run.at("basis").get<std::vector<std::string>>(),
                            run.at("c_true").get<std::vector<double>>(),
                            run.at("c_hat").get<std::vector<double>>()));
    } else if (view.kind == "sweep") {
      const json& result = j.at("result");
      const std::string axis = result.at("axis").get<std::string>();
      axis_from_name(axis);  // validates
      std::vector<SweepRow> rows;
      for (const json& pt : result.at("points")) {
        rows.push_back({pt.at("x").get<double>(), pt.at("completed").get<int>(),
                        pt.at("mean_l2").get<double>(), pt.at("std_l2").get<double>(),
                        pt.at("mean_abs").get<double>(), pt.at("std_abs").get<double>()});
        sum << axis << " = " << fmt(rows.back().x) << ": mean l2 = "
            << fmt(rows.back().mean_l2) << " (completed " << rows.back().completed
            << ")\n";
      }
      view.csv_files.emplace_back("error_vs_" + axis + ".csv", sweep_csv_impl(axis, rows));
    } else {
      throw InputError("unknown report kind: " + view.kind);
    }
    view.summary = sum.str();
    return view;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zeno-reshaped learning of nearest-neighbour chain Hamiltonians"};
  app.name("zenohl");
  app.require_subcommand(1);

  int plan_n = 6;
  double plan_xi = 0.5;
  auto* plan_cmd = app.add_subcommand("plan", "Print the reshaping configurations of a chain");
  plan_cmd->add_option("--n", plan_n, "number of chain qubits")->required();
  plan_cmd->add_option("--xi", plan_xi, "inverse spectral gap of the kick");

  int b_patch = 2, b_n = 0;
  double b_eps = 0.1, b_delta = 0.01, b_time = 0.01, b_zfrac = 0.5;
  std::uint64_t b_seed = 1;
  auto* bounds_cmd =
      app.add_subcommand("bounds", "Print tomography copy and kick-count requirements");
  bounds_cmd->add_option("--n-patch", b_patch, "patch size in qubits");
  bounds_cmd->add_option("--eps", b_eps, "target channel error");
  bounds_cmd->add_option("--delta", b_delta, "failure probability");
  bounds_cmd->add_option("--n", b_n, "chain size for a full bound report (0 skips it)");
  bounds_cmd->add_option("--time", b_time, "evolution time for the full report");
  bounds_cmd->add_option("--seed", b_seed, "random chain seed for the full report");
  bounds_cmd->add_option("--zeno-fraction", b_zfrac,
                         "budget fraction assigned to the kick sequence");

  std::string run_config, run_out;
  bool run_save = false;
  auto* run_cmd = app.add_subcommand("run", "Execute the protocol from a config file");
  run_cmd->add_option("--config", run_config, "config file path")->required();
  run_cmd->add_option("--out", run_out, "output directory");
  run_cmd->add_flag("--save-records", run_save, "write per-patch tomography records");

  std::string sweep_config, sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Repeat runs over a parameter grid");
  sweep_cmd->add_option("--config", sweep_config, "config file path")->required();
  sweep_cmd->add_option("--out", sweep_out, "output directory");

  std::string ising_config, ising_out;
  auto* ising_cmd =
      app.add_subcommand("ising", "Trotterized coupling-chain experiment");
  ising_cmd->add_option("--config", ising_config, "config file path")->required();
  ising_cmd->add_option("--out", ising_out, "output directory");

  std::string rep_input, rep_out;
  auto* report_cmd =
      app.add_subcommand("report", "Re-render a stored report and emit CSV series");
  report_cmd->add_option("--input", rep_input, "report file path")->required();
  report_cmd->add_option("--out", rep_out, "output directory for CSV files");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    write_error(err, "input", e.what());
    return 1;
  }

  try {
    if (plan_cmd->parsed()) {
      print_plan(out, plan_n, plan_xi);
    } else if (bounds_cmd->parsed()) {
      print_bounds(out, b_patch, b_eps, b_delta, b_n, b_time, b_seed, b_zfrac);
    } else if (run_cmd->parsed()) {
      do_run(out, run_config, run_out, run_save);
    } else if (sweep_cmd->parsed()) {
      do_sweep(out, sweep_config, sweep_out);
    } else if (ising_cmd->parsed()) {
      do_ising(out, ising_config, ising_out);
    } else if (report_cmd->parsed()) {
      do_report(out, rep_input, rep_out);
    }
    return 0;
  } catch (const InputError& e) {
    write_error(err, "input", e.what());
    return 1;
  } catch (const NumericError& e) {
    write_error(err, "numeric", e.what());
    return 2;
  } catch (const std::exception& e) {
    write_error(err, "internal", e.what());
    return 2;
  }
}

}  // namespace zenohl
