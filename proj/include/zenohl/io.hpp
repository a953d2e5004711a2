#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zenohl/pipeline.hpp"

namespace zenohl {

// Hamiltonian block of a config file: explicit Pauli terms, a seeded random
// nearest-neighbour chain, or the transverse-coupling chain family.
struct HamiltonianSource {
  enum class Kind { random, terms, ising };
  Kind kind = Kind::random;
  std::uint64_t random_seed = 1;
  std::vector<std::pair<std::string, double>> terms;  // word, coefficient
  IsingParams ising;

  PauliHamiltonian build(int n_qubits) const;
};

struct SweepRequest {
  SweepAxis axis = SweepAxis::copies;
  std::vector<double> grid;
  int repeats = 10;
};

// One config file: protocol parameters, the Hamiltonian to learn, and
// optional sweep and output settings. The schema is strict; unknown keys
// are rejected before any computation starts.
struct RunConfig {
  ProtocolSpec spec;
  HamiltonianSource source;
  std::optional<SweepRequest> sweep;
  std::string output_dir;
  bool save_records = false;

  static RunConfig from_json(const std::string& text);
  // Canonical form: sorted keys, defaults filled in. Hash input and the
  // config echo embedded in reports.
  std::string to_json() const;
};

// FNV-1a 64-bit digest as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

// Report payloads (structured JSON text). generated_at is the only field
// that differs between two runs of the same config and seed.
std::string render_run_report(const RunConfig& config, const RunResult& result);
std::string render_sweep_report(const RunConfig& config,
                                const std::vector<SweepPoint>& points);
std::string render_ising_report(const RunConfig& config, const IsingEstimate& estimate);

// CSV series for external plotting. First line is the format marker
// "# zenohl-csv-v1"; the second line names the columns.
std::string sweep_csv(SweepAxis axis, const std::vector<SweepPoint>& points);
std::string per_term_csv(const RunResult& result);

// Re-rendering of a stored report: a human-readable metrics summary plus
// the CSV series, regenerated byte-identically to the original emission.
struct ReportView {
  std::string kind;
  std::string summary;
  std::vector<std::pair<std::string, std::string>> csv_files;  // name, body
};
ReportView render_report_view(const std::string& report_json);

// Command-line driver, separated from main() so tests can call it.
// Returns the process exit code: 0 success, 1 rejected input, 2 numeric or
// internal failure. Errors are written to err as one-line JSON objects.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace zenohl
