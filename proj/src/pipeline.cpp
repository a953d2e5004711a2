#include "zenohl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "zenohl/rng.hpp"

namespace zenohl {

namespace {

// Stream tags keeping every sampling task on its own deterministic substream.
constexpr std::uint64_t kTagSample = 0x5A4D50ULL;
constexpr std::uint64_t kTagSweepRun = 0x53574545ULL;
constexpr std::uint64_t kTagSweepHam = 0x48414D53ULL;

template <typename Fn>
auto with_context(const std::string& context, Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw InputError(context + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(context + ": " + e.what());
  } catch (const InternalError& e) {
    throw InternalError(context + ": " + e.what());
  }
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw InternalError("median of an empty set");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const auto lower = std::max_element(values.begin(), values.begin() + mid);
    m = 0.5 * (m + *lower);
  }
  return m;
}

Matrix unitary_channel_choi(const Matrix& u) {
  const auto d = u.rows();
  Matrix t(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      t.block(i * d, j * d, d, d) = std::conj(u(i, j)) * u;
  return transfer_to_choi(t);
}

StateVector evolve_for_mode(const PauliHamiltonian& h, const PauliHamiltonian& h_projected,
                            const ProtocolSpec& spec, const ReshapingConfig& cfg,
                            const StateVector& psi) {
  switch (spec.mode) {
    case EvolutionMode::exact_kicked:
      return kicked_evolve(h, cfg.kick, spec.time, spec.kicks, psi, spec.evolve_tol);
    case EvolutionMode::trotter_kicked:
      return trotter_kicked_evolve(*spec.ising, cfg.kick, spec.time, spec.kicks, psi);
    case EvolutionMode::exact_zeno_oracle:
      return evolve(h_projected, spec.time, psi, spec.evolve_tol);
  }
  throw InternalError("unhandled evolution mode");
}

}  // namespace

void ProtocolSpec::validate() const {
  if (n_qubits < 2 || n_qubits > kMaxQubits)
    throw InputError("protocol needs between 2 and 14 qubits");
  if (!(time > 0.0)) throw InputError("evolution time must be positive");
  if (kicks < 1) throw InputError("kick count must be >= 1");
  if (!(noise_lambda >= 0.0 && noise_lambda < 1.0))
    throw InputError("depolarizing strength must lie in [0, 1)");
  if (!(xi > 0.0)) throw InputError("xi must be positive");
  if (!(evolve_tol > 0.0)) throw InputError("evolution tolerance must be positive");
  if (mode == EvolutionMode::trotter_kicked && !ising)
    throw InputError("trotter_kicked evolution needs coupling parameters");
  ErrorBudget::split(epsilon, delta, zeno_fraction);  // validates the budget inputs
}

RealVector inject_depolarizing(const RealVector& probs, double lambda, int n_qubits) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw InputError("depolarizing strength must lie in [0, 1)");
  if (lambda == 0.0) return probs;
  RealVector out = (1.0 - lambda) * probs;
  out.array() += lambda / double(Eigen::Index(1) << n_qubits);
  return out;
}

StateVector prepare_fiducials(const ReshapingConfig& config, int n_qubits,
                              const std::vector<int>& patch_fiducials) {
  if (patch_fiducials.size() != config.patches.size())
    throw InputError("need exactly one fiducial index per patch");
  std::vector<Vector> kets(n_qubits);
  for (int q : config.frozen) kets.at(q) = fiducial_state(1, 0);  // |0>
  for (std::size_t p = 0; p < config.patches.size(); ++p) {
    const auto& patch = config.patches[p];
    const int k = int(patch.size());
    const int fid = patch_fiducials[p];
    if (fid < 0 || fid >= n_fiducials(k)) throw InputError("fiducial index out of range");
    int rest = fid;
    for (int j = k - 1; j >= 0; --j) {
      kets.at(patch[j]) = fiducial_state(1, rest % 6);
      rest /= 6;
    }
  }
  Vector v = Vector::Ones(1);
  for (int q = 0; q < n_qubits; ++q) {
    if (kets[q].size() == 0) throw InputError("configuration does not cover qubit " + std::to_string(q));
    Vector next(v.size() * 2);
    for (Eigen::Index i = 0; i < v.size(); ++i) next.segment(2 * i, 2) = v[i] * kets[q];
    v = std::move(next);
  }
  return StateVector::from_amplitudes(n_qubits, std::move(v));
}

RunResult run_protocol(const PauliHamiltonian& h_true, const ProtocolSpec& spec) {
  spec.validate();
  if (h_true.n_qubits() != spec.n_qubits)
    throw InputError("Hamiltonian size does not match the protocol spec");
  if (!is_2local_chain(h_true))
    throw InputError("Hamiltonian must be geometrically 2-local on the chain");

  const auto configs = plan_configurations(spec.n_qubits, spec.xi);
  RunResult result;
  result.spec = spec;
  result.model = build_contamination_model(spec.n_qubits, configs);

  const auto budget = ErrorBudget::split(spec.epsilon, spec.delta, spec.zeno_fraction);
  int total_patches = 0;
  for (const auto& cfg : configs) total_patches += int(cfg.patches.size());
  result.bounds = bound_report(h_true, configs[0].kick, spec.time, 2, budget,
                               int(configs.size()), total_patches);

  const auto& basis = result.model.global_basis;
  result.c_true.resize(Eigen::Index(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k)
    result.c_true[Eigen::Index(k)] = h_true.coefficient(basis[k]);

  std::map<std::pair<int, int>, std::size_t> estimate_index;

  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    const auto& cfg = configs[ci];
    const PauliHamiltonian h_projected = zeno_project(h_true, cfg.kick);

    // Record skeletons, one per patch.
    std::vector<TomographyRecord> recs(cfg.patches.size());
    for (std::size_t pi = 0; pi < cfg.patches.size(); ++pi) {
      const int k = int(cfg.patches[pi].size());
      auto& rec = recs[pi];
      rec.patch = cfg.patches[pi];
      rec.n_qubits = k;
      rec.shots_per_setting = spec.shots_per_setting;
      rec.seed = spec.seed;
      rec.time = spec.time;
      rec.kicks = spec.kicks;
      rec.config_offset = cfg.offset;
      rec.settings_per_cell = (36 / n_fiducials(k)) * (9 / n_settings(k));
      rec.data = RealMatrix::Zero(n_outcome_rows(k), n_fiducials(k));
    }

    for (int f_global = 0; f_global < 36; ++f_global) {
      std::vector<int> fids(cfg.patches.size());
      for (std::size_t pi = 0; pi < cfg.patches.size(); ++pi)
        fids[pi] = cfg.patches[pi].size() == 2 ? f_global : f_global % 6;

      const std::string evolve_ctx =
          "config " + std::to_string(cfg.offset) + " fiducial " + std::to_string(f_global);
      const StateVector psi = with_context(evolve_ctx, [&] {
        return evolve_for_mode(h_true, h_projected, spec, cfg,
                               prepare_fiducials(cfg, spec.n_qubits, fids));
      });

      for (std::size_t pi = 0; pi < cfg.patches.size(); ++pi) {
        const auto& patch = cfg.patches[pi];
        const int k = int(patch.size());
        const Matrix rho = reduced_density(psi, patch).rho;
        const RealVector probs =
            inject_depolarizing(outcome_probabilities(rho), spec.noise_lambda, k);
        const int lf = fids[pi];
        const int setting_reps = 9 / n_settings(k);
        if (spec.shots_per_setting == 0) {
          recs[pi].data.col(lf) += double(setting_reps) * probs;
        } else {
          for (int rep = 0; rep < setting_reps; ++rep) {
            auto gen = rng::engine(rng::derive_seed(
                spec.seed, {kTagSample, std::uint64_t(ci), std::uint64_t(pi),
                            std::uint64_t(f_global), std::uint64_t(rep)}));
            const auto counts = sample_outcomes(probs, k, spec.shots_per_setting, gen);
            for (std::size_t i = 0; i < counts.size(); ++i)
              recs[pi].data(Eigen::Index(i), lf) += double(counts[i]);
          }
        }
      }
    }

    // Estimation chain per patch.
    for (std::size_t pi = 0; pi < cfg.patches.size(); ++pi) {
      const auto& patch = cfg.patches[pi];
      const int k = int(patch.size());
      const std::string ctx =
          "config " + std::to_string(cfg.offset) + " patch " + std::to_string(pi);

      ChannelEstimate est = with_context(ctx, [&] {
        ChannelEstimate e;
        e.config_index = int(ci);
        e.patch_index = int(pi);
        e.patch = patch;
        e.transfer = linear_inversion(recs[pi].probabilities(), k);
        e.choi = physical_choi(transfer_to_choi(e.transfer));
        const UnitaryFit fit = closest_unitary(e.choi);
        e.unitary = fit.unitary;
        e.lambda_raw = fit.lambda_raw;
        e.lambda_debiased = fit.lambda_debiased;

        const Matrix h_patch = hamiltonian_from_unitary(e.unitary, spec.time);
        const auto local_basis = local_patch_basis(k);
        const PauliHamiltonian expected = expected_patch_hamiltonian(h_true, cfg, patch);
        e.local_coeffs.resize(Eigen::Index(local_basis.size()));
        e.expected_coeffs.resize(Eigen::Index(local_basis.size()));
        for (std::size_t b = 0; b < local_basis.size(); ++b) {
          e.local_coeffs[Eigen::Index(b)] = coeff_inner(h_patch, local_basis[b]);
          e.expected_coeffs[Eigen::Index(b)] = expected.coefficient(local_basis[b]);
        }
        e.coeff_error = (e.local_coeffs - e.expected_coeffs).norm();

        e.gap = diamond_bracket(unitary_channel_choi(e.unitary), e.choi);
        double eps_z = 0.0;
        if (spec.mode != EvolutionMode::exact_zeno_oracle && spec.kicks > 1) {
          const double c_z = zeno_constant(h_true, cfg.kick, spec.time);
          eps_z = 2.0 * c_z * std::log(double(spec.kicks)) / double(spec.kicks);
        }
        e.eps_channel = eps_z + (spec.shots_per_setting == 0 ? 0.0 : budget.epsilon_qpt);
        e.corollary_applicable = corollary_time_valid(expected, spec.time);
        if (e.corollary_applicable)
          e.corollary_value = corollary_bound(spec.time, e.gap.upper, e.eps_channel);
        return e;
      });

      estimate_index[{int(ci), int(pi)}] = result.estimates.size();
      result.estimates.push_back(std::move(est));
      result.records.push_back(std::move(recs[pi]));
    }
  }

  // Stack the learned coordinates in model row order and combine.
  RealVector learned(Eigen::Index(result.model.rows.size()));
  for (std::size_t r = 0; r < result.model.rows.size(); ++r) {
    const auto& key = result.model.rows[r];
    const auto& est = result.estimates.at(estimate_index.at({key.config, key.patch}));
    learned[Eigen::Index(r)] = est.local_coeffs[key.local];
  }
  result.c_hat = combine_patches(result.model, learned);

  auto& metrics = result.metrics;
  metrics.abs_errors = (result.c_hat - result.c_true).cwiseAbs();
  metrics.l2 = (result.c_hat - result.c_true).norm();
  metrics.mean_abs = metrics.abs_errors.mean();
  metrics.max_abs = metrics.abs_errors.maxCoeff();
  std::vector<double> rels;
  for (Eigen::Index k = 0; k < result.c_true.size(); ++k)
    if (result.c_true[k] != 0.0) {
      metrics.nonzero_terms.push_back(int(k));
      rels.push_back(metrics.abs_errors[k] / std::abs(result.c_true[k]));
    }
  metrics.rel_errors.resize(Eigen::Index(rels.size()));
  for (std::size_t k = 0; k < rels.size(); ++k) metrics.rel_errors[Eigen::Index(k)] = rels[k];
  metrics.median_rel = rels.empty() ? 0.0 : median_of(rels);
  metrics.total_copies =
      spec.shots_per_setting * 324ULL * std::uint64_t(configs.size());
  return result;
}

std::vector<SweepPoint> sweep(SweepAxis axis, const std::vector<double>& grid,
                              const ProtocolSpec& base, int repeats) {
  if (grid.empty()) throw InputError("sweep grid must not be empty");
  if (repeats < 1) throw InputError("sweep needs at least one repeat");

  std::vector<SweepPoint> points;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    SweepPoint pt;
    pt.x = grid[gi];
    std::vector<double> l2s, abss;
    for (int rep = 0; rep < repeats; ++rep) {
      ProtocolSpec s = base;
      switch (axis) {
        case SweepAxis::copies: {
          const auto n_configs = plan_configurations(s.n_qubits).size();
          const double per_setting = grid[gi] / (324.0 * double(n_configs));
          s.shots_per_setting = std::max<std::uint64_t>(1, std::uint64_t(std::llround(per_setting)));
          break;
        }
        case SweepAxis::kicks:
          s.kicks = int(std::llround(grid[gi]));
          break;
        case SweepAxis::qubits:
          s.n_qubits = int(std::llround(grid[gi]));
          break;
      }
      s.seed = rng::derive_seed(base.seed, {kTagSweepRun, std::uint64_t(gi), std::uint64_t(rep)});
      const PauliHamiltonian h =
          s.ising ? ising_chain(s.n_qubits, *s.ising)
                  : random_2local_chain(
                        s.n_qubits,
                        rng::derive_seed(base.seed,
                                         {kTagSweepHam, std::uint64_t(rep), std::uint64_t(s.n_qubits)}));
      try {
        const RunResult res = run_protocol(h, s);
        l2s.push_back(res.metrics.l2);
        abss.push_back(res.metrics.mean_abs);
      } catch (const std::exception& e) {
        pt.failures.push_back(e.what());
      }
    }
    pt.completed = int(l2s.size());
    if (!l2s.empty()) {
      const double n = double(l2s.size());
      for (double v : l2s) pt.mean_l2 += v / n;
      for (double v : abss) pt.mean_abs += v / n;
      for (double v : l2s) pt.std_l2 += (v - pt.mean_l2) * (v - pt.mean_l2) / n;
      for (double v : abss) pt.std_abs += (v - pt.mean_abs) * (v - pt.mean_abs) / n;
      pt.std_l2 = std::sqrt(pt.std_l2);
      pt.std_abs = std::sqrt(pt.std_abs);
    }
    points.push_back(std::move(pt));
  }
  return points;
}

IsingEstimate ising_experiment(const ProtocolSpec& spec) {
  if (!spec.ising) throw InputError("coupling-chain experiment needs ising parameters");
  ProtocolSpec s = spec;
  s.mode = EvolutionMode::trotter_kicked;
  const PauliHamiltonian h = ising_chain(s.n_qubits, *s.ising);

  IsingEstimate out;
  out.run = run_protocol(h, s);

  std::map<PauliString, Eigen::Index> index;
  for (std::size_t k = 0; k < out.run.model.global_basis.size(); ++k)
    index[out.run.model.global_basis[k]] = Eigen::Index(k);

  std::vector<double> z_hats, xx_hats, lambdas;
  for (int q = 0; q < s.n_qubits; ++q)
    z_hats.push_back(out.run.c_hat[index.at(PauliString::single(s.n_qubits, q, 'Z'))]);
  for (int q = 0; q + 1 < s.n_qubits; ++q)
    xx_hats.push_back(
        out.run.c_hat[index.at(PauliString::pair(s.n_qubits, q, 'X', q + 1, 'X'))]);
  for (const auto& est : out.run.estimates) lambdas.push_back(est.lambda_debiased);

  out.h_hat = median_of(z_hats);
  out.j_hat = median_of(xx_hats);
  out.lambda_hat = median_of(lambdas);
  out.median_rel = out.run.metrics.median_rel;
  return out;
}

}  // namespace zenohl
