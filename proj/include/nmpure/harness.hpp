// Copyright 2026 The nmpure Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Batch drivers behind the command-line tool: config parsing, parameter
// sweeps, estimator experiments and table output.
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "nmpure/analytics.hpp"
#include "nmpure/channels.hpp"
#include "nmpure/errors.hpp"
#include "nmpure/noise.hpp"
#include "nmpure/pauli.hpp"
#include "nmpure/purification.hpp"
#include "nmpure/random.hpp"
#include "nmpure/tensor.hpp"
#include "nmpure/tomography.hpp"
#include "nmpure/twirling.hpp"

namespace nmpure::harness {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Configuration.

struct SweepSpec {
  std::string case_name = "unitary";
  std::vector<double> t_grid{0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16, 0.18, 0.2};
  std::vector<double> param_grid{1, 2, 3, 4, 5, 6, 7, 8};
  std::optional<std::uint64_t> shots;
  std::optional<std::uint64_t> seed;
  HamiltonianNoiseSpec hamiltonian{};
  double tau = 0.35;
  std::string gate = "hadamard";
  std::size_t copies = 1;
  std::size_t points = 2;
  double p_e = 0.7;
  std::size_t repeats = 100;
  std::string twirl = "exact";
  std::size_t frames = 10;
  bool tomography = false;
  double epsilon = 0.1;
  std::string env_init = "mixed";

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

inline const std::vector<std::string>& case_names() {
  static const std::vector<std::string> kNames{"unitary", "channel", "multicopy", "multitime", "analytic"};
  return kNames;
}

inline const std::vector<std::string>& gate_names() {
  static const std::vector<std::string> kNames{"hadamard", "identity", "x", "y", "z", "s", "t"};
  return kNames;
}

inline ComplexMatrix gate_matrix(const std::string& name) {
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix g = ComplexMatrix::Identity(2, 2);
  if (name == "hadamard") {
    g << r, r, r, -r;
  } else if (name == "identity") {
  } else if (name == "x" || name == "y" || name == "z") {
    g = single_qubit_paulis()[name == "x" ? 1 : name == "y" ? 2 : 3];
  } else if (name == "s") {
    g(1, 1) = Complex(0.0, 1.0);
  } else if (name == "t") {
    g(1, 1) = std::polar(1.0, std::numbers::pi / 4.0);
  } else {
    throw ConfigError("field 'gate': unknown gate '" + name + "'");
  }
  return g;
}

inline ComplexMatrix env_matrix(const std::string& name) {
  if (name == "zero") return ket0_projector();
  if (name == "mixed") return ComplexMatrix::Identity(2, 2) / 2.0;
  throw ConfigError("field 'env_init': expected \"zero\" or \"mixed\", got '" + name + "'");
}

inline void validate(const SweepSpec& s) {
  auto one_of = [](const std::string& field, const std::string& v, const std::vector<std::string>& allowed) {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      throw ConfigError("field '" + field + "': unsupported value '" + v + "'");
    }
  };
  one_of("case", s.case_name, case_names());
  one_of("gate", s.gate, gate_names());
  one_of("twirl", s.twirl, {"exact", "sampled"});
  one_of("env_init", s.env_init, {"zero", "mixed"});
  if (s.t_grid.empty()) throw ConfigError("field 't_grid': grid is empty");
  if (s.param_grid.empty()) throw ConfigError("field 'param_grid': grid is empty");
  for (double t : s.t_grid) {
    if (!std::isfinite(t)) throw ConfigError("field 't_grid': non-finite value");
  }
  for (double v : s.param_grid) {
    if (!(v >= 1.0 && v <= 10.0 && v == std::floor(v))) {
      throw ConfigError("field 'param_grid': values must be integers in [1, 10]");
    }
  }
  if (s.shots && *s.shots < 2) throw ConfigError("field 'shots': need at least 2");
  if (s.shots && !s.seed) throw ConfigError("field 'seed': required when 'shots' is set");
  if (s.twirl == "sampled" && !s.seed) throw ConfigError("field 'seed': required for sampled twirling");
  if (s.copies < 1) throw ConfigError("field 'copies': need at least 1");
  if (s.points < 2) throw ConfigError("field 'points': need at least 2");
  if (s.frames < 1) throw ConfigError("field 'frames': need at least 1");
  if (s.repeats < 2) throw ConfigError("field 'repeats': need at least 2");
  if (!(s.p_e >= 0.0 && s.p_e < 1.0)) throw ConfigError("field 'p_e': must lie in [0, 1)");
  if (!(s.epsilon > 0.0)) throw ConfigError("field 'epsilon': must be positive");
  if (!std::isfinite(s.tau)) throw ConfigError("field 'tau': non-finite value");
}

namespace detail {

using Json = nlohmann::ordered_json;

template <typename T>
T field(const Json& j, const std::string& name) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("field '" + name + "': wrong type (" + std::string(j.type_name()) + ")");
  }
}

inline std::uint64_t unsigned_field(const Json& j, const std::string& name) {
  if (!j.is_number_unsigned()) throw ConfigError("field '" + name + "': expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline double number_field(const Json& j, const std::string& name) {
  if (!j.is_number()) throw ConfigError("field '" + name + "': expected a number");
  return j.get<double>();
}

inline std::vector<double> number_list(const Json& j, const std::string& name) {
  if (!j.is_array()) throw ConfigError("field '" + name + "': expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number_field(j[i], name + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::array<double, 3> vector3(const Json& j, const std::string& name) {
  const auto v = number_list(j, name);
  if (v.size() != 3) throw ConfigError("field '" + name + "': expected 3 components");
  return {v[0], v[1], v[2]};
}

}  // namespace detail

/// Parses a JSON config. Missing keys keep their defaults (`default_case`
/// for "case"); unknown keys are errors.
inline SweepSpec parse_spec(const std::string& text, const std::string& default_case = "unitary") {
  using detail::Json;
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  SweepSpec s;
  s.case_name = default_case;
  for (const auto& [key, v] : j.items()) {
    if (key == "case") {
      s.case_name = detail::field<std::string>(v, key);
    } else if (key == "t_grid") {
      s.t_grid = detail::number_list(v, key);
    } else if (key == "param_grid") {
      s.param_grid = detail::number_list(v, key);
    } else if (key == "shots") {
      s.shots = detail::unsigned_field(v, key);
    } else if (key == "seed") {
      s.seed = detail::unsigned_field(v, key);
    } else if (key == "hamiltonian") {
      if (!v.is_object()) throw ConfigError("field 'hamiltonian': expected an object");
      for (const auto& [hk, hv] : v.items()) {
        const std::string name = "hamiltonian." + hk;
        if (hk == "omega1") {
          s.hamiltonian.omega1 = detail::vector3(hv, name);
        } else if (hk == "omega2") {
          s.hamiltonian.omega2 = detail::vector3(hv, name);
        } else if (hk == "J") {
          s.hamiltonian.coupling = detail::number_field(hv, name);
        } else {
          throw ConfigError("unknown key '" + name + "'");
        }
      }
    } else if (key == "tau") {
      s.tau = detail::number_field(v, key);
    } else if (key == "gate") {
      s.gate = detail::field<std::string>(v, key);
    } else if (key == "copies") {
      s.copies = detail::unsigned_field(v, key);
    } else if (key == "points") {
      s.points = detail::unsigned_field(v, key);
    } else if (key == "p_e") {
      s.p_e = detail::number_field(v, key);
    } else if (key == "repeats") {
      s.repeats = detail::unsigned_field(v, key);
    } else if (key == "twirl") {
      s.twirl = detail::field<std::string>(v, key);
    } else if (key == "frames") {
      s.frames = detail::unsigned_field(v, key);
    } else if (key == "tomography") {
      s.tomography = detail::field<bool>(v, key);
    } else if (key == "epsilon") {
      s.epsilon = detail::number_field(v, key);
    } else if (key == "env_init") {
      s.env_init = detail::field<std::string>(v, key);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  return s;
}

inline nlohmann::ordered_json to_json(const SweepSpec& s) {
  nlohmann::ordered_json j;
  j["case"] = s.case_name;
  j["t_grid"] = s.t_grid;
  j["param_grid"] = s.param_grid;
  if (s.shots) j["shots"] = *s.shots;
  if (s.seed) j["seed"] = *s.seed;
  j["hamiltonian"] = {{"omega1", s.hamiltonian.omega1}, {"omega2", s.hamiltonian.omega2}, {"J", s.hamiltonian.coupling}};
  j["tau"] = s.tau;
  j["gate"] = s.gate;
  j["copies"] = s.copies;
  j["points"] = s.points;
  j["p_e"] = s.p_e;
  j["repeats"] = s.repeats;
  j["twirl"] = s.twirl;
  j["frames"] = s.frames;
  j["tomography"] = s.tomography;
  j["epsilon"] = s.epsilon;
  j["env_init"] = s.env_init;
  return j;
}

inline std::string serialize_spec(const SweepSpec& s) { return to_json(s).dump(2) + "\n"; }

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Result tables.

struct ResultRow {
  std::string label;
  double grid_value = 0.0;
  /// Aligned with ResultTable::columns; NaN marks a missing value.
  std::vector<double> values;
  std::string flags;
};

struct ResultTable {
  std::string command;
  std::string grid_name;
  std::vector<std::string> columns;
  std::vector<ResultRow> rows;

  double at(std::size_t row, const std::string& column) const {
    const auto it = std::find(columns.begin(), columns.end(), column);
    if (it == columns.end()) throw NameError("no column '" + column + "'");
    return rows.at(row).values.at(static_cast<std::size_t>(it - columns.begin()));
  }
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string hash_hex(const SweepSpec& spec) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(spec).dump())));
  return buf;
}

inline std::string to_csv(const ResultTable& table, const SweepSpec& spec) {
  std::ostringstream os;
  os << "# nmpure " << table.command << "\n";
  os << "# version: " << kVersion << "\n";
  os << "# config_hash: fnv1a64:" << hash_hex(spec) << "\n";
  os << "# seed: " << (spec.seed ? std::to_string(*spec.seed) : std::string("none")) << "\n";
  os << "# config: " << to_json(spec).dump() << "\n";
  os << "label," << table.grid_name;
  for (const auto& c : table.columns) os << "," << c;
  os << ",flags\n";
  for (const auto& r : table.rows) {
    os << r.label << "," << format_number(r.grid_value);
    for (double v : r.values) os << "," << format_number(v);
    os << "," << r.flags << "\n";
  }
  return os.str();
}

inline std::string to_json_text(const ResultTable& table, const SweepSpec& spec) {
  nlohmann::ordered_json j;
  j["command"] = table.command;
  j["version"] = kVersion;
  j["config_hash"] = "fnv1a64:" + hash_hex(spec);
  j["seed"] = spec.seed ? nlohmann::ordered_json(*spec.seed) : nlohmann::ordered_json(nullptr);
  j["config"] = to_json(spec);
  j["grid"] = table.grid_name;
  j["columns"] = table.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    nlohmann::ordered_json row;
    row["label"] = r.label;
    row[table.grid_name] = r.grid_value;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const double v = r.values[c];
      row[table.columns[c]] = std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v);
    }
    row["flags"] = r.flags;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Worker pool.

/// Evaluates f(0..n-1) on up to `workers` threads; results come back in
/// index order, and the lowest-index exception (if any) is rethrown.
template <typename F>
auto parallel_map(std::size_t n, std::size_t workers, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(n, 1));
  if (threads == 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
  }
  std::vector<R> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands.

namespace detail {

inline std::uint64_t task_seed(const SweepSpec& spec, std::size_t index) {
  return derive_seed(spec.seed.value_or(0), index);
}

inline TwirlMode twirl_mode(const SweepSpec& spec, std::uint64_t seed) {
  if (spec.twirl == "sampled") return SampledTwirl{spec.frames, derive_seed(seed, 0)};
  return ExactTwirl{};
}

inline NonMarkovSource source_at(const SweepSpec& spec, double t) {
  HamiltonianNoiseSpec h = spec.hamiltonian;
  h.time = t;
  return hamiltonian_noise(h, env_matrix(spec.env_init), spec.points);
}

inline std::vector<QuantumChannel> repeated(const QuantumChannel& op, std::size_t count) {
  return std::vector<QuantumChannel>(count, op);
}

/// Ideal circuit as one channel: the intermediate operations in order.
inline QuantumChannel ideal_process(const std::vector<QuantumChannel>& ops) {
  QuantumChannel acc = QuantumChannel::identity(ops.front().in_dim());
  for (const auto& op : ops) acc = compose(op, acc);
  return acc;
}

inline ComplexMatrix ideal_unitary(const SweepSpec& spec) {
  ComplexMatrix v = ComplexMatrix::Identity(2, 2);
  for (std::size_t k = 0; k + 1 < spec.points; ++k) v = gate_matrix(spec.gate) * v;
  return v;
}

inline std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) out += (out.empty() ? "" : ";") + f;
  return out;
}

inline void check_case(const SweepSpec& spec, const std::vector<std::string>& allowed, const std::string& command) {
  if (std::find(allowed.begin(), allowed.end(), spec.case_name) == allowed.end()) {
    throw ConfigError("field 'case': '" + spec.case_name + "' cannot run under " + command);
  }
}

}  // namespace detail

/// Gate case: fidelity of the purified output (Z measured after undoing the
/// ideal gates) against the untwirled, unprotected circuit.
inline ResultTable cmd_sweep_unitary(const SweepSpec& spec, std::size_t workers = 1) {
  validate(spec);
  detail::check_case(spec, {"unitary", "multicopy", "multitime"}, "sweep-unitary");
  const ComplexMatrix v = detail::ideal_unitary(spec);
  const ComplexMatrix observable = v * single_qubit_paulis()[3] * v.adjoint();
  const auto mid = detail::repeated(QuantumChannel::unitary(gate_matrix(spec.gate)), spec.points - 1);
  const DensityMatrix rho0 = DensityMatrix::basis(RegisterLayout{{kSys, 2}}, 0);

  ResultTable table{"sweep-unitary", "t",
                    {"fidelity_with", "fidelity_without", "mu_y", "mu_x", "o_eff", "p_plus", "p_minus"}, {}};
  if (spec.shots) {
    for (const char* c : {"o_eff_hat", "fidelity_with_shots", "sample_variance"}) table.columns.push_back(c);
  }
  table.rows = parallel_map(spec.t_grid.size(), workers, [&](std::size_t i) {
    const double t = spec.t_grid[i];
    const std::uint64_t seed = detail::task_seed(spec, i);
    const NonMarkovSource src = detail::source_at(spec, t);
    ProtocolConfig cfg = identical_noise_config(src, spec.copies, mid, rho0, observable);
    cfg.twirl = detail::twirl_mode(spec, seed);
    const EffectiveResult res = run_protocol_exact(cfg);
    const double z_without = run_untwirled(src, mid, rho0).expectation(observable);
    ResultRow row{spec.case_name, t,
                  {z_fidelity(res.o_eff), z_fidelity(z_without), res.mu_y, res.mu_x, res.o_eff, res.p_plus,
                   res.p_minus},
                  {}};
    std::vector<std::string> flags;
    if (!res.rho_eff.is_psd()) flags.push_back("rho_eff_not_psd");
    if (spec.shots) {
      const EstimatorSample s = sample_estimator(res, observable, *spec.shots, derive_seed(seed, 1));
      row.values.push_back(s.o_eff_hat);
      row.values.push_back(std::clamp(z_fidelity(s.o_eff_hat), 0.0, 1.0));
      row.values.push_back(s.sample_variance);
    }
    row.flags = detail::join_flags(flags);
    return row;
  });
  return table;
}

/// Channel case: Uhlmann fidelity of the purified output with the ideal
/// partial-swap output, against the unprotected circuit.
inline ResultTable cmd_sweep_channel(const SweepSpec& spec, std::size_t workers = 1) {
  validate(spec);
  detail::check_case(spec, {"channel", "multicopy", "multitime"}, "sweep-channel");
  const QuantumChannel channel = partial_swap_channel(spec.tau);
  const auto mid = detail::repeated(channel, spec.points - 1);
  const QuantumChannel ideal = detail::ideal_process(mid);
  const RegisterLayout q{{kSys, 2}};
  const DensityMatrix rho0 = DensityMatrix::basis(q, 0);
  const ComplexMatrix rho_ideal = ideal(rho0.matrix());
  const auto& paulis = single_qubit_paulis();

  ResultTable table{"sweep-channel", "t", {"fidelity_with", "fidelity_without", "mu_y", "p_plus", "p_minus"}, {}};
  if (spec.shots) table.columns.push_back("fidelity_with_shots");
  if (spec.tomography) {
    for (const char* c : {"chi_distance_with", "chi_distance_without"}) table.columns.push_back(c);
  }
  table.rows = parallel_map(spec.t_grid.size(), workers, [&](std::size_t i) {
    const double t = spec.t_grid[i];
    const std::uint64_t seed = detail::task_seed(spec, i);
    const NonMarkovSource src = detail::source_at(spec, t);
    auto protocol = [&](const DensityMatrix& input) {
      ProtocolConfig cfg = identical_noise_config(src, spec.copies, mid, input, paulis[3]);
      cfg.twirl = detail::twirl_mode(spec, seed);
      return run_protocol_exact(cfg);
    };
    const EffectiveResult res = protocol(rho0);
    const DensityMatrix without = run_untwirled(src, mid, rho0);
    const FidelityResult f_with = uhlmann_fidelity(res.rho_eff.matrix(), rho_ideal);
    const FidelityResult f_without = uhlmann_fidelity(without.matrix(), rho_ideal);
    ResultRow row{spec.case_name, t, {f_with.value, f_without.value, res.mu_y, res.p_plus, res.p_minus}, {}};
    std::vector<std::string> flags;
    if (f_with.clipped) flags.push_back("rho_eff_clipped");
    if (spec.shots) {
      std::array<double, 3> bloch{};
      for (int a = 0; a < 3; ++a) {
        bloch[a] = sample_estimator(res, paulis[a + 1], *spec.shots, derive_seed(seed, 1 + a)).o_eff_hat;
      }
      const BlochState est = state_from_pauli(bloch[0], bloch[1], bloch[2]);
      if (est.projected) flags.push_back("bloch_projected");
      row.values.push_back(uhlmann_fidelity(est.state.matrix(), rho_ideal).value);
    }
    if (spec.tomography) {
      const ProcessMatrix chi_ideal(chi_matrix(ideal));
      const ProcessMatrix chi_with = process_tomography(
          [&](TomographyInput in) { return protocol(input_state(in)).rho_eff.matrix(); });
      const ProcessMatrix chi_without =
          process_tomography([&](TomographyInput in) { return run_untwirled(src, mid, input_state(in)).matrix(); });
      row.values.push_back(chi_with.frobenius_distance(chi_ideal));
      row.values.push_back(chi_without.frobenius_distance(chi_ideal));
    }
    row.flags = detail::join_flags(flags);
    return row;
  });
  return table;
}

/// Closed-form toy suppression curves with distribution-level cross-checks,
/// over param_grid (points n for the multi-time curve, total copies m for the
/// multi-copy curve).
inline ResultTable cmd_analytic(const SweepSpec& spec, std::size_t workers = 1) {
  validate(spec);
  detail::check_case(spec, {"analytic", "multicopy", "multitime"}, "analytic");
  ResultTable table{"analytic",
                    "param",
                    {"p_e", "multitime_rate", "multitime_oracle", "multicopy_rate", "multicopy_oracle"},
                    {}};
  table.rows = parallel_map(spec.param_grid.size(), workers, [&](std::size_t i) {
    const int k = static_cast<int>(spec.param_grid[i]);
    // k independent points with 1 - p_e = (1 - p_single)^k, purified once.
    const double ps_time = 1.0 - std::pow(1.0 - spec.p_e, 1.0 / k);
    const double time_oracle = error_rate(purify_distribution(toy_iid_distribution(ps_time, k), 2));
    // two independent points with 1 - p_e = (1 - p_single)^2, raised to the k-th power.
    const double ps_copy = 1.0 - std::sqrt(1.0 - spec.p_e);
    const double copy_oracle = error_rate(purify_distribution(toy_iid_distribution(ps_copy, 2), k));
    return ResultRow{spec.case_name,
                     static_cast<double>(k),
                     {spec.p_e, toy_multitime_rate(spec.p_e, k), time_oracle, toy_multicopy_rate(spec.p_e, k),
                      copy_oracle},
                     {}};
  });
  return table;
}

/// Ratio-estimator experiment: one shot-sampled estimate per grid point, the
/// spread over `repeats` independent estimates, and the closed-form variance.
inline ResultTable cmd_estimate(const SweepSpec& spec, std::size_t workers = 1) {
  validate(spec);
  detail::check_case(spec, {"unitary", "multicopy", "multitime"}, "estimate");
  if (!spec.shots) throw ConfigError("field 'shots': the estimate command needs a shot count");
  const ComplexMatrix v = detail::ideal_unitary(spec);
  const ComplexMatrix observable = v * single_qubit_paulis()[3] * v.adjoint();
  const auto mid = detail::repeated(QuantumChannel::unitary(gate_matrix(spec.gate)), spec.points - 1);
  const DensityMatrix rho0 = DensityMatrix::basis(RegisterLayout{{kSys, 2}}, 0);
  const std::uint64_t shots = *spec.shots;

  ResultTable table{"estimate",
                    "t",
                    {"shots", "o_eff_exact", "o_eff_hat", "empirical_mean", "empirical_variance", "empirical_mse",
                     "predicted_variance", "sample_variance", "mu_y", "mu_x", "mu_x_identity_residual",
                     "suggested_shots"},
                    {}};
  table.rows = parallel_map(spec.t_grid.size(), workers, [&](std::size_t i) {
    const double t = spec.t_grid[i];
    const std::uint64_t seed = detail::task_seed(spec, i);
    const NonMarkovSource src = detail::source_at(spec, t);
    ProtocolConfig cfg = identical_noise_config(src, spec.copies, mid, rho0, observable);
    cfg.twirl = detail::twirl_mode(spec, seed);
    const EffectiveResult res = run_protocol_exact(cfg);

    std::vector<double> estimates;
    EstimatorSample first;
    for (std::size_t r = 0; r < spec.repeats; ++r) {
      const EstimatorSample s = sample_estimator(res, observable, shots, derive_seed(seed, 1 + r));
      if (r == 0) first = s;
      estimates.push_back(s.o_eff_hat);
    }
    double mean = 0.0;
    for (double e : estimates) mean += e;
    mean /= static_cast<double>(estimates.size());
    double var = 0.0, mse = 0.0;
    for (double e : estimates) {
      var += (e - mean) * (e - mean);
      mse += (e - res.o_eff) * (e - res.o_eff);
    }
    var /= static_cast<double>(estimates.size() - 1);
    mse /= static_cast<double>(estimates.size());

    double predicted = kMissing;
    if (spec.copies == 1) {
      predicted = estimator_variance(extract_joint_distribution(src), mid, rho0, observable, shots);
    }
    return ResultRow{spec.case_name,
                     t,
                     {static_cast<double>(shots), res.o_eff, first.o_eff_hat, mean, var, mse, predicted,
                      first.sample_variance, res.mu_y, res.mu_x, std::abs(res.mu_x - res.mu_y * res.o_eff),
                      static_cast<double>(sample_complexity(spec.epsilon, res.mu_y))},
                     {}};
  });
  return table;
}

/// Process matrices of the ideal partial swap, the purified circuit and the
/// unprotected circuit, one row per (t, process) with chi in Pauli order.
inline ResultTable cmd_tomography(const SweepSpec& spec, std::size_t workers = 1) {
  validate(spec);
  detail::check_case(spec, {"channel", "multicopy", "multitime"}, "tomography");
  const auto mid = detail::repeated(partial_swap_channel(spec.tau), spec.points - 1);
  const ProcessMatrix chi_ideal(chi_matrix(detail::ideal_process(mid)));
  ResultTable table{"tomography", "t", {"chi_distance_to_ideal"}, {}};
  for (const char* part : {"re", "im"}) {
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) table.columns.push_back("chi_" + std::string(part) + std::to_string(a) + std::to_string(b));
    }
  }
  auto row_for = [&](const std::string& label, double t, const ProcessMatrix& chi) {
    ResultRow row{label, t, {chi.frobenius_distance(chi_ideal)}, {}};
    for (const bool imag : {false, true}) {
      for (Eigen::Index a = 0; a < 4; ++a) {
        for (Eigen::Index b = 0; b < 4; ++b) row.values.push_back(imag ? chi.chi(a, b).imag() : chi.chi(a, b).real());
      }
    }
    return row;
  };
  const auto blocks = parallel_map(spec.t_grid.size(), workers, [&](std::size_t i) {
    const double t = spec.t_grid[i];
    const std::uint64_t seed = detail::task_seed(spec, i);
    const NonMarkovSource src = detail::source_at(spec, t);
    const ProcessMatrix with = process_tomography([&](TomographyInput in) {
      ProtocolConfig cfg = identical_noise_config(src, spec.copies, mid, input_state(in), single_qubit_paulis()[3]);
      cfg.twirl = detail::twirl_mode(spec, seed);
      return run_protocol_exact(cfg).rho_eff.matrix();
    });
    const ProcessMatrix without =
        process_tomography([&](TomographyInput in) { return run_untwirled(src, mid, input_state(in)).matrix(); });
    return std::vector<ResultRow>{row_for("ideal", t, chi_ideal), row_for("with", t, with),
                                  row_for("without", t, without)};
  });
  for (const auto& b : blocks) table.rows.insert(table.rows.end(), b.begin(), b.end());
  return table;
}

}  // namespace nmpure::harness
