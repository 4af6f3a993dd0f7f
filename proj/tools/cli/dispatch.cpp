#include "dispatch.hpp"

#include "common.hpp"

#include "netdiff/dynamics.hpp"
#include "netdiff/error.hpp"
#include "netdiff/exogenous.hpp"
#include "netdiff/modal_control.hpp"
#include "netdiff/monte_carlo.hpp"
#include "netdiff/spectral.hpp"
#include "netdiff/structure_design.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <iostream>
#include <sstream>

namespace netdiff::cli {
namespace {

namespace fs = std::filesystem;
using io::json;

std::string join(const std::vector<std::string>& args) {
  std::string s = "netdiff";
  for (const auto& a : args) s += " " + a;
  return s;
}

void report(std::ostream& err, std::string_view code, std::string message) {
  // module errors carry a "Code: " prefix already
  const std::string prefix = std::string(code) + ": ";
  if (message.rfind(prefix, 0) == 0) message.erase(0, prefix.size());
  err << json{{"error", std::string(code)}, {"message", message}}.dump() << "\n";
}

json complex_matrix_columns(const CMatrix& m) {
  json cols = json::array();
  for (Index c = 0; c < m.cols(); ++c) cols.push_back(io::complex_vector_to_json(m.col(c)));
  return cols;
}

std::vector<double> grid_for(double horizon, Index intervals) {
  if (!(horizon > 0.0)) throw Error(Errc::BadConfig, "--horizon must be positive");
  if (intervals < 1) throw Error(Errc::BadConfig, "--intervals must be at least 1");
  return time_grid(horizon, intervals);
}

Route parse_route(const std::string& s) {
  if (s == "auto") return Route::Auto;
  if (s == "spectral") return Route::Spectral;
  if (s == "expm") return Route::Exponential;
  throw Error(Errc::BadConfig, "--route must be auto, spectral or expm");
}

double parse_number(std::string_view s, const std::string& what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error(Errc::BadConfig, what + ": '" + std::string(s) + "' is not a number");
  return v;
}

Index parse_mode(std::string_view s, Index n, const std::string& what) {
  double v = parse_number(s, what);
  if (v != static_cast<double>(static_cast<Index>(v)) || v < 1 || v > static_cast<double>(n))
    throw Error(Errc::BadConfig, what + " must be a mode number in 1.." + std::to_string(n));
  return static_cast<Index>(v) - 1;
}

// none | p:K | i:K
ControllerSpec parse_controller(const std::string& text, Index mode) {
  if (text == "none") return ControllerSpec::none();
  if (text.size() > 2 && text[1] == ':') {
    double k = parse_number(std::string_view(text).substr(2), "--ctrl gain");
    if (text[0] == 'p') return ControllerSpec::proportional(mode, k);
    if (text[0] == 'i') return ControllerSpec::integral(mode, k);
  }
  throw Error(Errc::BadConfig, "--ctrl must be none, p:K or i:K");
}

// p=..,d=..,i=..,rho=..
LearningGains parse_gains(const std::string& text) {
  LearningGains g;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    auto eq = part.find('=');
    if (eq == std::string::npos) throw Error(Errc::BadConfig, "--gains entries look like p=0.5");
    std::string key = part.substr(0, eq);
    double v = parse_number(std::string_view(part).substr(eq + 1), "--gains " + key);
    if (key == "p") g.proportional = v;
    else if (key == "d") g.derivative = v;
    else if (key == "i") g.integral = v;
    else if (key == "rho") g.measurement_rate = v;
    else throw Error(Errc::BadConfig, "unknown gain '" + key + "' (use p, d, i, rho)");
  }
  if (!(g.measurement_rate > 0.0)) throw Error(Errc::BadConfig, "--gains rho must be positive");
  return g;
}

// mode=K:RE or mode=K:RE:IM, K 1-based
EigenvalueEdit parse_edit(const std::string& text, Index n) {
  if (text.rfind("mode=", 0) != 0) throw Error(Errc::BadConfig, "--edit looks like mode=K:VALUE");
  std::string body = text.substr(5);
  auto c1 = body.find(':');
  if (c1 == std::string::npos) throw Error(Errc::BadConfig, "--edit looks like mode=K:VALUE");
  EigenvalueEdit e;
  e.mode = parse_mode(std::string_view(body).substr(0, c1), n, "--edit mode");
  std::string rest = body.substr(c1 + 1);
  auto c2 = rest.find(':');
  double re = parse_number(std::string_view(rest).substr(0, c2), "--edit value");
  double im = c2 == std::string::npos ? 0.0 : parse_number(std::string_view(rest).substr(c2 + 1), "--edit value");
  e.value = Complex(re, im);
  return e;
}

json spectrum_json(const SpectralDecomposition& d, Protocol p) {
  json j;
  j["protocol"] = std::string(to_string(p));
  j["n"] = d.size();
  j["eigenvalues"] = io::complex_vector_to_json(d.eigenvalues);
  j["right_eigenvectors"] = complex_matrix_columns(d.right);
  j["left_rows"] = complex_matrix_columns(d.left.transpose());
  j["condition"] = d.condition;
  if (d.steady_index) j["steady_mode"] = *d.steady_index + 1;
  return j;
}

struct Common {
  std::string graph, protocol, out;
};

void add_graph_options(CLI::App* sub, Common& c, bool need_out) {
  sub->add_option("--graph", c.graph, "graph JSON file")->required();
  sub->add_option("--protocol", c.protocol, "P1|P2 (overrides the file)");
  auto* o = sub->add_option("--out", c.out, "output file");
  if (need_out) o->required();
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusion dynamics on weighted networks: spectra, trajectories, Monte Carlo, control, learning."};
  app.name("netdiff");
  app.require_subcommand(1);
  const std::string command = join(args);
  std::function<void()> action;

  // spectrum
  Common sp;
  auto* spectrum = app.add_subcommand("spectrum", "eigendecomposition of the transition rate matrix");
  add_graph_options(spectrum, sp, false);
  spectrum->callback([&] {
    action = [&] {
      RunManifest m(command);
      auto lg = load_graph(sp.graph, sp.protocol, m);
      auto q = transition_rate_matrix(lg.graph, lg.protocol);
      auto d = eigendecompose(q);
      json j = spectrum_json(d, lg.protocol);
      try {
        auto ss = steady_state_vectors(q);
        j["steady_state"] = {{"right", io::vector_to_json(ss.right)}, {"left", io::vector_to_json(ss.left)},
                             {"psi", ss.psi}, {"omega", ss.omega}};
      } catch (const Error&) {
      }
      j["generator"] = io::matrix_to_json(q.rates);
      if (sp.out.empty()) {
        out << j.dump(2) << "\n";
        return;
      }
      m.config() = {{"protocol", to_string(lg.protocol)}};
      emit(sp.out, j.dump(2) + "\n", m);
      m.write(manifest_path_for(sp.out, false));
    };
  });

  // simulate
  Common si;
  std::string si_s0, si_route = "auto";
  double si_horizon = 10.0;
  Index si_intervals = 100;
  auto* simulate = app.add_subcommand("simulate", "expected trajectory exp(Qt) S0");
  add_graph_options(simulate, si, true);
  simulate->add_option("--s0", si_s0, "initial state, comma separated")->required();
  simulate->add_option("--horizon", si_horizon, "final time");
  simulate->add_option("--intervals", si_intervals, "grid intervals");
  simulate->add_option("--route", si_route, "auto|spectral|expm");
  simulate->callback([&] {
    action = [&] {
      RunManifest m(command);
      auto lg = load_graph(si.graph, si.protocol, m);
      Vector s0 = vector_option(si_s0, lg.graph.size(), "--s0");
      auto tr = expected_trajectory(transition_rate_matrix(lg.graph, lg.protocol), s0,
                                    grid_for(si_horizon, si_intervals), parse_route(si_route));
      m.config() = {{"protocol", to_string(lg.protocol)}, {"s0", io::vector_to_json(s0)}, {"horizon", si_horizon},
                    {"intervals", si_intervals}, {"route", si_route}};
      emit(si.out, io::trajectory_csv(tr), m);
      m.write(manifest_path_for(si.out, false));
    };
  });

  // mc
  Common mc;
  std::string mc_s0, mc_scheme = "exact", mc_trials_dir;
  double mc_horizon = 15.0;
  Index mc_intervals = 15, mc_trials = 1000;
  std::uint64_t mc_seed = 1;
  unsigned mc_threads = 1;
  bool mc_strict = false;
  auto* mcs = app.add_subcommand("mc", "Monte Carlo sample paths of the pairwise protocol");
  add_graph_options(mcs, mc, true);
  mcs->add_option("--s0", mc_s0, "initial state")->required();
  mcs->add_option("--horizon", mc_horizon, "final time");
  mcs->add_option("--intervals", mc_intervals, "grid intervals");
  mcs->add_option("--trials", mc_trials, "number of sample paths");
  mcs->add_option("--seed", mc_seed, "master seed");
  mcs->add_option("--scheme", mc_scheme, "exact|disc:K");
  mcs->add_option("--threads", mc_threads, "worker threads (0 = all cores)");
  mcs->add_option("--trials-out", mc_trials_dir, "directory for per-trial CSVs");
  mcs->add_flag("--strict", mc_strict, "coarse discretization is an error");
  mcs->callback([&] {
    action = [&] {
      RunManifest m(command);
      auto lg = load_graph(mc.graph, mc.protocol, m);
      Vector s0 = vector_option(mc_s0, lg.graph.size(), "--s0");
      SampleOptions opt;
      opt.trials = mc_trials;
      opt.seed = mc_seed;
      opt.scheme = SimulationScheme::parse(mc_scheme);
      opt.threads = mc_threads;
      opt.keep_trials = !mc_trials_dir.empty();
      opt.strict_discretization = mc_strict;
      auto e = sample_paths(lg.graph, lg.protocol, s0, mc_horizon, grid_for(mc_horizon, mc_intervals), opt);
      for (const auto& w : e.warnings) err << "warning: " << w << "\n";
      m.add_seed(mc_seed);
      m.config() = {{"protocol", to_string(lg.protocol)}, {"s0", io::vector_to_json(s0)}, {"horizon", mc_horizon},
                    {"intervals", mc_intervals}, {"trials", mc_trials}, {"scheme", opt.scheme.to_string()},
                    {"warnings", e.warnings}};
      emit(mc.out, io::trajectory_csv(e.mean), m);
      Trajectory se = e.mean;
      se.values = e.standard_error;
      emit(sibling(mc.out, ".stderr.csv"), io::trajectory_csv(se), m);
      for (std::size_t k = 0; k < e.trials.size(); ++k)
        emit(fs::path(mc_trials_dir) / ("trial_" + std::to_string(k + 1) + ".csv"), io::trajectory_csv(e.trials[k]), m);
      m.write(manifest_path_for(mc.out, false));
    };
  });

  // drive
  Common dr;
  std::string dr_s0, dr_input, dr_stubborn, dr_gains, dr_t0;
  double dr_horizon = 10.0;
  Index dr_intervals = 100;
  auto* drive = app.add_subcommand("drive", "inhomogeneous dynamics: inputs, stubborn agents, learning gains");
  add_graph_options(drive, dr, true);
  drive->add_option("--s0", dr_s0, "initial state (default zero)");
  drive->add_option("--input", dr_input, "const:[...], impulse:[...] or pw:FILE.csv");
  drive->add_option("--stubborn", dr_stubborn, "AGENT=VALUE list, agents 1-based");
  drive->add_option("--gains", dr_gains, "p=..,d=..,i=..,rho=.. (measurement tracking of --input)");
  drive->add_option("--t0", dr_t0, "initial integral state for PID gains (default zero)");
  drive->add_option("--horizon", dr_horizon, "final time");
  drive->add_option("--intervals", dr_intervals, "grid intervals");
  drive->callback([&] {
    action = [&] {
      RunManifest m(command);
      auto lg = load_graph(dr.graph, dr.protocol, m);
      const Index n = lg.graph.size();
      auto q = transition_rate_matrix(lg.graph, lg.protocol);
      Vector s0 = dr_s0.empty() ? Vector(Vector::Zero(n)) : vector_option(dr_s0, n, "--s0");
      auto times = grid_for(dr_horizon, dr_intervals);
      json cfg = {{"protocol", to_string(lg.protocol)}, {"s0", io::vector_to_json(s0)}, {"horizon", dr_horizon},
                  {"intervals", dr_intervals}};
      const fs::path base = fs::path(dr.graph).parent_path();
      std::optional<InputSignal> input;
      if (!dr_input.empty()) {
        input = io::parse_input_spec(dr_input, base);
        if (input->dimension() != n)
          throw Error(Errc::BadConfig, "--input has " + std::to_string(input->dimension()) + " entries, graph has " +
                                           std::to_string(n) + " agents");
        cfg["input"] = dr_input;
        if (dr_input.rfind("pw:", 0) == 0) m.add_input(base / dr_input.substr(3));
      }
      Trajectory tr;
      json summary;
      if (!dr_stubborn.empty()) {
        if (input || !dr_gains.empty()) throw Error(Errc::BadConfig, "--stubborn cannot be combined with --input or --gains");
        auto [idx, vals] = io::parse_stubborn(dr_stubborn);
        auto rs = reduce_stubborn(q, idx, vals);
        auto chk = check_stubborn_invertibility(rs, lg.graph);
        auto red = inhomogeneous_trajectory(rs.reduced, rs.restrict(s0), InputSignal::constant(rs.input()), times);
        tr = red;
        tr.values.resize(red.samples(), n);
        for (Index k = 0; k < red.samples(); ++k) tr.values.row(k) = rs.expand(red.at(k)).transpose();
        summary = {{"neighbour_condition", chk.neighbour_condition}, {"diagonally_dominant", chk.diagonally_dominant},
                   {"invertible", chk.invertible}};
        if (chk.invertible) summary["steady_state"] = io::vector_to_json(rs.expand(stubborn_steady_state(rs)));
        summary["stability"] = std::string(to_string(bibo_stability(rs.reduced)));
        cfg["stubborn"] = dr_stubborn;
      } else if (!dr_gains.empty()) {
        if (!input) throw Error(Errc::BadConfig, "--gains needs the measured signal as --input");
        auto gains = parse_gains(dr_gains);
        cfg["gains"] = dr_gains;
        if (gains.d() == 0.0 && gains.i() == 0.0) {
          tr = dynamic_learning_trajectory(q.rates, gains, *input, s0, times);
          summary["stability"] = std::string(
              to_string(bibo_stability(q.rates - gains.p() * Matrix::Identity(n, n))));
        } else {
          Vector t0 = dr_t0.empty() ? Vector(Vector::Zero(n)) : vector_option(dr_t0, n, "--t0");
          auto r = pid_expanded_response(q.rates, gains, *input, s0, t0, times);
          tr = r.trajectory;
          summary["stability"] = std::string(to_string(r.stability));
          summary["poles"] = io::complex_vector_to_json(r.poles);
        }
      } else {
        InputSignal u = input ? *input : InputSignal::zero(n);
        tr = inhomogeneous_trajectory(q.rates, s0, u, times);
        if (auto* c = std::get_if<InputSignal::Constant>(&u.kind())) {
          auto drift = constant_input_drift(q.rates, c->value);
          summary["diverges"] = drift.diverges;
          summary["drift_rate"] = io::vector_to_json(drift.rate);
        }
      }
      m.config() = cfg;
      m.config()["summary"] = summary;
      out << summary.dump() << "\n";
      emit(dr.out, io::trajectory_csv(tr), m);
      m.write(manifest_path_for(dr.out, false));
    };
  });

  // control
  Common co;
  std::string co_impulse, co_ctrl = "none";
  Index co_mode = 1, co_intervals = 100;
  double co_horizon = 3.0;
  auto* control = app.add_subcommand("control", "impulse response with feedback on one quasi-mode");
  add_graph_options(control, co, true);
  control->add_option("--impulse", co_impulse, "impulse vector")->required();
  control->add_option("--mode", co_mode, "controlled quasi-mode, 1-based in ascending eigenvalue order");
  control->add_option("--ctrl", co_ctrl, "none|p:K|i:K");
  control->add_option("--horizon", co_horizon, "final time");
  control->add_option("--intervals", co_intervals, "grid intervals");
  control->callback([&] {
    action = [&] {
      RunManifest m(command);
      auto lg = load_graph(co.graph, co.protocol, m);
      const Index n = lg.graph.size();
      Vector imp = vector_option(co_impulse, n, "--impulse");
      if (co_mode < 1 || co_mode > n) throw Error(Errc::BadConfig, "--mode must lie in 1.." + std::to_string(n));
      auto d = eigendecompose(transition_rate_matrix(lg.graph, lg.protocol));
      auto ctrl = parse_controller(co_ctrl, co_mode - 1);
      auto r = controlled_response(d, imp, ctrl, grid_for(co_horizon, co_intervals));
      m.config() = {{"protocol", to_string(lg.protocol)}, {"impulse", io::vector_to_json(imp)}, {"mode", co_mode},
                    {"ctrl", co_ctrl}, {"horizon", co_horizon}, {"intervals", co_intervals},
                    {"eigenvalues", io::complex_vector_to_json(d.eigenvalues)},
                    {"quasi_input", io::complex_vector_to_json(to_quasi(d, imp))}, {"marginal", r.marginal}};
      emit(co.out, io::trajectory_csv(r.nodes), m);
      emit(sibling(co.out, ".quasi.csv"), io::quasi_csv(r.nodes.times, r.quasi), m);
      m.write(manifest_path_for(co.out, false));
    };
  });

  // respectrum
  Common re;
  std::vector<std::string> re_edits;
  auto* resp = app.add_subcommand("respectrum", "edit eigenvalues with the eigenvector basis held fixed");
  add_graph_options(resp, re, true);
  resp->add_option("--edit", re_edits, "mode=K:VALUE or mode=K:RE:IM, modes 1-based ascending")->required();
  resp->callback([&] {
    action = [&] {
      RunManifest m(command);
      auto lg = load_graph(re.graph, re.protocol, m);
      const Index n = lg.graph.size();
      auto q = transition_rate_matrix(lg.graph, lg.protocol);
      RespectrumPlan plan{degenerate_basis_choice(q.rates), {}, lg.protocol};
      for (const auto& e : re_edits) plan.edits.push_back(parse_edit(e, n));
      auto r = respectrum(plan, q.rates);
      json j;
      j["protocol"] = std::string(to_string(lg.protocol));
      j["original"] = io::matrix_to_json(q.rates);
      j["rates"] = io::matrix_to_json(r.rates);
      j["eigenvalues"] = io::complex_vector_to_json(r.eigenvalues);
      j["generator_valid"] = r.report.valid;
      j["min_off_diagonal"] = r.report.min_off_diagonal;
      j["violations"] = r.report.violations;
      j["edge_changes"] = json::array();
      for (const auto& c : r.changes)
        j["edge_changes"].push_back({{"from", c.from + 1}, {"to", c.to + 1}, {"before", c.before}, {"after", c.after},
                                     {"delta", c.after - c.before}});
      m.config() = {{"protocol", to_string(lg.protocol)}, {"edits", re_edits}};
      emit(re.out, j.dump(2) + "\n", m);
      m.write(manifest_path_for(re.out, false));
    };
  });

  // learn
  std::string le_config, le_out;
  std::optional<std::uint64_t> le_seed;
  auto* learn = app.add_subcommand("learn", "Q-learning over candidate rate matrices");
  learn->add_option("--config", le_config, "learning config JSON")->required();
  learn->add_option("--out", le_out, "output directory")->required();
  learn->add_option("--seed", le_seed, "overrides the config seed");
  learn->callback([&] {
    action = [&] {
      RunManifest m(command);
      json j = io::read_json(le_config);
      m.add_input(le_config);
      auto setup = learn_setup_from_json(j, fs::path(le_config).parent_path(), m);
      if (le_seed) setup.config.seed = *le_seed;
      auto results = run_qlearning_trials(setup.config, setup.trials, setup.threads);
      m.add_seed(setup.config.seed);
      m.config() = j;
      m.config()["seed"] = setup.config.seed;
      write_learning_outputs(le_out, setup, results, m);
      m.write(manifest_path_for(le_out, true));
    };
  });

  // repro
  std::string rp_target, rp_out = "repro";
  std::uint64_t rp_seed = 1;
  std::optional<Index> rp_trials;
  unsigned rp_threads = 1;
  auto* repro = app.add_subcommand("repro", "regenerate a figure or case study");
  repro->add_option("target", rp_target, "fig2 | fig3 | fig4 | fig5 | sec5b | sec6a | fig13 | fig14")->required();
  repro->add_option("--out", rp_out, "output directory");
  repro->add_option("--seed", rp_seed, "master seed");
  repro->add_option("--trials", rp_trials, "override the number of trials");
  repro->add_option("--threads", rp_threads, "worker threads (0 = all cores)");
  int repro_status = 0;
  repro->callback([&] {
    action = [&] { repro_status = run_repro(rp_target, rp_out, rp_seed, rp_trials, rp_threads, command, out); };
  });

  if (!args.empty() && args.front().rfind("-", 0) != 0) {
    const auto subs = app.get_subcommands({});
    if (std::none_of(subs.begin(), subs.end(), [&](const CLI::App* s) { return s->get_name() == args.front(); })) {
      report(err, "UnknownCommand", "unknown command '" + args.front() +
                                         "' (spectrum, simulate, mc, drive, control, respectrum, learn, repro)");
      return 2;
    }
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::RequiredError& e) {
    const bool no_command = args.empty() || args.front().rfind("-", 0) == 0;
    report(err, no_command ? "UnknownCommand" : "BadConfig", e.what());
    return 2;
  } catch (const CLI::ParseError& e) {
    report(err, "BadConfig", e.what());
    return 2;
  }
  try {
    if (action) action();
  } catch (const Error& e) {
    report(err, to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    report(err, "IoFailure", e.what());
    return 1;
  }
  return repro_status;
}

}  // namespace netdiff::cli
