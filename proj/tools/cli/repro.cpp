// Reproduction targets: each writes CSV/JSON artifacts plus manifest.json into
// the output directory and prints a one-line JSON summary.
#include "common.hpp"

#include "netdiff/catalog.hpp"
#include "netdiff/dynamics.hpp"
#include "netdiff/error.hpp"
#include "netdiff/modal_control.hpp"
#include "netdiff/monte_carlo.hpp"
#include "netdiff/spectral.hpp"
#include "netdiff/structure_design.hpp"

#include <cmath>
#include <ostream>

namespace netdiff::cli {
namespace {

namespace fs = std::filesystem;
using io::json;

struct Context {
  fs::path dir;
  std::uint64_t seed;
  std::optional<Index> trials;
  unsigned threads;
  RunManifest& manifest;
};

Vector unit(Index n, Index k) {
  Vector v = Vector::Zero(n);
  v(k) = 1.0;
  return v;
}

// Monte Carlo against the analytic mean on P5 (alpha = 0.2).
json path5_comparison(Context& c, Protocol p) {
  const auto g = catalog::path5(0.2);
  const Vector s0 = unit(5, 4);
  const auto grid = time_grid(15.0, 150);
  const auto q = transition_rate_matrix(g, p);
  auto analytic = expected_trajectory(q, s0, grid);
  SampleOptions opt;
  opt.trials = c.trials.value_or(5000);
  opt.seed = c.seed;
  opt.threads = c.threads;
  opt.keep_trials = false;
  auto e = sample_paths(g, p, s0, 15.0, grid, opt);
  c.manifest.add_seed(c.seed);
  emit(c.dir / "analytic.csv", io::trajectory_csv(analytic), c.manifest);
  emit(c.dir / "mc_mean.csv", io::trajectory_csv(e.mean), c.manifest);
  Trajectory se = e.mean;
  se.values = e.standard_error;
  emit(c.dir / "mc_stderr.csv", io::trajectory_csv(se), c.manifest);

  Index inside = 0, cells = 0;
  for (Index k = 1; k < analytic.samples(); ++k)
    for (Index i = 0; i < 5; ++i, ++cells)
      if (std::abs(e.mean.values(k, i) - analytic.values(k, i)) <= 3.0 * e.standard_error(k, i) + 1e-12) ++inside;
  json s = {{"protocol", to_string(p)}, {"trials", opt.trials},
            {"fraction_within_3se", static_cast<double>(inside) / static_cast<double>(cells)},
            {"mc_final", io::vector_to_json(e.mean.final_state())},
            {"analytic_final", io::vector_to_json(analytic.final_state())}};
  return s;
}

json fig2(Context& c) {
  json s = path5_comparison(c, Protocol::Conservative);
  const auto q = transition_rate_matrix(catalog::path5(0.2), Protocol::Conservative);
  s["stationary"] = io::vector_to_json(stationary_value_conservative(q, unit(5, 4)));
  return s;
}

json fig34(Context& c) {
  json s = path5_comparison(c, Protocol::NonConservative);
  const auto q = transition_rate_matrix(catalog::path5(0.2), Protocol::NonConservative);
  const auto ss = steady_state_vectors(q);
  s["consensus"] = consensus_value(q, unit(5, 4));
  s["left_steady_vector"] = io::vector_to_json(ss.left);
  s["omega"] = ss.omega;
  auto longrun = expected_trajectory(q, unit(5, 4), time_grid(100.0, 100));
  emit(c.dir / "analytic_t100.csv", io::trajectory_csv(longrun), c.manifest);
  return s;
}

json fig5(Context& c) {
  const auto g = catalog::path5(1.0);
  const auto grid = time_grid(50.0, 500);
  auto p1 = expected_trajectory(transition_rate_matrix(g, Protocol::Conservative), unit(5, 4), grid);
  auto p2 = expected_trajectory(transition_rate_matrix(g, Protocol::NonConservative), unit(5, 4), grid);
  emit(c.dir / "p1.csv", io::trajectory_csv(p1), c.manifest);
  emit(c.dir / "p2.csv", io::trajectory_csv(p2), c.manifest);
  return {{"max_protocol_difference", (p1.values - p2.values).cwiseAbs().maxCoeff()},
          {"final_distance_to_uniform", (p1.final_state().array() - 0.2).abs().maxCoeff()}};
}

json sec5b(Context& c) {
  const Vector impulse = (Vector(4) << 1, 0, 1, 0).finished();
  const auto grid = time_grid(3.0, 300);
  json s = json::object();
  for (auto p : {Protocol::Conservative, Protocol::NonConservative}) {
    const std::string tag = p == Protocol::Conservative ? "p1" : "p2";
    auto d = eigendecompose(transition_rate_matrix(catalog::asymmetric_cycle4(p), p));
    d.align_to(catalog::cycle4_reference_basis(p));
    json entry = {{"eigenvalues", io::complex_vector_to_json(d.eigenvalues)},
                  {"quasi_input", io::complex_vector_to_json(to_quasi(d, impulse))}};
    const std::vector<std::pair<std::string, ControllerSpec>> runs{
        {"none", ControllerSpec::none()},
        {"p_plus1", ControllerSpec::proportional(0, 1.0)},
        {"p_minus1", ControllerSpec::proportional(0, -1.0)},
        {"i_2", ControllerSpec::integral(0, 2.0)}};
    for (const auto& [name, ctrl] : runs) {
      auto r = controlled_response(d, impulse, ctrl, ctrl.kind == ControllerSpec::Kind::Integral ? time_grid(40.0, 400) : grid);
      emit(c.dir / (tag + "_" + name + ".csv"), io::trajectory_csv(r.nodes), c.manifest);
      emit(c.dir / (tag + "_" + name + ".quasi.csv"), io::quasi_csv(r.nodes.times, r.quasi), c.manifest);
      if (ctrl.kind == ControllerSpec::Kind::Integral) entry["integral_final_mode1"] = std::abs(r.quasi(r.quasi.rows() - 1, 0));
    }
    s[tag] = entry;
  }
  return s;
}

json sec6a(Context& c) {
  const auto q = transition_rate_matrix(catalog::star5(), Protocol::Conservative);
  RespectrumPlan plan{degenerate_basis_choice(q.rates), {}, Protocol::Conservative};
  plan.edits.push_back({0, Complex(-4.5, 0.0)});
  auto r = respectrum(plan, q.rates);
  json j = {{"original", io::matrix_to_json(q.rates)}, {"rates", io::matrix_to_json(r.rates)},
            {"eigenvalues", io::complex_vector_to_json(r.eigenvalues)}, {"generator_valid", r.report.valid}};
  emit(c.dir / "respectrum.json", j.dump(2) + "\n", c.manifest);
  return {{"generator_valid", r.report.valid}, {"edge_changes", r.changes.size()}};
}

json fig1314(Context& c) {
  json cfg = {{"protocol", "P1"},
              {"actions", {{"random_complete", {{"n", 10}, {"count", 50}, {"seed", c.seed}}}}},
              {"rewards", {{"nodes", {3, 8}}, {"value", 5.0}}},
              {"learning_rate", 0.2}, {"discount", 0.995}, {"exploitation", 0.4},
              {"steps", 200000}, {"seed", c.seed}, {"history_stride", 1000},
              {"tracked", {{1, 1}, {1, 2}, {1, 3}, {1, 4}, {1, 5}}},
              {"trials", c.trials.value_or(20)}, {"threads", c.threads}};
  auto setup = learn_setup_from_json(cfg, {}, c.manifest);
  auto results = run_qlearning_trials(setup.config, setup.trials, setup.threads);
  c.manifest.config()["learn"] = cfg;
  c.manifest.add_seed(c.seed);
  write_learning_outputs(c.dir, setup, results, c.manifest);
  double mass = 0.0;
  for (const auto& r : results) mass += r.stationary(2) + r.stationary(7);
  mass /= static_cast<double>(results.size());
  const auto proxy = learning_curve_proxy(results.front());
  return {{"rewarded_mass", mass}, {"uniform_baseline", 0.2}, {"proxy_passed", proxy.passed}};
}

}  // namespace

int run_repro(const std::string& target, const fs::path& out_dir, std::uint64_t seed, std::optional<Index> trials,
              unsigned threads, const std::string& command, std::ostream& out) {
  RunManifest manifest(command);
  Context c{out_dir, seed, trials, threads, manifest};
  json summary;
  if (target == "fig2") summary = fig2(c);
  else if (target == "fig3" || target == "fig4" || target == "fig3/4") summary = fig34(c);
  else if (target == "fig5") summary = fig5(c);
  else if (target == "sec5b") summary = sec5b(c);
  else if (target == "sec6a") summary = sec6a(c);
  else if (target == "fig13" || target == "fig14" || target == "fig13/14") summary = fig1314(c);
  else
    throw Error(Errc::UnknownCommand,
                "unknown repro target '" + target + "' (fig2, fig3, fig4, fig5, sec5b, sec6a, fig13, fig14)");
  summary["target"] = target;
  manifest.config()["target"] = target;
  manifest.config()["summary"] = summary;
  emit(out_dir / "summary.json", summary.dump(2) + "\n", manifest);
  manifest.write(manifest_path_for(out_dir, true));
  out << summary.dump() << "\n";
  return 0;
}

}  // namespace netdiff::cli
