#include "common.hpp"

#include "netdiff/error.hpp"
#include "netdiff/monte_carlo.hpp"

#include <sstream>

namespace netdiff::cli {

namespace fs = std::filesystem;
using io::json;

LoadedGraph load_graph(const fs::path& path, const std::string& protocol, RunManifest& manifest) {
  auto file = io::read_graph(path);
  manifest.add_input(path);
  LoadedGraph lg{std::move(file.graph), Protocol::Conservative};
  if (!protocol.empty()) lg.protocol = parse_protocol(protocol);
  else if (file.protocol) lg.protocol = *file.protocol;
  else throw Error(Errc::BadConfig, "--protocol is required: " + path.generic_string() + " names no protocol");
  return lg;
}

Vector vector_option(const std::string& text, Index n, const std::string& field) {
  Vector v;
  try {
    v = io::parse_vector(text);
  } catch (const Error& e) {
    throw Error(Errc::BadConfig, field + ": " + e.what());
  }
  if (v.size() != n)
    throw Error(Errc::BadConfig, field + " has " + std::to_string(v.size()) + " entries, graph has " +
                                     std::to_string(n) + " agents");
  return v;
}

void emit(const fs::path& path, const std::string& text, RunManifest& manifest) {
  io::write_text(path, text);
  manifest.add_output(path);
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  fs::path p = path;
  return p.replace_extension().string() + suffix;
}

namespace {

template <class T>
T field_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::BadConfig, std::string("learn config field '") + key + "' has the wrong type");
  }
}

Index one_based(const json& v, Index n, const std::string& what) {
  if (!v.is_number_integer()) throw Error(Errc::BadConfig, what + " must be an integer");
  auto k = v.get<Index>();
  if (k < 1 || k > n) throw Error(Errc::BadConfig, what + " must lie in 1.." + std::to_string(n));
  return k - 1;
}

std::string join_row(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t k = 0; k < cells.size(); ++k) s += (k ? "," : "") + cells[k];
  return s + "\n";
}

}  // namespace

LearnSetup learn_setup_from_json(const json& j, const fs::path& base_dir, RunManifest& manifest) {
  if (!j.is_object()) throw Error(Errc::BadConfig, "learn config must be a JSON object");
  LearnSetup s;
  auto& c = s.config;
  c.protocol = parse_protocol(field_or<std::string>(j, "protocol", "P1"));
  if (!j.contains("actions")) throw Error(Errc::BadConfig, "learn config needs 'actions'");
  const json& a = j.at("actions");
  if (a.contains("random_complete")) {
    const json& r = a.at("random_complete");
    Index n = field_or<Index>(r, "n", 0), count = field_or<Index>(r, "count", 0);
    if (n < 2 || count < 1) throw Error(Errc::BadConfig, "actions.random_complete needs n >= 2 and count >= 1");
    c.actions = random_complete_actions(n, count, c.protocol, field_or<std::uint64_t>(r, "seed", 0));
  } else if (a.contains("files")) {
    for (const auto& f : a.at("files")) {
      fs::path p = base_dir / f.get<std::string>();
      c.actions.push_back(io::matrix_from_json(io::read_json(p)));
      manifest.add_input(p);
    }
  } else if (a.contains("matrices")) {
    for (const auto& m : a.at("matrices")) c.actions.push_back(io::matrix_from_json(m));
  } else {
    throw Error(Errc::BadConfig, "actions must hold 'random_complete', 'files' or 'matrices'");
  }
  if (c.actions.empty()) throw Error(Errc::BadConfig, "actions is empty");
  const Index n = c.states(), w = static_cast<Index>(c.actions.size());

  if (!j.contains("rewards")) throw Error(Errc::BadConfig, "learn config needs 'rewards'");
  const json& r = j.at("rewards");
  if (r.contains("table")) {
    c.reward = io::matrix_from_json(r.at("table"));
  } else {
    c.reward = Matrix::Zero(n, w);
    const double value = field_or<double>(r, "value", 1.0);
    for (const auto& node : r.at("nodes")) c.reward.row(one_based(node, n, "rewards.nodes entry")).setConstant(value);
  }
  c.learning_rate = field_or<double>(j, "learning_rate", c.learning_rate);
  c.discount = field_or<double>(j, "discount", c.discount);
  c.exploitation = field_or<double>(j, "exploitation", c.exploitation);
  c.steps = field_or<std::int64_t>(j, "steps", 0);
  c.seed = field_or<std::uint64_t>(j, "seed", 0);
  if (j.contains("initial_state")) c.initial_state = one_based(j.at("initial_state"), n, "initial_state");
  c.reward_mode = parse_reward_mode(field_or<std::string>(j, "reward_mode", "max-next"));
  c.history_stride = field_or<std::int64_t>(j, "history_stride", c.history_stride);
  if (j.contains("tracked"))
    for (const auto& p : j.at("tracked")) {
      if (!p.is_array() || p.size() != 2) throw Error(Errc::BadConfig, "tracked entries are [state, action] pairs");
      c.tracked.emplace_back(one_based(p[0], n, "tracked state"), one_based(p[1], w, "tracked action"));
    }
  s.trials = field_or<Index>(j, "trials", 1);
  s.threads = field_or<unsigned>(j, "threads", 1);
  return s;
}

void write_learning_outputs(const fs::path& dir, const LearnSetup& setup, const std::vector<LearningResult>& results,
                            RunManifest& manifest) {
  const auto& cfg = setup.config;
  const Index n = cfg.states();
  json seeds = json::array();
  for (std::size_t k = 0; k < results.size(); ++k) {
    auto rng = trial_rng(cfg.seed, k);
    const std::uint64_t seed = rng();
    const Index start = std::uniform_int_distribution<Index>(0, n - 1)(rng);
    seeds.push_back({{"trial", k + 1}, {"seed", seed}, {"initial_state", start + 1}});
  }
  emit(dir / "seeds.json", seeds.dump(2) + "\n", manifest);

  // v0 per trial plus the mean
  std::ostringstream v0;
  std::vector<std::string> head{"state"};
  for (std::size_t k = 0; k < results.size(); ++k) head.push_back("trial" + std::to_string(k + 1));
  head.push_back("mean");
  v0 << join_row(head);
  for (Index i = 0; i < n; ++i) {
    std::vector<std::string> row{std::to_string(i + 1)};
    double mean = 0.0;
    for (const auto& r : results) {
      row.push_back(io::format_double(r.stationary(i)));
      mean += r.stationary(i);
    }
    row.push_back(io::format_double(mean / static_cast<double>(results.size())));
    v0 << join_row(row);
  }
  emit(dir / "stationary.csv", v0.str(), manifest);

  std::ostringstream trace;
  head.assign(1, "step");
  for (std::size_t k = 0; k < results.size(); ++k) head.push_back("trial" + std::to_string(k + 1));
  trace << join_row(head);
  const auto& steps = results.front().history_steps;
  for (std::size_t s = 0; s < steps.size(); ++s) {
    std::vector<std::string> row{std::to_string(steps[s])};
    for (const auto& r : results) row.push_back(s < r.reward_trace.size() ? io::format_double(r.reward_trace[s]) : "");
    trace << join_row(row);
  }
  emit(dir / "reward_trace.csv", trace.str(), manifest);

  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    const std::string tag = std::to_string(k + 1);
    emit(dir / ("quality_trial" + tag + ".json"), io::matrix_to_json(r.quality).dump() + "\n", manifest);
    emit(dir / ("grand_trial" + tag + ".json"), io::matrix_to_json(r.grand).dump() + "\n", manifest);
    if (!cfg.tracked.empty()) {
      std::ostringstream h;
      std::vector<std::string> hh{"step"};
      for (auto [x, a] : cfg.tracked) hh.push_back("q_" + std::to_string(x + 1) + "_" + std::to_string(a + 1));
      h << join_row(hh);
      for (Index s = 0; s < r.history.rows(); ++s) {
        std::vector<std::string> row{std::to_string(r.history_steps[static_cast<std::size_t>(s)])};
        for (Index c = 0; c < r.history.cols(); ++c) row.push_back(io::format_double(r.history(s, c)));
        h << join_row(row);
      }
      emit(dir / ("quality_history_trial" + tag + ".csv"), h.str(), manifest);
    }
  }
}

}  // namespace netdiff::cli
