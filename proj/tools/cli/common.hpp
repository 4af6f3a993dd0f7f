// Helpers shared by the subcommands.
#pragma once

#include "manifest.hpp"

#include "netdiff/graph.hpp"
#include "netdiff/io.hpp"
#include "netdiff/mdp.hpp"
#include "netdiff/trajectory.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace netdiff::cli {

struct LoadedGraph {
  WeightedDigraph graph;
  Protocol protocol = Protocol::Conservative;
};

/// Reads a graph file; `protocol` (if non-empty) overrides the file's field.
/// Throws BadConfig when neither names a protocol.
LoadedGraph load_graph(const std::filesystem::path& path, const std::string& protocol, RunManifest& manifest);

/// Parses a vector option and checks its length against the agent count.
Vector vector_option(const std::string& text, Index n, const std::string& field);

/// Writes `text` to `path` and records it in the manifest.
void emit(const std::filesystem::path& path, const std::string& text, RunManifest& manifest);

/// Sibling path with the extension replaced: a/b.csv + ".quasi.csv" -> a/b.quasi.csv.
std::filesystem::path sibling(const std::filesystem::path& path, const std::string& suffix);

/// Learning run described by a JSON config (see README for the schema).
struct LearnSetup {
  MdpConfig config;
  Index trials = 1;
  unsigned threads = 1;
};
LearnSetup learn_setup_from_json(const io::json& j, const std::filesystem::path& base_dir, RunManifest& manifest);

/// Writes the learning artifacts into `dir`.
void write_learning_outputs(const std::filesystem::path& dir, const LearnSetup& setup,
                            const std::vector<LearningResult>& results, RunManifest& manifest);

int run_repro(const std::string& target, const std::filesystem::path& out_dir, std::uint64_t seed,
              std::optional<Index> trials, unsigned threads, const std::string& command, std::ostream& out);

}  // namespace netdiff::cli
