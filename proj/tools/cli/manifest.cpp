#include "manifest.hpp"

#include "netdiff/error.hpp"
#include "netdiff/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#ifndef NETDIFF_VERSION
#define NETDIFF_VERSION "0.0.0"
#endif

namespace netdiff::cli {

RunManifest::RunManifest(std::string command) : command_(std::move(command)) {}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs_.emplace_back(path.generic_string(), sha256_file(path));
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs_.emplace_back(path.generic_string(), sha256_file(path));
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command_;
  j["version"] = NETDIFF_VERSION;
  j["config"] = config_;
  j["seeds"] = seeds_;
  auto files = [](const auto& list) {
    auto arr = nlohmann::json::array();
    for (const auto& [p, d] : list) arr.push_back({{"path", p}, {"sha256", d}});
    return arr;
  };
  j["inputs"] = files(inputs_);
  j["outputs"] = files(outputs_);
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const { io::write_text(path, to_json().dump(2) + "\n"); }

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot read '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw Error(Errc::IoFailure, "cannot initialise SHA-256");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[md[k] >> 4];
    out += hex[md[k] & 15];
  }
  return out;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& out, bool directory) {
  if (directory) return out / "manifest.json";
  return std::filesystem::path(out.string() + ".manifest.json");
}

}  // namespace netdiff::cli
