#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "gwpam/harness.hpp"

namespace gwpam {

std::string library_version() { return "gwpam 0.1.0"; }

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("sha256: digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("sha256: cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return sha256_hex(buffer.str());
}

std::vector<OutputRecord> hash_outputs(const std::string& dir, const std::vector<std::string>& files) {
  std::vector<OutputRecord> out;
  const auto base = std::filesystem::absolute(dir);
  for (const auto& f : files) {
    const auto p = std::filesystem::absolute(f);
    out.push_back({std::filesystem::relative(p, base).generic_string(), sha256_file(p.string())});
  }
  return out;
}

namespace {

nlohmann::json records_json(const std::vector<OutputRecord>& records) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : records) out.push_back({{"path", r.path}, {"sha256", r.sha256}});
  return out;
}

std::vector<OutputRecord> records_from(const nlohmann::json& j) {
  std::vector<OutputRecord> out;
  for (const auto& r : j) out.push_back({r.at("path").get<std::string>(), r.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
  return {{"command", command},
          {"config", config},
          {"seed", seed},
          {"version", version},
          {"inputs", records_json(inputs)},
          {"outputs", records_json(outputs)},
          {"wall_clock_seconds", wall_clock_seconds}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config");
  m.seed = j.value("seed", std::uint64_t{0});
  m.version = j.value("version", std::string{});
  if (j.contains("inputs")) m.inputs = records_from(j.at("inputs"));
  if (j.contains("outputs")) m.outputs = records_from(j.at("outputs"));
  m.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
  return m;
}

void RunManifest::write(const std::string& path) const {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("manifest: cannot write " + path);
  out << to_json().dump(2) << '\n';
}

RunManifest RunManifest::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest: cannot read " + path);
  return from_json(nlohmann::json::parse(in));
}

}  // namespace gwpam
