#include "handover/io.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace handover {

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned i = 0; i < len; ++i) {
    out[2 * i] = hex[md[i] >> 4];
    out[2 * i + 1] = hex[md[i] & 0xf];
  }
  return out;
}

std::string file_digest(const std::string& path) {
  return sha256_hex(read_text(path));
}

std::string json_digest(const nlohmann::json& j) {
  return sha256_hex(j.dump());
}

void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& rows) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  for (const auto& r : rows) f << r.dump() << "\n";
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::vector<nlohmann::json> rows;
  for_each_jsonl(path, [&](const nlohmann::json& j) { rows.push_back(j); });
  return rows;
}

void for_each_jsonl(const std::string& path,
                    const std::function<void(const nlohmann::json&)>& fn) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    fn(nlohmann::json::parse(line));
  }
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << text;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

}  // namespace handover
