#pragma once

// JSONL streams, file digests, and canonical JSON hashing for the manifest.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

namespace handover {

std::string sha256_hex(const std::string& bytes);
std::string file_digest(const std::string& path);
// Digest of a canonical (sorted-key, compact) dump. nlohmann::json already
// keeps object keys sorted, so dump() is canonical for our purposes.
std::string json_digest(const nlohmann::json& j);

void write_jsonl(const std::string& path,
                 const std::vector<nlohmann::json>& rows);
std::vector<nlohmann::json> read_jsonl(const std::string& path);
void for_each_jsonl(const std::string& path,
                    const std::function<void(const nlohmann::json&)>& fn);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace handover
