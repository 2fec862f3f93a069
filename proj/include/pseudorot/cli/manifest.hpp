#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pseudorot/core/csv.hpp"
#include "pseudorot/core/errors.hpp"

namespace pseudorot::cli {

using Json = nlohmann::ordered_json;

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("internal", "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("missing_file", "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("io_error", "cannot write " + path);
  f << data;
}

struct StageRecord {
  std::string name;
  double seconds = 0;
  bool ok = true;
  std::string detail;
};

// `schema` names the format the file must parse under: "csv:<header>", "json:<type>",
// "text" or "grid_dump".
struct FileRecord {
  std::string path;   // relative to the output directory
  std::string schema;
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct RunManifest {
  std::string tool = "pseudorot";
  std::string version = PSEUDOROT_VERSION;
  std::string config_hash;
  std::vector<std::string> commands;
  std::vector<StageRecord> stages;
  std::vector<FileRecord> files;

  Json to_json() const {
    Json j;
    j["type"] = "run_manifest";
    j["tool"] = tool;
    j["version"] = version;
    j["config_hash"] = config_hash;
    j["commands"] = commands;
    Json s = Json::array();
    for (const auto& r : stages) s.push_back({{"name", r.name}, {"seconds", r.seconds}, {"ok", r.ok}, {"detail", r.detail}});
    j["stages"] = s;
    Json f = Json::array();
    for (const auto& r : files) f.push_back({{"path", r.path}, {"schema", r.schema}, {"bytes", r.bytes}, {"sha256", r.sha256}});
    j["files"] = f;
    return j;
  }

  static RunManifest from_json(const Json& j) {
    if (j.value("type", "") != "run_manifest") throw InvalidArgument("not a run_manifest record");
    RunManifest m;
    m.tool = j.at("tool").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.commands = j.at("commands").get<std::vector<std::string>>();
    for (const auto& s : j.at("stages"))
      m.stages.push_back({s.at("name").get<std::string>(), s.at("seconds").get<double>(), s.at("ok").get<bool>(),
                          s.at("detail").get<std::string>()});
    for (const auto& f : j.at("files"))
      m.files.push_back({f.at("path").get<std::string>(), f.at("schema").get<std::string>(),
                         f.at("bytes").get<std::uintmax_t>(), f.at("sha256").get<std::string>()});
    return m;
  }
};

// Output directory plus the manifest being built for it. A manifest already present
// with the same config hash is extended; otherwise it is replaced.
class OutputDir {
 public:
  OutputDir(std::string dir, std::string config_hash, std::string command) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    const std::string mp = path("manifest.json");
    if (std::filesystem::exists(mp)) {
      try {
        RunManifest old = RunManifest::from_json(Json::parse(read_file(mp)));
        if (old.config_hash == config_hash) m_ = old;
      } catch (const std::exception&) {
      }
    }
    m_.config_hash = std::move(config_hash);
    m_.commands.push_back(std::move(command));
  }

  std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

  void write(const std::string& name, const std::string& data, const std::string& schema) {
    write_file(path(name), data);
    FileRecord r{name, schema, data.size(), sha256_hex(data)};
    for (auto& f : m_.files)
      if (f.path == name) {
        f = r;
        return;
      }
    m_.files.push_back(r);
  }

  void stage(StageRecord s) { m_.stages.push_back(std::move(s)); }

  void save() const { write_file(path("manifest.json"), m_.to_json().dump(2) + "\n"); }

  const RunManifest& manifest() const { return m_; }

 private:
  std::string dir_;
  RunManifest m_;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline std::string csv_schema(const std::string& text) {
  return "csv:" + text.substr(0, text.find('\n'));
}

// Checks one manifest entry against the file on disk: presence, size, hash, and that
// it parses under its schema. Returns an empty string when everything matches.
inline std::string check_file(const std::string& dir, const FileRecord& f) {
  const std::string p = (std::filesystem::path(dir) / f.path).string();
  if (!std::filesystem::exists(p)) return f.path + ": missing";
  const std::string data = read_file(p);
  if (data.size() != f.bytes) return f.path + ": size differs from manifest";
  if (sha256_hex(data) != f.sha256) return f.path + ": hash differs from manifest";
  try {
    if (f.schema.rfind("csv:", 0) == 0) {
      const csv::Table t = csv::parse(data);
      std::string header;
      for (std::size_t i = 0; i < t.header.size(); ++i) header += (i ? "," : "") + t.header[i];
      if (header != f.schema.substr(4)) return f.path + ": csv header differs from schema";
      if (!data.empty() && data.back() != '\n') return f.path + ": missing final LF";
      if (data.find('\r') != std::string::npos) return f.path + ": CR in csv";
    } else if (f.schema.rfind("json:", 0) == 0) {
      const Json j = Json::parse(data);
      if (j.value("type", "") != f.schema.substr(5)) return f.path + ": json type differs from schema";
    }
  } catch (const std::exception& e) {
    return f.path + ": " + e.what();
  }
  return "";
}

}  // namespace pseudorot::cli
