#pragma once

// Output plumbing shared by the CLI: deterministic CSV formatting, FNV-1a
// content hashes, and the JSON run record written next to every command's
// outputs.  Byte-identical reruns are part of the CLI contract, so all
// floating-point formatting goes through one %.17g path.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace benney::io {

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string file_hash_hex(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(ss.str())));
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
        : path_(path) {
        for (size_t i = 0; i < columns.size(); ++i)
            body_ += (i ? "," : "") + columns[i];
        body_ += '\n';
        ncols_ = columns.size();
    }

    void row(const std::vector<double>& values) {
        if (values.size() != ncols_) throw std::logic_error("CsvWriter: column count mismatch");
        for (size_t i = 0; i < values.size(); ++i)
            body_ += (i ? "," : "") + fmt_g17(values[i]);
        body_ += '\n';
    }

    void write() const {
        std::ofstream out(path_, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + path_.string() + " for writing");
        out << body_;
    }

    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
    std::string body_;
    size_t ncols_ = 0;
};

/// Manifest of one CLI run: config echo, tool version, wall clock and the
/// content hashes of every produced file.  The wall-clock entry is the one
/// field exempt from the byte-identical rerun contract.
class RunRecord {
  public:
    RunRecord(std::string command, std::string version)
        : command_(std::move(command)), version_(std::move(version)) {}

    void set_config(const std::map<std::string, std::string>& echo) { config_ = echo; }
    void note(const std::string& key, const nlohmann::json& value) { notes_[key] = value; }
    void add_output(const std::filesystem::path& p) { outputs_.push_back(p); }
    void set_wall_clock_ms(double ms) { wall_ms_ = ms; }

    void write(const std::filesystem::path& dir) const {
        nlohmann::json j;
        j["command"] = command_;
        j["version"] = version_;
        j["wall_clock_ms"] = wall_ms_;
        j["config"] = config_;
        for (const auto& [k, v] : notes_.items()) j["results"][k] = v;
        auto& man = j["outputs"];
        man = nlohmann::json::array();
        for (const auto& p : outputs_)
            man.push_back({{"path", p.filename().string()}, {"fnv1a64", file_hash_hex(p)}});
        std::ofstream out(dir / "run_record.json", std::ios::binary);
        out << j.dump(2) << '\n';
    }

  private:
    std::string command_;
    std::string version_;
    double wall_ms_ = 0.0;
    std::map<std::string, std::string> config_;
    nlohmann::json notes_;
    std::vector<std::filesystem::path> outputs_;
};

} // namespace benney::io
