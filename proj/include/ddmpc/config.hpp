#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ddmpc {

/// Flat `key = value` text format. Keys may be dotted (`controller.L`);
/// `#` starts a comment. Later assignments override earlier ones.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(const std::string& content, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  /// Throws ConfigError naming the key when absent.
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;

  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  std::vector<double> get_list(const std::string& key) const;

  /// Row-major matrix of the given shape.
  Eigen::MatrixXd get_matrix(const std::string& key, Eigen::Index rows, Eigen::Index cols) const;
  Eigen::VectorXd get_vector(const std::string& key, Eigen::Index size) const;

  /// Sub-config containing the keys under `prefix.` with the prefix removed.
  KeyValueConfig section(const std::string& prefix) const;

  const std::string& origin() const { return origin_; }
  /// Directory that relative file references are resolved against.
  std::filesystem::path base_dir() const;

  std::string serialize() const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_ = "<string>";
};

}  // namespace ddmpc
