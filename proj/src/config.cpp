#include "ddmpc/config.hpp"

#include <fstream>
#include <sstream>

#include "ddmpc/errors.hpp"
#include "ddmpc/text.hpp"

namespace ddmpc {

KeyValueConfig KeyValueConfig::parse(const std::string& content, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(content);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const auto body = text::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = text::trim(body.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    cfg.values_[std::string(key)] = std::string(text::trim(body.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file '" + path.string() + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

const std::string& KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError("missing key '" + key + "' in " + origin_);
  }
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
  return text::parse_double(get(key), "key '" + key + "' of " + origin_);
}

double KeyValueConfig::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key) const {
  return text::parse_int(get(key), "key '" + key + "' of " + origin_);
}

long long KeyValueConfig::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> KeyValueConfig::get_list(const std::string& key) const {
  return text::parse_double_list(get(key), "key '" + key + "' of " + origin_);
}

Eigen::MatrixXd KeyValueConfig::get_matrix(const std::string& key, Eigen::Index rows, Eigen::Index cols) const {
  const auto values = get_list(key);
  if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
    throw ConfigError("key '" + key + "' of " + origin_ + " has " + std::to_string(values.size()) +
                      " entries, expected " + std::to_string(rows * cols));
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
    }
  }
  return m;
}

Eigen::VectorXd KeyValueConfig::get_vector(const std::string& key, Eigen::Index size) const {
  return get_matrix(key, size, 1);
}

KeyValueConfig KeyValueConfig::section(const std::string& prefix) const {
  KeyValueConfig out;
  out.origin_ = origin_;
  const std::string dotted = prefix + ".";
  for (const auto& [k, v] : values_) {
    if (k.rfind(dotted, 0) == 0) {
      out.values_[k.substr(dotted.size())] = v;
    }
  }
  return out;
}

std::filesystem::path KeyValueConfig::base_dir() const {
  if (origin_.empty() || origin_.front() == '<') {
    return std::filesystem::current_path();
  }
  return std::filesystem::path(origin_).parent_path();
}

std::string KeyValueConfig::serialize() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) {
    out << k << " = " << v << '\n';
  }
  return out.str();
}

}  // namespace ddmpc
