#include "ddmpc/text.hpp"

#include <charconv>
#include <cmath>

#include "ddmpc/errors.hpp"

namespace ddmpc::text {

std::string format_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, std::string_view context) {
  token = trim(token);
  if (token == "inf" || token == "+inf") {
    return INFINITY;
  }
  if (token == "-inf") {
    return -INFINITY;
  }
  if (!token.empty() && token.front() == '+') {
    token.remove_prefix(1);
  }
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw ConfigError("cannot parse number '" + std::string(token) + "' in " + std::string(context));
  }
  return v;
}

long long parse_int(std::string_view token, std::string_view context) {
  token = trim(token);
  long long v = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw ConfigError("cannot parse integer '" + std::string(token) + "' in " + std::string(context));
  }
  return v;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view s, std::string_view delims) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto next = s.find_first_of(delims, pos);
    const auto end = next == std::string_view::npos ? s.size() : next;
    if (end > pos) {
      out.emplace_back(s.substr(pos, end - pos));
    }
    if (next == std::string_view::npos) {
      break;
    }
    pos = next + 1;
  }
  return out;
}

std::vector<double> parse_double_list(std::string_view s, std::string_view context) {
  std::vector<double> out;
  for (const auto& tok : split(s, " \t,;[]")) {
    out.push_back(parse_double(tok, context));
  }
  return out;
}

}  // namespace ddmpc::text
