#include <charconv>
#include <cmath>
#include <numeric>
#include <system_error>

#include "tlb/error.hpp"
#include "tlb/metrics.hpp"

namespace tlb {

Ratio Ratio::reduced() const {
  if (num == 0) return {0, 1};
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

bool operator==(const Ratio& a, const Ratio& b) {
  return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
}

bool operator<(const Ratio& a, const Ratio& b) {
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

Ratio Ratio::parse(std::string_view s) {
  const auto bad = [&] { return ConfigError("not a plain decimal number: '" + std::string(s) + "'"); };
  if (s.empty()) throw bad();
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool seen_dot = false;
  bool seen_digit = false;
  for (char c : s) {
    if (c == '.') {
      if (seen_dot) throw bad();
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') throw bad();
    seen_digit = true;
    if (num > (INT64_MAX - 9) / 10) throw bad();
    num = num * 10 + (c - '0');
    if (seen_dot) {
      if (den > INT64_MAX / 10) throw bad();
      den *= 10;
    }
  }
  if (!seen_digit) throw bad();
  return Ratio{num, den}.reduced();
}

Ratio Ratio::from_double(double value) {
  if (!std::isfinite(value) || value < 0.0) throw ConfigError("ratio must be a finite non-negative number");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  if (res.ec != std::errc()) throw ConfigError("cannot represent ratio");
  return parse(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
}

void validate_score_config(const ScoreConfig& cfg) {
  if (cfg.sigma.den <= 0 || cfg.sigma.num <= 0 || Ratio{1, 1} < cfg.sigma) {
    throw ConfigError("sigma must satisfy 0 < sigma <= 1");
  }
}

}  // namespace tlb
