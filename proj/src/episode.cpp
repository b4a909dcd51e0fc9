#include "semidx/episode.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include "semidx/error.hpp"

namespace semidx {

std::string to_string(Polarity p) { return p == Polarity::affirmed ? "affirmed" : "negated"; }

Polarity parse_polarity(std::string_view text) {
  if (text == "affirmed") return Polarity::affirmed;
  if (text == "negated") return Polarity::negated;
  throw Error("unknown polarity '" + std::string(text) + "'");
}

Situation Episode::situation() const {
  Situation s;
  s.source = id + "@" + timestamp;
  for (const auto& r : instances) {
    if (r.polarity == Polarity::affirmed) s.bindings.push_back({r.axis, r.node_key});
  }
  return s;
}

bool is_valid_timestamp(std::string_view ts) {
  // YYYY-MM-DDTHH:MM:SSZ
  static constexpr std::string_view shape = "dddd-dd-ddTdd:dd:ddZ";
  if (ts.size() != shape.size()) return false;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == 'd' ? (ts[i] < '0' || ts[i] > '9') : ts[i] != shape[i]) return false;
  }
  auto num = [&](std::size_t at, std::size_t len) {
    int v = 0;
    for (std::size_t i = at; i < at + len; ++i) v = v * 10 + (ts[i] - '0');
    return v;
  };
  const int y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2), mi = num(14, 2), s = num(17, 2);
  if (mo < 1 || mo > 12 || h > 23 || mi > 59 || s > 59) return false;
  const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(mo)),
                                        std::chrono::day(static_cast<unsigned>(d))};
  return ymd.ok();
}

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace semidx
