#include "valleyfinder/ingest.hpp"

#include <charconv>
#include <chrono>
#include <limits>

namespace valleyfinder {

namespace {

bool all_digits(std::string_view text) {
  if (text.empty())
    return false;
  for (char c : text)
    if (c < '0' || c > '9')
      return false;
  return true;
}

template <class Int>
std::optional<Int> to_int(std::string_view text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    return std::nullopt;
  return value;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
    text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                           text.back() == '\r'))
    text.remove_suffix(1);
  return text;
}

} // namespace

std::optional<std::int64_t> parse_epoch_seconds(std::string_view text) {
  text = trim(text);
  if (text.empty() || text.front() == '-' || text.front() == '+')
    return std::nullopt;
  const auto dot = text.find('.');
  auto whole = text.substr(0, dot);
  if (!all_digits(whole))
    return std::nullopt;
  if (dot != std::string_view::npos) {
    auto frac = text.substr(dot + 1);
    if (!frac.empty() && !all_digits(frac))
      return std::nullopt;
  }
  return to_int<std::int64_t>(whole);
}

std::optional<std::int64_t> parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  // YYYY-MM-DDThh:mm:ss is 19 characters; a zone designator follows.
  if (text.size() < 20)
    return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ' &&
                                           text[10] != 't') ||
      text[13] != ':' || text[16] != ':')
    return std::nullopt;
  auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    auto part = text.substr(pos, len);
    if (!all_digits(part))
      return std::nullopt;
    return to_int<int>(part);
  };
  auto y = field(0, 4), mo = field(5, 2), d = field(8, 2);
  auto h = field(11, 2), mi = field(14, 2), s = field(17, 2);
  if (!y || !mo || !d || !h || !mi || !s)
    return std::nullopt;
  if (*h > 23 || *mi > 59 || *s > 60)
    return std::nullopt;
  const year_month_day date{year{*y}, month{static_cast<unsigned>(*mo)},
                            day{static_cast<unsigned>(*d)}};
  if (!date.ok())
    return std::nullopt;

  auto rest = text.substr(19);
  if (!rest.empty() && (rest.front() == '.' || rest.front() == ',')) {
    std::size_t n = 1;
    while (n < rest.size() && rest[n] >= '0' && rest[n] <= '9')
      ++n;
    if (n == 1)
      return std::nullopt;
    rest.remove_prefix(n);
  }

  std::int64_t offset_s = 0;
  if (rest == "Z" || rest == "z") {
    offset_s = 0;
  } else if (!rest.empty() && (rest.front() == '+' || rest.front() == '-')) {
    const int sign = rest.front() == '+' ? 1 : -1;
    auto zone = rest.substr(1);
    std::optional<int> zh, zm;
    if (zone.size() == 5 && zone[2] == ':') {
      zh = all_digits(zone.substr(0, 2)) ? to_int<int>(zone.substr(0, 2))
                                         : std::nullopt;
      zm = all_digits(zone.substr(3, 2)) ? to_int<int>(zone.substr(3, 2))
                                         : std::nullopt;
    } else if (zone.size() == 4 && all_digits(zone)) {
      zh = to_int<int>(zone.substr(0, 2));
      zm = to_int<int>(zone.substr(2, 2));
    } else if (zone.size() == 2 && all_digits(zone)) {
      zh = to_int<int>(zone);
      zm = 0;
    }
    if (!zh || !zm || *zh > 23 || *zm > 59)
      return std::nullopt;
    offset_s = sign * (*zh * 3600 + *zm * 60);
  } else {
    return std::nullopt;
  }

  const auto days = sys_days{date}.time_since_epoch().count();
  const std::int64_t local = static_cast<std::int64_t>(days) * 86400 +
                             *h * 3600 + *mi * 60 + *s;
  return local - offset_s;
}

} // namespace valleyfinder
