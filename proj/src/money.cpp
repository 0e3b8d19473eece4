#include "debugrepair/money.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace debugrepair {
namespace {

std::string u128_to_string(unsigned __int128 v) {
  if (v == 0)
    return "0";
  std::string s;
  while (v > 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return s;
}

} // namespace

Money Money::parse(std::string_view text) {
  const std::string original(text);
  auto bad = [&](const char *why) {
    return std::invalid_argument("invalid amount '" + original + "': " + why);
  };
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+')
    text.remove_prefix(1);
  if (!text.empty() && text.front() == '-')
    throw bad("negative");
  if (text.empty())
    throw bad("empty");

  std::string digits;
  int frac = 0;
  bool seen_point = false;
  std::size_t i = 0;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits += c;
      if (seen_point)
        ++frac;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (digits.empty())
    throw bad("no digits");
  long exponent = 0;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E')
      throw bad("unexpected character");
    ++i;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-'))
      neg = text[i++] == '-';
    if (i >= text.size())
      throw bad("missing exponent");
    for (; i < text.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i])))
        throw bad("unexpected character in exponent");
      exponent = exponent * 10 + (text[i] - '0');
      if (exponent > 100)
        throw bad("exponent out of range");
    }
    if (neg)
      exponent = -exponent;
  }

  // value = digits * 10^(exponent - frac); in picodollars shift by 12.
  long shift = exponent - frac + 12;
  while (shift < 0) {
    if (digits.back() != '0')
      throw bad("finer than one picodollar");
    digits.pop_back();
    ++shift;
    if (digits.empty())
      return Money{};
  }
  digits.append(static_cast<std::size_t>(shift), '0');
  const auto first = digits.find_first_not_of('0');
  if (first == std::string::npos)
    return Money{};
  if (digits.size() - first > 36)
    throw bad("too large");
  Rep value = 0;
  for (std::size_t k = first; k < digits.size(); ++k)
    value = value * 10 + (digits[k] - '0');
  return from_picos(value);
}

Money Money::from_double(double dollars) {
  if (!std::isfinite(dollars) || dollars < 0)
    throw std::invalid_argument("invalid amount " + std::to_string(dollars));
  return from_picos(static_cast<Rep>(std::llround(dollars * static_cast<double>(kPicosPerDollar))));
}

double Money::to_double() const noexcept {
  return static_cast<double>(picos_) / static_cast<double>(kPicosPerDollar);
}

std::string Money::to_string() const {
  const bool negative = picos_ < 0;
  const unsigned __int128 mag =
      negative ? static_cast<unsigned __int128>(-picos_) : static_cast<unsigned __int128>(picos_);
  std::string whole = u128_to_string(mag / kPicosPerDollar);
  std::string frac = u128_to_string(mag % kPicosPerDollar);
  frac.insert(frac.begin(), 12 - frac.size(), '0');
  return (negative ? "-" : "") + whole + "." + frac;
}

std::string Money::to_display() const {
  std::string s = to_string();
  const auto point = s.find('.');
  while (s.size() > point + 3 && s.back() == '0')
    s.pop_back();
  return s;
}

Money token_cost(std::int64_t input_tokens, Money input_price, std::int64_t output_tokens,
                 Money output_price) {
  return input_price * input_tokens + output_price * output_tokens;
}

} // namespace debugrepair
