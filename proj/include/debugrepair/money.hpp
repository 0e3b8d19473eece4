#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace debugrepair {

// Exact currency amount in picodollars (1e-12 USD). Per-token prices and
// run costs both fit; token counts times prices are computed exactly.
class Money {
public:
  using Rep = __int128;
  static constexpr std::int64_t kPicosPerDollar = 1'000'000'000'000;

  constexpr Money() = default;
  static constexpr Money from_picos(Rep picos) {
    Money m;
    m.picos_ = picos;
    return m;
  }

  // Decimal text such as "0.0032", "2.5e-6" or "15". Throws
  // std::invalid_argument for malformed, negative, or sub-picodollar input.
  static Money parse(std::string_view text);
  // Rounds to the nearest picodollar. Throws std::invalid_argument for
  // negative or non-finite values.
  static Money from_double(double dollars);

  constexpr Rep picos() const noexcept { return picos_; }
  double to_double() const noexcept;

  // Fixed 12-decimal rendering, e.g. "0.003200000000". Parses back exactly.
  std::string to_string() const;
  // Human form with trailing zeros trimmed (at least 2 decimals): "0.0032".
  std::string to_display() const;

  friend constexpr Money operator+(Money a, Money b) { return from_picos(a.picos_ + b.picos_); }
  Money &operator+=(Money other) {
    picos_ += other.picos_;
    return *this;
  }
  friend constexpr Money operator*(Money price, std::int64_t count) {
    return from_picos(price.picos_ * count);
  }
  friend constexpr bool operator==(Money a, Money b) = default;
  friend constexpr auto operator<=>(Money a, Money b) { return a.picos_ <=> b.picos_; }

private:
  Rep picos_ = 0;
};

// input_tokens * input_price + output_tokens * output_price.
Money token_cost(std::int64_t input_tokens, Money input_price, std::int64_t output_tokens,
                 Money output_price);

} // namespace debugrepair
