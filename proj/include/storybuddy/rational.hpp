#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace storybuddy {

/// Exact fraction with a positive denominator, always stored in lowest terms.
/// Used for rank scores and every dashboard ratio so that sums of proportions
/// are exact and presentation rounding never leaks back into computation.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(google-explicit-constructor)
    Rational(std::int64_t numerator, std::int64_t denominator) : num_(numerator), den_(denominator) {
        if (den_ == 0) throw std::domain_error("zero denominator");
        reduce();
    }

    std::int64_t numerator() const noexcept { return num_; }
    std::int64_t denominator() const noexcept { return den_; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string to_string() const { return std::to_string(num_) + "/" + std::to_string(den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return {a.num_ * b.num_, a.den_ * b.den_};
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        return {a.num_ * b.den_, a.den_ * b.num_};
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
        return a.num_ * b.den_ <=> b.num_ * a.den_;
    }

private:
    void reduce() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

}  // namespace storybuddy
