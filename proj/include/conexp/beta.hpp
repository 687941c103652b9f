#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace conexp {

class InvalidBeta : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Cone-angle parameter beta = num/den, kept exact. The cone angle is 2*pi*beta.
class Beta {
public:
    Beta(std::int64_t num, std::int64_t den) {
        if (den == 0) throw InvalidBeta("beta: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const auto g = std::gcd(num < 0 ? -num : num, den);
        num_ = num / g;
        den_ = den / g;
        if (num_ <= 0 || num_ >= den_)
            throw InvalidBeta("beta must satisfy 0 < beta < 1, got " + str());
    }

    /// Parses "p/q" (or a bare integer, which is always rejected by the range check).
    static Beta parse(std::string_view text) {
        const auto slash = text.find('/');
        try {
            if (slash == std::string_view::npos)
                return Beta(std::stoll(std::string(text)), 1);
            return Beta(std::stoll(std::string(text.substr(0, slash))),
                        std::stoll(std::string(text.substr(slash + 1))));
        } catch (const InvalidBeta&) {
            throw;
        } catch (const std::exception&) {
            throw InvalidBeta("beta: cannot parse '" + std::string(text) + "'");
        }
    }

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

    friend bool operator==(const Beta&, const Beta&) = default;

private:
    std::int64_t num_ = 1;
    std::int64_t den_ = 2;
};

}  // namespace conexp
