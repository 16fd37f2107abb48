#pragma once

#include <charconv>
#include <cstdio>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace polarnet {

/// Calendar day (UTC), stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}

    static constexpr Date from_ymd(int y, unsigned m, unsigned d) {
        // days_from_civil, proleptic Gregorian
        y -= m <= 2 ? 1 : 0;
        const int era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return Date(era * 146097 + static_cast<int>(doe) - 719468);
    }

    struct Ymd {
        int year;
        unsigned month;
        unsigned day;
    };

    constexpr Ymd ymd() const {
        const int z = days_ + 719468;
        const int era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const int y = static_cast<int>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp < 10 ? mp + 3 : mp - 9;
        return {y + (m <= 2 ? 1 : 0), m, d};
    }

    /// Parses strict YYYY-MM-DD. Returns nullopt for anything else,
    /// including impossible days such as 2013-02-30.
    static std::optional<Date> parse(std::string_view s) {
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
        int y = 0;
        unsigned m = 0, d = 0;
        auto num = [](std::string_view part, auto& out) {
            auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
            return ec == std::errc{} && p == part.data() + part.size();
        };
        if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) || !num(s.substr(8, 2), d))
            return std::nullopt;
        if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
        const Date date = from_ymd(y, m, d);
        const Ymd back = date.ymd();
        if (back.year != y || back.month != m || back.day != d) return std::nullopt;
        return date;
    }

    std::string to_string() const {
        const Ymd v = ymd();
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", v.year, v.month, v.day);
        return buf;
    }

    constexpr std::int32_t days() const { return days_; }
    constexpr Date operator+(std::int32_t n) const { return Date(days_ + n); }
    constexpr std::int32_t operator-(Date o) const { return days_ - o.days_; }
    constexpr auto operator<=>(const Date&) const = default;

private:
    std::int32_t days_ = 0;
};

}  // namespace polarnet
