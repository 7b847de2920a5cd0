#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "sectorfolio/error.hpp"

namespace sectorfolio {

/// Calendar date, ISO-8601 `YYYY-MM-DD` on the wire.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
    constexpr Date(int y, unsigned m, unsigned d)
        : days_(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                            std::chrono::day{d}}) {}

    static Date parse(std::string_view text) {
        auto fail = [&] { return ParseError("invalid date '" + std::string(text) + "'"); };
        if (text.size() != 10 || text[4] != '-' || text[7] != '-')
            throw fail();
        int y = 0;
        unsigned m = 0, d = 0;
        auto num = [&](std::string_view s, auto& out) {
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
            if (ec != std::errc{} || p != s.data() + s.size())
                throw fail();
        };
        num(text.substr(0, 4), y);
        num(text.substr(5, 2), m);
        num(text.substr(8, 2), d);
        std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
        if (!ymd.ok())
            throw fail();
        return Date(std::chrono::sys_days{ymd});
    }

    std::string to_string() const {
        std::chrono::year_month_day ymd{days_};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        return buf;
    }

    constexpr std::chrono::sys_days days() const { return days_; }
    constexpr Date shifted(int n) const { return Date(days_ + std::chrono::days{n}); }

    constexpr auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

} // namespace sectorfolio
