#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "ragic/error.hpp"

namespace ragic {

/// Calendar day. Ordered, hashable through its day count.
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::sys_days days) : days_(days) {}
    Date(int y, unsigned m, unsigned d)
        : days_(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                            std::chrono::day{d}}) {}

    /// Parses `YYYY-MM-DD`; returns false for anything else.
    static bool try_parse(std::string_view text, Date& out) {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
        int y = 0;
        unsigned m = 0;
        unsigned d = 0;
        for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
            if (text[i] < '0' || text[i] > '9') return false;
        }
        y = std::stoi(std::string(text.substr(0, 4)));
        m = static_cast<unsigned>(std::stoi(std::string(text.substr(5, 2))));
        d = static_cast<unsigned>(std::stoi(std::string(text.substr(8, 2))));
        std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
        if (!ymd.ok()) return false;
        out = Date(std::chrono::sys_days{ymd});
        return true;
    }

    static Date parse(std::string_view text) {
        Date out;
        if (!try_parse(text, out)) {
            fail(ErrorKind::parse, "invalid ISO date '" + std::string(text) + "'");
        }
        return out;
    }

    std::string iso() const {
        std::chrono::year_month_day ymd{days_};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        return buf;
    }

    long serial() const { return days_.time_since_epoch().count(); }
    Date plus_days(int n) const { return Date(days_ + std::chrono::days{n}); }

    auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

}  // namespace ragic
