#pragma once

#include <atomic>
#include <iostream>
#include <string_view>

namespace pdcbo {

namespace detail {
    inline std::atomic<bool>& warnings_enabled()
    {
        static std::atomic<bool> enabled{true};
        return enabled;
    }
    inline std::atomic<long>& warning_count()
    {
        static std::atomic<long> count{0};
        return count;
    }
} // namespace detail

inline void set_warnings_enabled(bool on) { detail::warnings_enabled() = on; }

/// Number of warnings raised since process start (printed or not).
inline long warning_count() { return detail::warning_count(); }

inline void log_warning(std::string_view msg)
{
    ++detail::warning_count();
    if (detail::warnings_enabled())
        std::clog << "[pdcbo warning] " << msg << '\n';
}

} // namespace pdcbo
