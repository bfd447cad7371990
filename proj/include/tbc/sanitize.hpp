#pragma once

#include <cmath>
#include <cstdint>

namespace tbc {

/// Replacement for infinite and NaN outputs of models and of the system under test.
inline constexpr double kDefaultSubstitution = 10'000'000.0;

/// `x` when finite, otherwise `substitution` (unsigned: +inf, -inf and NaN all map to it).
inline double sanitize(double x, double substitution = kDefaultSubstitution) noexcept {
    return std::isfinite(x) ? x : substitution;
}

/// Instrumentation for the sanitization boundary. fitness() and utility() call
/// note_nonfinite_violation() whenever a value they consume after sanitization is still
/// non-finite; a correct build never increments the counter.
std::uint64_t nonfinite_violations() noexcept;
void note_nonfinite_violation() noexcept;
void reset_nonfinite_violations() noexcept;

} // namespace tbc
