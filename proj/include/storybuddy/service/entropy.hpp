#pragma once

#include "storybuddy/session.hpp"

#include <cstdint>
#include <mutex>
#include <optional>
#include <random>
#include <string>

namespace storybuddy::service {

/// Source of session ids and timestamps. Seeded mode makes both reproducible:
/// ids come from a fixed-seed generator and the clock starts at a fixed instant
/// and advances one second per reading.
class Entropy {
public:
    static Entropy real();
    static Entropy seeded(std::uint64_t seed);
    // Seeded when SB_SEED is set, real otherwise.
    static Entropy from_environment();

    Entropy(Entropy&& other) noexcept;

    std::string next_session_id();
    Timestamp now();
    bool deterministic() const noexcept { return seed_.has_value(); }

private:
    explicit Entropy(std::optional<std::uint64_t> seed);

    std::optional<std::uint64_t> seed_;
    std::mt19937_64 rng_;
    Timestamp clock_;
    std::mutex mutex_;
};

}  // namespace storybuddy::service
