#include "storybuddy/service/entropy.hpp"

#include <cstdio>
#include <cstdlib>

namespace storybuddy::service {

namespace {

// Monday of ISO week 2026-W02.
constexpr auto kSeededEpoch = std::chrono::sys_days{std::chrono::year{2026} / 1 / 5} + std::chrono::hours{9};

}  // namespace

Entropy::Entropy(std::optional<std::uint64_t> seed) : seed_(seed), clock_(kSeededEpoch) {
    if (seed_) {
        rng_.seed(*seed_);
    } else {
        std::random_device rd;
        rng_.seed((static_cast<std::uint64_t>(rd()) << 32) ^ rd());
    }
}

Entropy::Entropy(Entropy&& other) noexcept
    : seed_(other.seed_), rng_(other.rng_), clock_(other.clock_) {}

Entropy Entropy::real() { return Entropy(std::nullopt); }

Entropy Entropy::seeded(std::uint64_t seed) { return Entropy(seed); }

Entropy Entropy::from_environment() {
    if (const char* env = std::getenv("SB_SEED"); env != nullptr && *env != '\0') {
        return seeded(std::strtoull(env, nullptr, 10));
    }
    return real();
}

std::string Entropy::next_session_id() {
    std::lock_guard lock(mutex_);
    char buf[24];
    std::snprintf(buf, sizeof buf, "s-%016llx", static_cast<unsigned long long>(rng_()));
    return buf;
}

Timestamp Entropy::now() {
    if (!seed_) return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    std::lock_guard lock(mutex_);
    const Timestamp t = clock_;
    clock_ += std::chrono::seconds{1};
    return t;
}

}  // namespace storybuddy::service
