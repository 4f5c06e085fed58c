#pragma once

#include "iolab/harness.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace iolab::testing {

// Organic simulation of the default scenario, cached per seed.
inline const Simulation& default_simulation(std::uint64_t seed) {
    static std::map<std::uint64_t, Simulation> cache;
    auto it = cache.find(seed);
    if (it == cache.end()) {
        ScenarioConfig cfg = bundled_scenario("organic-baseline");
        cfg.seed = seed;
        it = cache.emplace(seed, simulate(cfg)).first;
    }
    return it->second;
}

inline InjectionContext context_for(const Simulation& sim, const DiscourseParams& params = {}) {
    return InjectionContext{&sim.social.graph, sim.scenario.truth.communities, sim.scenario.log.num_accounts(),
                            sim.topics, params};
}

inline Event make_event(EventId id, Timestamp ts, AccountId author, EventKind kind,
                        std::optional<std::uint64_t> target = std::nullopt, std::vector<TokenId> tokens = {},
                        ClientId client = 0) {
    Event e;
    e.id = id;
    e.ts = ts;
    e.author = author;
    e.kind = kind;
    e.target = target;
    e.client = client;
    e.tokens = std::move(tokens);
    return e;
}

inline EventLog make_log(std::size_t num_accounts, std::vector<Event> events) {
    EventLog log;
    for (std::size_t i = 0; i < num_accounts; ++i) log.accounts.push_back({static_cast<AccountId>(i), 0, {}});
    log.events = std::move(events);
    return log;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("iolab-test-" + tag + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace iolab::testing
