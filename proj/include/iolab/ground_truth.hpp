#pragma once

#include "iolab/types.hpp"

#include <set>
#include <string>
#include <vector>

namespace iolab {

// Playbook tags used as operator roles and window labels.
namespace roles {
inline constexpr const char* kCoreEmbed = "core_embed";
inline constexpr const char* kBridge = "bridge";
inline constexpr const char* kPumpAndPivot = "pump_and_pivot";
inline constexpr const char* kFlood = "flood";
inline constexpr const char* kBolster = "bolster";
inline constexpr const char* kDegrade = "degrade";
}  // namespace roles

struct OperatorRecord {
    AccountId id = 0;
    std::string role;
    // Community the operator was planted into (-1 when not applicable).
    int community = -1;
    // Degrade faction, 0 or 1 (-1 otherwise).
    int faction = -1;
    // Controller group assigned by the stack policy (-1 before it runs).
    int controller = -1;

    bool operator==(const OperatorRecord&) const = default;
};

struct InjectionWindow {
    std::string playbook;
    Timestamp start = 0;
    Timestamp end = 0;

    bool operator==(const InjectionWindow&) const = default;
};

struct GroundTruth {
    std::vector<OperatorRecord> operators;
    std::vector<InjectionWindow> windows;
    // Planted community per account, indexed by AccountId.
    std::vector<CommunityId> communities;
    // Planted topic-word distributions, K rows of length V.
    std::vector<std::vector<double>> topics;

    bool empty() const { return operators.empty(); }
    bool is_operator(AccountId id) const;
    const OperatorRecord* find_operator(AccountId id) const;
    std::set<AccountId> operator_set() const;
    std::set<AccountId> operators_with_role(const std::string& role) const;

    bool operator==(const GroundTruth&) const = default;
};

}  // namespace iolab
