#pragma once

// Scenario configuration and its flat key-value file format.
//
//   # comment
//   mode = pool                 # pool | channel | semi_trust
//   num_peers = 10
//   chunk_count = 20
//   chunk_value = 5
//   deposit = 100
//   collateral = 150
//   duration = 1000             # blocks
//   settlement_gas_fee = 1
//   confirmation_depth = 6      # blocks
//   block_interval = 10         # ticks per block
//   churn = 12:0>1, 30:1>0      # tick:fromPeer>toPeer, ticks since streaming began
//   adversaries = 0:withholding # peer:behavior
//   settlement_policy = at_expiry_only   # every_chunk | lazy:<n> | at_expiry_only
//   random_seed = 1
//   chunk_size = 256
//   channel_capacity = 0        # 0 = chunk_count * chunk_value
//   live_top_up = false
//   withdraw_at_expiry = false

#include "mpool/peer.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mpool::sim {

enum class Mode { Pool, Channel, SemiTrust };
std::string_view to_string(Mode m) noexcept;

struct ChurnEvent {
    std::uint64_t tick = 0;
    std::size_t from = 0;
    std::size_t to = 0;
    bool operator==(const ChurnEvent&) const = default;
};

struct AdversarySpec {
    std::size_t peer = 0;
    CacherBehavior behavior = CacherBehavior::Withholding;
    bool operator==(const AdversarySpec&) const = default;
};

struct ScenarioConfig {
    Mode mode = Mode::Pool;
    std::size_t num_peers = 10;
    std::size_t chunk_count = 20;
    Amount chunk_value = 5;
    Amount deposit = 100;
    Amount collateral = 150;
    std::uint64_t duration = 1000;
    Amount settlement_gas_fee = 1;
    Height confirmation_depth = 6;
    std::uint64_t block_interval = 10;
    std::vector<ChurnEvent> churn;
    std::vector<AdversarySpec> adversaries;
    SettlementPolicy settlement_policy{};
    std::uint64_t random_seed = 1;
    std::size_t chunk_size = 256;
    Amount channel_capacity = 0;
    bool live_top_up = false;
    bool withdraw_at_expiry = false;

    bool operator==(const ScenarioConfig&) const = default;

    /// Every violated constraint, one "field: reason" entry each.
    std::vector<std::string> diagnostics() const;
    /// Throws Error(InvalidConfig) listing all diagnostics.
    void validate() const;
    /// Total value the viewer side will buy when everyone is honest.
    Amount honest_spend() const;
    Amount effective_channel_capacity() const
    {
        return channel_capacity != 0 ? channel_capacity : chunk_value * chunk_count;
    }
};

/// Throws Error(ParseError) naming the line and field, including for
/// configurations that parse but fail validation.
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string format_scenario(const ScenarioConfig& cfg);
void save_scenario(const ScenarioConfig& cfg, const std::filesystem::path& path);

} // namespace mpool::sim
