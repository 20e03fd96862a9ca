#pragma once

// Deterministic discrete-event simulation of one viewer streaming from a set
// of cachers (pool and channel modes), or one sharer serving several viewers
// through a platform-funded pool (semi_trust mode).
//
// Time is counted in integer ticks. A block is committed every
// block_interval ticks, each viewer issues at most one chunk request per
// tick, and a funding transaction becomes usable confirmation_depth blocks
// after the block that included it.

#include "mpool/scenario.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mpool::sim {

struct SwitchEvent {
    /// Ticks since the session started streaming.
    std::uint64_t tick = 0;
    std::size_t from = 0;
    std::size_t to = 0;
    /// Blocks the viewer waited before the first paid chunk from `to`.
    std::uint64_t latency_blocks = 0;
    /// On-chain transactions the switch itself emitted.
    std::uint64_t onchain_txs = 0;
    bool cold = false;
    /// False if the viewer moved on before `to` was paid for a chunk; the
    /// latency then only covers the time until it left.
    bool served = false;
    bool operator==(const SwitchEvent&) const = default;
};

struct MetricsReport {
    Mode mode = Mode::Pool;
    std::uint64_t seed = 0;
    std::uint64_t ticks = 0;
    std::uint64_t blocks = 0;

    std::uint64_t onchain_tx_total = 0;
    std::map<std::string, std::uint64_t> onchain_by_type;
    std::uint64_t rejected_txs = 0;

    std::vector<SwitchEvent> switch_events;
    std::uint64_t stalled_ticks = 0;
    std::uint64_t setup_ticks = 0;

    /// Value of chunks bought from peers + creator balance change + what the
    /// creator can still reclaim from an active pool.
    std::int64_t creator_net_value = 0;
    std::int64_t colluder_net_value = 0;
    std::map<std::string, std::int64_t> per_peer_earnings;
    std::uint64_t settlements = 0;
    std::uint64_t slash_events = 0;
    std::string pool_status;

    std::uint64_t payments_issued = 0;
    std::uint64_t chunks_delivered = 0;
    std::uint64_t chunks_paid_undelivered = 0;
    std::uint64_t chunks_from_cdn = 0;
    Amount viewer_loss = 0;
    std::uint64_t blacklisted = 0;
    bool complete = false;

    std::uint64_t conservation_checks = 0;
    std::uint64_t conservation_violations = 0;

    bool operator==(const MetricsReport&) const = default;
};

struct ComparisonReport {
    MetricsReport pool;
    MetricsReport channel;
    /// channel tx count over pool tx count, kept as an exact fraction.
    std::uint64_t tx_ratio_num = 0;
    std::uint64_t tx_ratio_den = 0;
    double tx_ratio = 0.0;
    std::vector<std::uint64_t> pool_switch_latencies;
    std::vector<std::uint64_t> channel_switch_latencies;
};

/// Throws Error(InvalidConfig) if the config fails validation.
MetricsReport run_scenario(const ScenarioConfig& config);
/// Runs the config in pool and channel mode with identical seeds.
ComparisonReport compare_modes(const ScenarioConfig& config);

/// The creator pays a colluding peer the whole deposit, gets it back, then
/// streams the resource from honest peers, whose settlements expose the
/// double spend. chunk_count is derived as deposit / chunk_value.
MetricsReport run_collusion_attack(const ScenarioConfig& config);
/// The first k peers take payment and withhold chunks (k from the config's
/// adversaries, else min(3, n-1)); the deposit is raised to cover the extra
/// k payments.
MetricsReport run_withholding_attack(const ScenarioConfig& config);
ScenarioConfig withholding_attack_config(const ScenarioConfig& config);

enum class ReportFormat { Json, Csv };

std::string to_json(const MetricsReport& r);
std::string to_json(const ComparisonReport& r);
/// Fixed header, see kCsvHeader.
std::string to_csv(const MetricsReport& r);
std::string to_csv(const ComparisonReport& r);
extern const char* const kCsvHeader;

void write_report(const std::string& text, const std::filesystem::path& path);

} // namespace mpool::sim
