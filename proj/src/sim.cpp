#include "mpool/sim.hpp"

#include "mpool/channel.hpp"
#include "mpool/semi_trust.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mpool::sim {

namespace {

std::string peer_label(std::size_t i)
{
    return "peer" + std::to_string(i);
}

std::int64_t signed_delta(Amount now, Amount before)
{
    return static_cast<std::int64_t>(now) - static_cast<std::int64_t>(before);
}

/// Session length guard: far more ticks than any honest run needs.
std::uint64_t tick_budget(const ScenarioConfig& cfg)
{
    auto per_round = cfg.chunk_count * (cfg.num_peers + 2) + 2 * cfg.confirmation_depth + 4;
    return per_round * cfg.block_interval * (cfg.num_peers + 2) + 10'000;
}

void tally_receipts(const Ledger& ledger, MetricsReport& r)
{
    for (const auto& block : ledger.blocks())
        for (const auto& receipt : block.receipts) {
            if (!receipt.ok()) {
                ++r.rejected_txs;
                continue;
            }
            if (!receipt.settlement)
                continue;
            if (receipt.settlement->kind == SettlementOutcome::Kind::SlashTriggered)
                ++r.slash_events;
            else
                ++r.settlements;
        }
    for (const auto& [kind, count] : ledger.tx_counts())
        r.onchain_by_type[std::string(to_string(kind))] = count;
    r.onchain_tx_total = ledger.total_txs();
    r.blocks = ledger.height();
}

// ---- pool and channel modes -------------------------------------------------

class StreamEngine {
public:
    StreamEngine(const ScenarioConfig& cfg, bool collusion);
    StreamEngine(const StreamEngine&) = delete;
    StreamEngine& operator=(const StreamEngine&) = delete;

    MetricsReport run();

private:
    struct PendingSwitch {
        SwitchEvent event;
        Height switch_height = 0;
    };

    Ledger::Genesis genesis() const;
    Amount channel_capacity() const { return cfg_.effective_channel_capacity(); }
    bool pool_mode() const { return cfg_.mode == Mode::Pool; }

    void commit_block();
    bool funding_ready();
    void step();
    void apply_churn();
    std::optional<std::size_t> next_peer_after(std::size_t from) const;
    void switch_to(std::optional<std::size_t> next);
    bool handshake(std::size_t p);
    bool ensure_channel(std::size_t p);
    void finalize_switch(bool served = false);
    void fetch_from_cdn();
    ChunkExchangeOutcome exchange_pool(std::size_t p, std::size_t index);
    ChunkExchangeOutcome exchange_channel(std::size_t p, std::size_t index);
    void settle(CacherNode& cacher);
    void finish_session();
    void close_ready_channels();
    bool channels_settled() const;
    void drain();
    void withdraw();
    void advance_to_next_block();
    MetricsReport report();

    ScenarioConfig cfg_;
    bool collusion_;
    ChunkSource source_;
    ChunkManifest manifest_;
    KeyPair viewer_keys_;
    std::vector<KeyPair> peer_keys_;
    std::optional<KeyPair> edward_keys_;
    Ledger ledger_;
    ViewerNode viewer_;
    std::vector<CacherNode> cachers_;
    std::optional<CacherNode> edward_;
    std::vector<std::optional<ChannelState>> channels_;
    std::map<Address, Amount> initial_balance_;

    Digest32 cptx_;
    bool ready_ = false;
    bool initial_wait_ = true;
    std::optional<std::size_t> current_;
    std::size_t served_by_current_ = 0;
    std::optional<PendingSwitch> pending_;
    std::uint64_t tick_ = 0;
    std::uint64_t session_start_ = 0;
    MetricsReport metrics_;
};

StreamEngine::StreamEngine(const ScenarioConfig& cfg, bool collusion)
    : cfg_(cfg),
      collusion_(collusion),
      source_(cfg.random_seed, cfg.chunk_size, cfg.chunk_count),
      manifest_(source_.manifest(cfg.chunk_value)),
      viewer_keys_(keygen(seed_from("viewer", cfg.random_seed))),
      peer_keys_([&] {
          std::vector<KeyPair> keys;
          for (std::size_t i = 0; i < cfg.num_peers; ++i)
              keys.push_back(keygen(seed_from(peer_label(i), cfg.random_seed)));
          return keys;
      }()),
      edward_keys_(collusion ? std::optional<KeyPair>(keygen(seed_from("edward", cfg.random_seed)))
                             : std::nullopt),
      ledger_(LedgerConfig{cfg.settlement_gas_fee, cfg.confirmation_depth}, genesis()),
      viewer_(viewer_keys_, manifest_, cfg.deposit,
              collusion ? PayerMode::Adversarial : PayerMode::Honest),
      channels_(cfg.num_peers)
{
    std::set<std::size_t> inventory;
    for (std::size_t i = 0; i < cfg_.chunk_count; ++i)
        inventory.insert(i);
    for (std::size_t i = 0; i < cfg_.num_peers; ++i) {
        auto behavior = CacherBehavior::Honest;
        for (const auto& a : cfg_.adversaries)
            if (a.peer == i)
                behavior = a.behavior;
        cachers_.emplace_back(peer_keys_[i], &source_, manifest_, inventory, behavior);
    }
    if (edward_keys_)
        edward_.emplace(*edward_keys_, &source_, manifest_, std::set<std::size_t>{},
                        CacherBehavior::ColludingEdward);
    for (const auto& [addr, amount] : genesis())
        initial_balance_[addr] = amount;
    current_ = 0;
    metrics_.mode = cfg_.mode;
    metrics_.seed = cfg_.random_seed;
}

Ledger::Genesis StreamEngine::genesis() const
{
    Amount viewer_funds = cfg_.deposit + cfg_.collateral;
    if (cfg_.mode == Mode::Channel)
        viewer_funds += cfg_.num_peers * cfg_.effective_channel_capacity();
    Ledger::Genesis g{{viewer_keys_.address, viewer_funds}};
    for (const auto& k : peer_keys_)
        g.emplace_back(k.address, 0);
    // The colluder only needs enough to pay for its own settlement.
    if (edward_keys_)
        g.emplace_back(edward_keys_->address, cfg_.settlement_gas_fee);
    return g;
}

void StreamEngine::commit_block()
{
    ledger_.commit_block();
    ++metrics_.conservation_checks;
    if (!ledger_.audit().balanced())
        ++metrics_.conservation_violations;
}

bool StreamEngine::funding_ready()
{
    if (!pool_mode())
        return true;
    const auto* r = ledger_.receipt(cptx_);
    if (r == nullptr || !r->ok() || ledger_.height() < r->height + cfg_.confirmation_depth)
        return false;
    if (collusion_) {
        // The whole deposit goes to the colluder and comes straight back.
        collude_full_drain(ledger_, viewer_, *edward_, cfg_.deposit);
    }
    return true;
}

MetricsReport StreamEngine::run()
{
    if (pool_mode()) {
        CreatePool terms{manifest_.resource_id, cfg_.deposit, cfg_.collateral, cfg_.duration};
        cptx_ = ledger_.submit(
            make_tx(viewer_keys_, terms, ledger_.next_nonce(viewer_keys_.address)));
        viewer_.attach_pool(cptx_);
    }

    auto budget = tick_budget(cfg_);
    for (; tick_ < budget && !viewer_.complete(); ++tick_) {
        if (tick_ > 0 && tick_ % cfg_.block_interval == 0)
            commit_block();
        if (!ready_) {
            ready_ = funding_ready();
            if (!ready_) {
                ++metrics_.setup_ticks;
                continue;
            }
        }
        step();
    }
    // The loop stops before processing tick_, so its block may still be due.
    if (tick_ > 0 && tick_ % cfg_.block_interval == 0)
        commit_block();

    finish_session();
    drain();
    if (cfg_.withdraw_at_expiry && pool_mode())
        withdraw();
    return report();
}

void StreamEngine::apply_churn()
{
    for (const auto& ev : cfg_.churn) {
        if (ev.tick != tick_ - session_start_ || !current_ || *current_ != ev.from || ev.from == ev.to)
            continue;
        if (viewer_.is_blacklisted(cachers_[ev.to].id()))
            continue;
        switch_to(ev.to);
    }
}

std::optional<std::size_t> StreamEngine::next_peer_after(std::size_t from) const
{
    for (std::size_t i = 1; i <= cachers_.size(); ++i) {
        auto c = (from + i) % cachers_.size();
        if (!viewer_.is_blacklisted(cachers_[c].id()))
            return c;
    }
    return std::nullopt;
}

void StreamEngine::switch_to(std::optional<std::size_t> next)
{
    if (!next) {
        finalize_switch();
        current_.reset();
        return;
    }
    if (current_ && *next == *current_) {
        served_by_current_ = 0;
        return;
    }
    finalize_switch();

    SwitchEvent ev;
    ev.tick = tick_ - session_start_;
    ev.from = current_.value_or(*next);
    ev.to = *next;
    if (!pool_mode()) {
        auto& ch = channels_[*next];
        if (!ch) {
            ch = open_channel(ledger_, viewer_keys_, peer_keys_[*next].public_key,
                              channel_capacity());
            ev.onchain_txs = 1;
        }
        refresh(*ch, ledger_);
        ev.cold = ch->phase != ChannelPhase::Open;
    }
    pending_ = PendingSwitch{ev, ledger_.height()};
    current_ = next;
    served_by_current_ = 0;
}

void StreamEngine::finalize_switch(bool served)
{
    if (!pending_)
        return;
    auto ev = pending_->event;
    ev.served = served;
    // A cold switch waits for the open tx to be buried; measure from its
    // inclusion so the block-production delay before it is not counted.
    Height ref = pending_->switch_height;
    if (ev.cold) {
        const auto& ch = channels_[ev.to];
        if (ch && ch->open_height)
            ref = std::max(ref, *ch->open_height);
    }
    ev.latency_blocks = ledger_.height() - std::min(ref, ledger_.height());
    metrics_.switch_events.push_back(ev);
    pending_.reset();
}

bool StreamEngine::handshake(std::size_t p)
{
    auto& cacher = cachers_[p];
    if (cacher.handshaked_with(viewer_keys_.address))
        return true;
    try {
        switch_peer(viewer_, cacher, ledger_);
        return true;
    } catch (const Error&) {
        return false;
    }
}

bool StreamEngine::ensure_channel(std::size_t p)
{
    auto& ch = channels_[p];
    if (!ch)
        ch = open_channel(ledger_, viewer_keys_, peer_keys_[p].public_key, channel_capacity());
    refresh(*ch, ledger_);
    return ch->phase == ChannelPhase::Open;
}

void StreamEngine::fetch_from_cdn()
{
    viewer_.mark_received(viewer_.cursor());
    ++metrics_.chunks_from_cdn;
}

void StreamEngine::step()
{
    if (initial_wait_ && current_) {
        // Churn and rotation count from the first tick the initial peer can serve.
        if (!pool_mode() && !ensure_channel(*current_)) {
            ++metrics_.setup_ticks;
            return;
        }
        initial_wait_ = false;
        session_start_ = tick_;
    }
    apply_churn();
    if (cfg_.churn.empty() && current_) {
        auto quota = (cfg_.chunk_count + cfg_.num_peers - 1) / cfg_.num_peers;
        if (served_by_current_ >= quota)
            switch_to(next_peer_after(*current_));
    }
    if (!current_) {
        fetch_from_cdn();
        return;
    }

    auto p = *current_;
    if (pool_mode()) {
        if (!handshake(p)) {
            switch_to(next_peer_after(p));
            return;
        }
    } else if (!ensure_channel(p)) {
        ++metrics_.stalled_ticks;
        return;
    }

    auto index = viewer_.cursor();
    if (!cachers_[p].holds(index)) {
        fetch_from_cdn();
        return;
    }
    auto outcome = pool_mode() ? exchange_pool(p, index) : exchange_channel(p, index);
    switch (outcome) {
    case ChunkExchangeOutcome::Delivered:
        ++metrics_.chunks_delivered;
        ++served_by_current_;
        if (pool_mode() && cachers_[p].wants_to_settle(viewer_keys_.address, cfg_.settlement_policy,
                                                       cfg_.settlement_gas_fee))
            settle(cachers_[p]);
        break;
    case ChunkExchangeOutcome::PaidButUndelivered:
        ++metrics_.chunks_paid_undelivered;
        viewer_.on_undelivered(cachers_[p].id());
        switch_to(next_peer_after(p));
        break;
    case ChunkExchangeOutcome::PaymentRejected:
        switch_to(next_peer_after(p));
        break;
    }
}

ChunkExchangeOutcome StreamEngine::exchange_pool(std::size_t p, std::size_t index)
{
    try {
        auto outcome = request_chunk(viewer_, cachers_[p], index);
        if (outcome != ChunkExchangeOutcome::PaymentRejected)
            finalize_switch(true);
        return outcome;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DepositExhausted)
            throw;
        fetch_from_cdn();
        return ChunkExchangeOutcome::Delivered;
    }
}

ChunkExchangeOutcome StreamEngine::exchange_channel(std::size_t p, std::size_t index)
{
    auto& ch = *channels_[p];
    if (ch.funder_balance < cfg_.chunk_value) {
        fetch_from_cdn();
        return ChunkExchangeOutcome::Delivered;
    }
    auto c = propose_payment(ch, cfg_.chunk_value, viewer_keys_, peer_keys_[p]);
    update_commitment(ch, c, viewer_keys_.public_key, peer_keys_[p].public_key);
    viewer_.count_payment();
    finalize_switch(true);

    auto chunk = cachers_[p].serve(index);
    if (chunk && verify_chunk(manifest_, index, *chunk)) {
        viewer_.mark_received(index);
        return ChunkExchangeOutcome::Delivered;
    }
    viewer_.record_loss(cachers_[p].id(), cfg_.chunk_value);
    return ChunkExchangeOutcome::PaidButUndelivered;
}

void StreamEngine::settle(CacherNode& cacher)
{
    cacher.settle(ledger_, viewer_keys_.address);
    viewer_.view().note_settlement(cacher.id());
}

void StreamEngine::finish_session()
{
    finalize_switch();
    if (!pool_mode())
        return;
    for (auto& cacher : cachers_)
        if (cacher.has_claim(viewer_keys_.address, cfg_.settlement_gas_fee))
            settle(cacher);
}

void StreamEngine::close_ready_channels()
{
    for (std::size_t p = 0; p < channels_.size(); ++p) {
        auto& ch = channels_[p];
        if (!ch || ch->phase == ChannelPhase::Closed)
            continue;
        refresh(*ch, ledger_);
        if (ch->phase != ChannelPhase::Open)
            continue;
        // The payee closes when it has something worth claiming; otherwise
        // the funder reclaims its balance.
        if (ch->counterparty_balance > cfg_.settlement_gas_fee) {
            close_channel(ledger_, *ch, peer_keys_[p]);
        } else {
            auto c = ch->latest ? *ch->latest : initial_commitment(*ch, viewer_keys_, peer_keys_[p]);
            close_channel(ledger_, *ch, viewer_keys_, c);
        }
    }
}

bool StreamEngine::channels_settled() const
{
    return std::all_of(channels_.begin(), channels_.end(), [](const auto& ch) {
        return !ch || ch->phase == ChannelPhase::Closed;
    });
}

void StreamEngine::drain()
{
    auto budget = tick_ + tick_budget(cfg_);
    while (tick_ < budget) {
        if (!pool_mode())
            close_ready_channels();
        if (ledger_.mempool_size() == 0 && channels_settled())
            break;
        ++tick_;
        if (tick_ % cfg_.block_interval == 0)
            commit_block();
    }
}

void StreamEngine::advance_to_next_block()
{
    tick_ += cfg_.block_interval - tick_ % cfg_.block_interval;
    commit_block();
}

void StreamEngine::withdraw()
{
    const auto* pool = ledger_.pool(cptx_);
    if (pool == nullptr || pool->status != PoolStatus::Active)
        return;
    while (ledger_.height() + 1 < pool->expiry_height())
        advance_to_next_block();
    ledger_.submit(make_tx(viewer_keys_, WithdrawExpiredPool{cptx_},
                           ledger_.next_nonce(viewer_keys_.address)));
    advance_to_next_block();
}

MetricsReport StreamEngine::report()
{
    auto& r = metrics_;
    r.ticks = tick_;
    tally_receipts(ledger_, r);

    Amount refundable = 0;
    if (pool_mode()) {
        const auto* pool = ledger_.pool(cptx_);
        r.pool_status = pool ? std::string(to_string(pool->status)) : "none";
        if (pool && pool->status == PoolStatus::Active)
            refundable = pool->remaining_deposit + pool->collateral;
    } else {
        r.pool_status = "none";
        for (const auto& ch : channels_)
            if (ch && ch->phase != ChannelPhase::Closed && ch->open_height)
                refundable += ch->funder_balance;
    }

    auto delta = [&](const Address& a) {
        return signed_delta(ledger_.balance(a), initial_balance_.at(a));
    };
    r.creator_net_value = static_cast<std::int64_t>(r.chunks_delivered * cfg_.chunk_value) +
                          delta(viewer_keys_.address) + static_cast<std::int64_t>(refundable);
    if (edward_keys_) {
        r.colluder_net_value = delta(edward_keys_->address);
        r.per_peer_earnings["edward"] = r.colluder_net_value;
    }
    for (std::size_t i = 0; i < peer_keys_.size(); ++i)
        r.per_peer_earnings[peer_label(i)] = delta(peer_keys_[i].address);

    r.payments_issued = viewer_.payments_issued();
    r.viewer_loss = viewer_.undelivered_loss();
    r.blacklisted = viewer_.blacklist().size();
    r.complete = viewer_.complete();
    return r;
}

// ---- semi-trust mode ----------------------------------------------------------

MetricsReport run_semi_trust(const ScenarioConfig& cfg)
{
    ChunkSource source(cfg.random_seed, cfg.chunk_size, cfg.chunk_count);
    auto manifest = source.manifest(cfg.chunk_value);
    auto platform = keygen(seed_from("platform", cfg.random_seed));
    auto tracker = keygen(seed_from("tracker", cfg.random_seed));
    auto sharer = keygen(seed_from("sharer", cfg.random_seed));
    std::vector<KeyPair> viewers;
    for (std::size_t i = 0; i < cfg.num_peers; ++i)
        viewers.push_back(keygen(seed_from("viewer" + std::to_string(i), cfg.random_seed)));

    // Live streams fund top-ups from a reserve covering the whole session.
    Amount platform_funds = cfg.deposit + cfg.collateral + (cfg.live_top_up ? cfg.honest_spend() : 0);
    Ledger::Genesis genesis{{platform.address, platform_funds}, {sharer.address, 0}};
    for (const auto& v : viewers)
        genesis.emplace_back(v.address, 0);
    Ledger ledger(LedgerConfig{cfg.settlement_gas_fee, cfg.confirmation_depth}, genesis);

    MetricsReport r;
    r.mode = Mode::SemiTrust;
    r.seed = cfg.random_seed;
    auto commit = [&] {
        ledger.commit_block();
        ++r.conservation_checks;
        if (!ledger.audit().balanced())
            ++r.conservation_violations;
    };

    CreatePool terms{manifest.resource_id, cfg.deposit, cfg.collateral, cfg.duration};
    auto cptx = platform_create_pool(ledger, platform, terms, cfg.honest_spend(), !cfg.live_top_up);
    PaymentService service(platform, tracker.public_key, manifest.resource_id);
    service.attach_pool(cptx);

    std::vector<Address> group{sharer.address};
    for (const auto& v : viewers)
        group.push_back(v.address);
    std::vector<Address> sharers{sharer.address};
    auto certs = tracker_group_peers(tracker, group, sharers, 0, std::numeric_limits<Height>::max());
    auto cert_for = [&](const Address& receiver) -> std::optional<AuthCertificate> {
        for (const auto& c : certs)
            if (c.receiver == receiver)
                return c;
        return std::nullopt;
    };

    std::vector<ReceiptBook> books(viewers.size());
    std::vector<std::size_t> received(viewers.size(), 0);
    std::optional<Digest32> pending_settlement;
    std::optional<Digest32> pending_top_up;
    Amount submitted = 0;
    const auto fee = cfg.settlement_gas_fee;
    const auto& policy = cfg.settlement_policy;

    auto owed = [&] { return service.transfer_amount(sharer.address) - submitted; };
    auto settle = [&] {
        auto ap = service.statement(sharer.address, ledger);
        pending_settlement = settle_accumulated(ledger, ap, platform.public_key, sharer);
        submitted = ap.transfer_amount;
    };
    auto on_block = [&] {
        commit();
        if (pending_settlement && ledger.is_committed(*pending_settlement))
            pending_settlement.reset();
        if (pending_top_up && ledger.is_committed(*pending_top_up))
            pending_top_up.reset();
        if (cfg.live_top_up && !pending_top_up && !pending_settlement)
            pending_top_up = service.top_up_if_needed(ledger, cfg.deposit);
    };
    auto all_done = [&] {
        return std::all_of(received.begin(), received.end(),
                           [&](std::size_t n) { return n >= cfg.chunk_count; });
    };

    std::uint64_t tick = 0;
    bool ready = false;
    auto budget = tick_budget(cfg);
    for (; tick < budget && !all_done(); ++tick) {
        if (tick > 0 && tick % cfg.block_interval == 0)
            on_block();
        if (!ready) {
            const auto* rc = ledger.receipt(cptx);
            ready = rc && rc->ok() && ledger.height() >= rc->height + cfg.confirmation_depth;
            if (!ready) {
                ++r.setup_ticks;
                continue;
            }
        }
        for (std::size_t v = 0; v < viewers.size(); ++v) {
            auto index = received[v];
            if (index >= cfg.chunk_count)
                continue;
            if (!verify_chunk(manifest, index, source.chunk(index)))
                continue;
            auto receipt = books[v].sign(viewers[v], sharer.address, manifest.resource_id,
                                         (index + 1) * cfg.chunk_value);
            service.submit_receipt(receipt, cert_for(viewers[v].address), ledger);
            ++received[v];
            ++r.chunks_delivered;
            ++r.payments_issued;
        }
        bool due = policy.kind == SettlementPolicy::Kind::EveryChunk ||
                   (policy.kind == SettlementPolicy::Kind::Lazy && owed() >= policy.threshold);
        if (due && !pending_settlement && owed() > fee)
            settle();
    }
    if (tick > 0 && tick % cfg.block_interval == 0)
        on_block();

    auto drain_budget = tick + budget;
    while (tick < drain_budget) {
        if (!pending_settlement && owed() > fee)
            settle();
        if (ledger.mempool_size() == 0 && !pending_settlement)
            break;
        ++tick;
        if (tick % cfg.block_interval == 0)
            on_block();
    }
    if (cfg.withdraw_at_expiry) {
        const auto* pool = ledger.pool(cptx);
        if (pool && pool->status == PoolStatus::Active) {
            auto next_block = [&] {
                tick += cfg.block_interval - tick % cfg.block_interval;
                commit();
            };
            while (ledger.height() + 1 < pool->expiry_height())
                next_block();
            ledger.submit(make_tx(platform, WithdrawExpiredPool{cptx},
                                  ledger.next_nonce(platform.address)));
            next_block();
        }
    }

    r.ticks = tick;
    tally_receipts(ledger, r);
    const auto* pool = ledger.pool(cptx);
    r.pool_status = pool ? std::string(to_string(pool->status)) : "none";
    Amount refundable = 0;
    if (pool && pool->status == PoolStatus::Active)
        refundable = pool->remaining_deposit + pool->collateral;
    r.creator_net_value = static_cast<std::int64_t>(r.chunks_delivered * cfg.chunk_value) +
                          signed_delta(ledger.balance(platform.address), platform_funds) +
                          static_cast<std::int64_t>(refundable);
    r.per_peer_earnings["sharer"] = static_cast<std::int64_t>(ledger.balance(sharer.address));
    r.complete = all_done();
    return r;
}

} // namespace

// ---- entry points -------------------------------------------------------------

MetricsReport run_scenario(const ScenarioConfig& config)
{
    config.validate();
    if (config.mode == Mode::SemiTrust)
        return run_semi_trust(config);
    StreamEngine engine(config, false);
    return engine.run();
}

ComparisonReport compare_modes(const ScenarioConfig& config)
{
    auto pool_cfg = config;
    pool_cfg.mode = Mode::Pool;
    auto channel_cfg = config;
    channel_cfg.mode = Mode::Channel;

    ComparisonReport out;
    out.pool = run_scenario(pool_cfg);
    out.channel = run_scenario(channel_cfg);
    out.tx_ratio_num = out.channel.onchain_tx_total;
    out.tx_ratio_den = out.pool.onchain_tx_total;
    out.tx_ratio = out.tx_ratio_den == 0
                       ? 0.0
                       : static_cast<double>(out.tx_ratio_num) / static_cast<double>(out.tx_ratio_den);
    for (const auto& e : out.pool.switch_events)
        out.pool_switch_latencies.push_back(e.latency_blocks);
    for (const auto& e : out.channel.switch_events)
        out.channel_switch_latencies.push_back(e.latency_blocks);
    return out;
}

MetricsReport run_collusion_attack(const ScenarioConfig& config)
{
    auto cfg = config;
    cfg.mode = Mode::Pool;
    cfg.adversaries.clear();
    if (cfg.chunk_value == 0 || cfg.deposit % cfg.chunk_value != 0)
        throw Error(ErrorCode::InvalidConfig,
                    "deposit must be a whole number of chunks for the collusion attack");
    cfg.chunk_count = cfg.deposit / cfg.chunk_value;
    cfg.validate();
    StreamEngine engine(cfg, true);
    return engine.run();
}

ScenarioConfig withholding_attack_config(const ScenarioConfig& config)
{
    auto cfg = config;
    cfg.mode = Mode::Pool;
    std::size_t k = 0;
    for (const auto& a : cfg.adversaries)
        if (a.behavior == CacherBehavior::Withholding)
            ++k;
    if (k == 0) {
        if (cfg.num_peers < 2)
            throw Error(ErrorCode::InvalidConfig, "withholding attack needs at least two peers");
        k = std::min<std::size_t>(3, cfg.num_peers - 1);
        cfg.adversaries.clear();
        for (std::size_t i = 0; i < k; ++i)
            cfg.adversaries.push_back({i, CacherBehavior::Withholding});
    }
    auto needed = (cfg.chunk_count + k) * cfg.chunk_value;
    if (cfg.deposit < needed) {
        auto margin = cfg.collateral > cfg.deposit ? cfg.collateral - cfg.deposit : 1;
        cfg.deposit = needed;
        cfg.collateral = std::max(cfg.collateral, needed + margin);
    }
    return cfg;
}

MetricsReport run_withholding_attack(const ScenarioConfig& config)
{
    return run_scenario(withholding_attack_config(config));
}

// ---- output ---------------------------------------------------------------------

namespace {

using nlohmann::ordered_json;

ordered_json json_of(const MetricsReport& r)
{
    ordered_json j;
    j["mode"] = std::string(to_string(r.mode));
    j["seed"] = r.seed;
    j["ticks"] = r.ticks;
    j["blocks"] = r.blocks;
    j["onchain_tx_total"] = r.onchain_tx_total;
    j["onchain_by_type"] = ordered_json::object();
    for (const auto& [k, v] : r.onchain_by_type)
        j["onchain_by_type"][k] = v;
    j["rejected_txs"] = r.rejected_txs;
    j["switch_events"] = ordered_json::array();
    for (const auto& e : r.switch_events)
        j["switch_events"].push_back({{"tick", e.tick},
                                      {"from", e.from},
                                      {"to", e.to},
                                      {"latency_blocks", e.latency_blocks},
                                      {"onchain_txs", e.onchain_txs},
                                      {"cold", e.cold},
                                      {"served", e.served}});
    j["stalled_ticks"] = r.stalled_ticks;
    j["setup_ticks"] = r.setup_ticks;
    j["creator_net_value"] = r.creator_net_value;
    j["colluder_net_value"] = r.colluder_net_value;
    j["per_peer_earnings"] = ordered_json::object();
    for (const auto& [k, v] : r.per_peer_earnings)
        j["per_peer_earnings"][k] = v;
    j["settlements"] = r.settlements;
    j["slash_events"] = r.slash_events;
    j["pool_status"] = r.pool_status;
    j["payments_issued"] = r.payments_issued;
    j["chunks_delivered"] = r.chunks_delivered;
    j["chunks_paid_undelivered"] = r.chunks_paid_undelivered;
    j["chunks_from_cdn"] = r.chunks_from_cdn;
    j["viewer_loss"] = r.viewer_loss;
    j["blacklisted"] = r.blacklisted;
    j["complete"] = r.complete;
    j["conservation_checks"] = r.conservation_checks;
    j["conservation_violations"] = r.conservation_violations;
    return j;
}

std::uint64_t count_of(const MetricsReport& r, TxKind kind)
{
    auto it = r.onchain_by_type.find(std::string(to_string(kind)));
    return it == r.onchain_by_type.end() ? 0 : it->second;
}

std::string csv_row(const MetricsReport& r)
{
    double mean_latency = 0.0;
    if (!r.switch_events.empty()) {
        auto sum = std::accumulate(r.switch_events.begin(), r.switch_events.end(), std::uint64_t{0},
                                   [](std::uint64_t acc, const SwitchEvent& e) {
                                       return acc + e.latency_blocks;
                                   });
        mean_latency = static_cast<double>(sum) / static_cast<double>(r.switch_events.size());
    }
    char latency[32];
    std::snprintf(latency, sizeof latency, "%.3f", mean_latency);

    std::ostringstream out;
    out << to_string(r.mode) << ',' << r.seed << ',' << r.ticks << ',' << r.blocks << ','
        << r.onchain_tx_total;
    for (auto kind : {TxKind::CreatePool, TxKind::Settlement, TxKind::ChannelOpen,
                      TxKind::ChannelUpdateClose, TxKind::Transfer, TxKind::WithdrawExpiredPool,
                      TxKind::TopUpPool})
        out << ',' << count_of(r, kind);
    out << ',' << r.rejected_txs << ',' << r.switch_events.size() << ',' << latency << ','
        << r.stalled_ticks << ',' << r.setup_ticks << ',' << r.creator_net_value << ','
        << r.colluder_net_value << ',' << r.settlements << ',' << r.slash_events << ','
        << r.pool_status << ',' << r.payments_issued << ',' << r.chunks_delivered << ','
        << r.chunks_paid_undelivered << ',' << r.chunks_from_cdn << ',' << r.viewer_loss << ','
        << r.blacklisted << ',' << (r.complete ? "true" : "false") << ','
        << r.conservation_checks << ',' << r.conservation_violations << '\n';
    return out.str();
}

} // namespace

const char* const kCsvHeader =
    "mode,seed,ticks,blocks,onchain_tx_total,tx_create_pool,tx_settlement,tx_channel_open,"
    "tx_channel_update_close,tx_transfer,tx_withdraw_expired_pool,tx_top_up_pool,rejected_txs,"
    "switch_events,mean_switch_latency_blocks,stalled_ticks,setup_ticks,creator_net_value,"
    "colluder_net_value,settlements,slash_events,pool_status,payments_issued,chunks_delivered,"
    "chunks_paid_undelivered,chunks_from_cdn,viewer_loss,blacklisted,complete,"
    "conservation_checks,conservation_violations";

std::string to_json(const MetricsReport& r)
{
    return json_of(r).dump(2) + "\n";
}

std::string to_json(const ComparisonReport& r)
{
    ordered_json j;
    j["pool"] = json_of(r.pool);
    j["channel"] = json_of(r.channel);
    j["tx_ratio"] = {{"channel", r.tx_ratio_num}, {"pool", r.tx_ratio_den}, {"value", r.tx_ratio}};
    j["pool_switch_latencies"] = r.pool_switch_latencies;
    j["channel_switch_latencies"] = r.channel_switch_latencies;
    return j.dump(2) + "\n";
}

std::string to_csv(const MetricsReport& r)
{
    return std::string(kCsvHeader) + "\n" + csv_row(r);
}

std::string to_csv(const ComparisonReport& r)
{
    return std::string(kCsvHeader) + "\n" + csv_row(r.pool) + csv_row(r.channel);
}

void write_report(const std::string& text, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out)
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

} // namespace mpool::sim
