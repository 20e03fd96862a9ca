#pragma once

// Shared fixtures for the test binaries, plus a settlement model written
// directly from the pool rules. The model tracks cumulative totals rather
// than a remaining deposit, so it does not share arithmetic with the ledger.

#include "mpool/ledger.hpp"
#include "mpool/protocol.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mpool::test {

inline KeyPair actor(const std::string& name, std::uint64_t salt = 0)
{
    return keygen(seed_from(name, salt));
}

/// A creator with a funded account and a set of payees with empty accounts.
struct PoolWorld {
    Amount fee = 1;
    Height depth = 6;
    KeyPair creator = actor("creator");
    std::vector<KeyPair> payees;
    Ledger ledger;
    Digest32 cptx;

    PoolWorld(std::size_t n_payees, Amount creator_funds, Amount fee_ = 1)
        : fee(fee_), payees(make_payees(n_payees)), ledger(config(fee_), genesis(creator_funds))
    {
    }

    static LedgerConfig config(Amount fee) { return LedgerConfig{fee, 6}; }

    std::vector<KeyPair> make_payees(std::size_t n) const
    {
        std::vector<KeyPair> out;
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(actor("payee", i));
        return out;
    }

    Ledger::Genesis genesis(Amount creator_funds) const
    {
        Ledger::Genesis g{{creator.address, creator_funds}};
        for (const auto& p : payees)
            g.emplace_back(p.address, 0);
        return g;
    }

    Receipt create_pool(Amount deposit, Amount collateral, std::uint64_t duration = 1000,
                        Digest32 resource = hash(as_bytes("resource")))
    {
        auto tx = make_tx(creator, CreatePool{resource, deposit, collateral, duration},
                          ledger.next_nonce(creator.address));
        auto r = ledger.submit_and_commit(tx);
        cptx = r.tx_hash;
        return r;
    }

    ServicePayment pay(std::size_t payee, Amount cumulative, std::uint64_t seq) const
    {
        return sign_service_payment(creator.secret_key, payees[payee].address, cumulative, cptx, seq);
    }

    Digest32 submit_settlement(std::size_t payee, const ServicePayment& sp)
    {
        return ledger.submit(make_tx(payees[payee], Settlement{sp}, ledger.next_nonce(payees[payee].address)));
    }

    Receipt settle(std::size_t payee, Amount cumulative, std::uint64_t seq)
    {
        auto h = submit_settlement(payee, pay(payee, cumulative, seq));
        ledger.commit_block();
        return *ledger.receipt(h);
    }
};

/// Independent model of the settlement rule for one pool. A settlement is
/// a double spend exactly when the payee totals it would bring about exceed
/// the deposit.
class SettlementModel {
public:
    struct Step {
        std::size_t target;
        Amount cumulative;
        std::uint64_t seq;
    };
    enum class Result { Paid, Slashed, Rejected };

    SettlementModel(Amount deposit, Amount collateral, Amount fee)
        : deposit_(deposit), collateral_(collateral), fee_(fee)
    {
    }

    Result apply(const Step& s)
    {
        auto& t = targets_[s.target];
        if (s.seq != t.seq || slashed_)
            return Result::Rejected;
        if (s.cumulative <= t.paid_total)
            return Result::Rejected;
        Amount claim = s.cumulative - t.paid_total;
        if (claim <= fee_)
            return Result::Rejected;

        Amount everyone = 0;
        for (const auto& [_, other] : targets_)
            everyone += other.paid_total;
        t.seq += 1;
        if (everyone + claim > deposit_) {
            Amount left = deposit_ - everyone;
            Amount payout = left > fee_ ? left - fee_ : 0;
            t.balance += payout;
            burned_ += left - payout + collateral_;
            t.paid_total += left;
            slashed_ = true;
            return Result::Slashed;
        }
        t.paid_total += claim;
        t.balance += claim - fee_;
        burned_ += fee_;
        return Result::Paid;
    }

    bool slashed() const { return slashed_; }
    Amount balance(std::size_t target) const
    {
        auto it = targets_.find(target);
        return it == targets_.end() ? 0 : it->second.balance;
    }
    Amount burned() const { return burned_; }

private:
    struct Target {
        Amount paid_total = 0;
        std::uint64_t seq = 0;
        Amount balance = 0;
    };
    Amount deposit_;
    Amount collateral_;
    Amount fee_;
    bool slashed_ = false;
    Amount burned_ = 0;
    std::map<std::size_t, Target> targets_;
};

} // namespace mpool::test
