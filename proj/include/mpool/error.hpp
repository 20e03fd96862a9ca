#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpool {

enum class ErrorCode {
    // crypto
    EmptyTree,
    IndexOutOfRange,
    // encoding
    DecodeError,
    // ledger admission
    InvalidSignature,
    UnknownAccount,
    DuplicateTx,
    // pools
    InsufficientBalance,
    CollateralTooSmall,
    ZeroDuration,
    PoolNotFound,
    PoolNotActive,
    TimelockExpired,
    TimelockNotExpired,
    WrongSubmitter,
    StaleSequence,
    NonPositiveIncrement,
    UneconomicalSettlement,
    NotCreator,
    TxNotCommitted,
    // channels
    ChannelNotFound,
    ChannelNotOpen,
    BalancesDontSum,
    StaleCommitment,
    NonMonotonePayment,
    // payer / peers
    DepositExhausted,
    DepositTooSmall,
    NotHandshaked,
    AlreadyReceived,
    Blacklisted,
    // semi-trust
    TooFewPeers,
    NonMonotoneAmount,
    BadReceiptSignature,
    UnauthorizedPair,
    StaleReceipt,
    CertExpired,
    // harness
    InvalidConfig,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    explicit Error(ErrorCode code) : Error(code, std::string(to_string(code))) {}
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace mpool
