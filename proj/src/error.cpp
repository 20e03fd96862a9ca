#include "mpool/error.hpp"

namespace mpool {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::EmptyTree: return "EmptyTree";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::InvalidSignature: return "InvalidSignature";
    case ErrorCode::UnknownAccount: return "UnknownAccount";
    case ErrorCode::DuplicateTx: return "DuplicateTx";
    case ErrorCode::InsufficientBalance: return "InsufficientBalance";
    case ErrorCode::CollateralTooSmall: return "CollateralTooSmall";
    case ErrorCode::ZeroDuration: return "ZeroDuration";
    case ErrorCode::PoolNotFound: return "PoolNotFound";
    case ErrorCode::PoolNotActive: return "PoolNotActive";
    case ErrorCode::TimelockExpired: return "TimelockExpired";
    case ErrorCode::TimelockNotExpired: return "TimelockNotExpired";
    case ErrorCode::WrongSubmitter: return "WrongSubmitter";
    case ErrorCode::StaleSequence: return "StaleSequence";
    case ErrorCode::NonPositiveIncrement: return "NonPositiveIncrement";
    case ErrorCode::UneconomicalSettlement: return "UneconomicalSettlement";
    case ErrorCode::NotCreator: return "NotCreator";
    case ErrorCode::TxNotCommitted: return "TxNotCommitted";
    case ErrorCode::ChannelNotFound: return "ChannelNotFound";
    case ErrorCode::ChannelNotOpen: return "ChannelNotOpen";
    case ErrorCode::BalancesDontSum: return "BalancesDontSum";
    case ErrorCode::StaleCommitment: return "StaleCommitment";
    case ErrorCode::NonMonotonePayment: return "NonMonotonePayment";
    case ErrorCode::DepositExhausted: return "DepositExhausted";
    case ErrorCode::DepositTooSmall: return "DepositTooSmall";
    case ErrorCode::NotHandshaked: return "NotHandshaked";
    case ErrorCode::AlreadyReceived: return "AlreadyReceived";
    case ErrorCode::Blacklisted: return "Blacklisted";
    case ErrorCode::TooFewPeers: return "TooFewPeers";
    case ErrorCode::NonMonotoneAmount: return "NonMonotoneAmount";
    case ErrorCode::BadReceiptSignature: return "BadReceiptSignature";
    case ErrorCode::UnauthorizedPair: return "UnauthorizedPair";
    case ErrorCode::StaleReceipt: return "StaleReceipt";
    case ErrorCode::CertExpired: return "CertExpired";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace mpool
