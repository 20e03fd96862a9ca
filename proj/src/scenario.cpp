#include "mpool/scenario.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mpool::sim {

std::string_view to_string(Mode m) noexcept
{
    switch (m) {
    case Mode::Pool: return "pool";
    case Mode::Channel: return "channel";
    case Mode::SemiTrust: return "semi_trust";
    }
    return "unknown";
}

Amount ScenarioConfig::honest_spend() const
{
    auto per_viewer = chunk_value * chunk_count;
    return mode == Mode::SemiTrust ? per_viewer * num_peers : per_viewer;
}

std::vector<std::string> ScenarioConfig::diagnostics() const
{
    std::vector<std::string> out;
    if (num_peers < 1)
        out.emplace_back("num_peers: must be at least 1");
    if (chunk_count < 1)
        out.emplace_back("chunk_count: must be at least 1");
    if (chunk_value < 1)
        out.emplace_back("chunk_value: must be positive");
    if (collateral <= deposit)
        out.push_back("collateral: must exceed deposit (" + std::to_string(collateral) +
                      " <= " + std::to_string(deposit) +
                      "), otherwise a double spend is not a guaranteed loss");
    if (adversaries.empty() && !live_top_up && deposit < honest_spend())
        out.push_back("deposit: must cover the resource value " + std::to_string(honest_spend()));
    if (duration < 1)
        out.emplace_back("duration: must be at least 1 block");
    if (confirmation_depth < 1)
        out.emplace_back("confirmation_depth: must be at least 1");
    if (block_interval < 1)
        out.emplace_back("block_interval: must be at least 1 tick");
    if (chunk_size < 1)
        out.emplace_back("chunk_size: must be at least 1 byte");
    for (const auto& c : churn)
        if (c.from >= num_peers || c.to >= num_peers)
            out.push_back("churn: peer index out of range at tick " + std::to_string(c.tick));
    for (const auto& a : adversaries)
        if (a.peer >= num_peers)
            out.push_back("adversaries: peer index " + std::to_string(a.peer) + " out of range");
    return out;
}

void ScenarioConfig::validate() const
{
    auto diags = diagnostics();
    if (diags.empty())
        return;
    std::string msg = "invalid scenario:";
    for (const auto& d : diags)
        msg += "\n  " + d;
    throw Error(ErrorCode::InvalidConfig, msg);
}

namespace {

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos)
            pos = s.size();
        auto item = trim(s.substr(start, pos - start));
        if (!item.empty())
            out.push_back(item);
        start = pos + 1;
    }
    return out;
}

std::uint64_t to_u64(const std::string& s)
{
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument("expected a non-negative integer, got '" + s + "'");
    return v;
}

bool to_bool(const std::string& s)
{
    if (s == "true" || s == "1")
        return true;
    if (s == "false" || s == "0")
        return false;
    throw std::invalid_argument("expected true or false, got '" + s + "'");
}

Mode to_mode(const std::string& s)
{
    if (s == "pool")
        return Mode::Pool;
    if (s == "channel")
        return Mode::Channel;
    if (s == "semi_trust")
        return Mode::SemiTrust;
    throw std::invalid_argument("unknown mode '" + s + "'");
}

CacherBehavior to_behavior(const std::string& s)
{
    if (s == "honest")
        return CacherBehavior::Honest;
    if (s == "withholding")
        return CacherBehavior::Withholding;
    if (s == "colluding")
        return CacherBehavior::ColludingEdward;
    throw std::invalid_argument("unknown behavior '" + s + "'");
}

std::vector<ChurnEvent> to_churn(const std::string& s)
{
    std::vector<ChurnEvent> out;
    for (const auto& item : split(s, ',')) {
        auto colon = item.find(':');
        auto arrow = item.find('>');
        if (colon == std::string::npos || arrow == std::string::npos || arrow < colon)
            throw std::invalid_argument("churn entries look like tick:from>to, got '" + item + "'");
        out.push_back({to_u64(trim(item.substr(0, colon))),
                       to_u64(trim(item.substr(colon + 1, arrow - colon - 1))),
                       to_u64(trim(item.substr(arrow + 1)))});
    }
    return out;
}

std::vector<AdversarySpec> to_adversaries(const std::string& s)
{
    std::vector<AdversarySpec> out;
    for (const auto& item : split(s, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("adversary entries look like peer:behavior, got '" + item + "'");
        out.push_back({to_u64(trim(item.substr(0, colon))), to_behavior(trim(item.substr(colon + 1)))});
    }
    return out;
}

} // namespace

ScenarioConfig parse_scenario(std::istream& in)
{
    ScenarioConfig cfg;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto hash_pos = raw.find('#');
        auto line = trim(std::string_view(raw).substr(0, hash_pos));
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": expected 'key = value'");
        auto key = trim(std::string_view(line).substr(0, eq));
        auto value = trim(std::string_view(line).substr(eq + 1));
        try {
            if (key == "mode")
                cfg.mode = to_mode(value);
            else if (key == "num_peers")
                cfg.num_peers = to_u64(value);
            else if (key == "chunk_count")
                cfg.chunk_count = to_u64(value);
            else if (key == "chunk_value")
                cfg.chunk_value = to_u64(value);
            else if (key == "deposit")
                cfg.deposit = to_u64(value);
            else if (key == "collateral")
                cfg.collateral = to_u64(value);
            else if (key == "duration")
                cfg.duration = to_u64(value);
            else if (key == "settlement_gas_fee")
                cfg.settlement_gas_fee = to_u64(value);
            else if (key == "confirmation_depth")
                cfg.confirmation_depth = to_u64(value);
            else if (key == "block_interval")
                cfg.block_interval = to_u64(value);
            else if (key == "churn")
                cfg.churn = to_churn(value);
            else if (key == "adversaries")
                cfg.adversaries = to_adversaries(value);
            else if (key == "settlement_policy")
                cfg.settlement_policy = SettlementPolicy::parse(value);
            else if (key == "random_seed")
                cfg.random_seed = to_u64(value);
            else if (key == "chunk_size")
                cfg.chunk_size = to_u64(value);
            else if (key == "channel_capacity")
                cfg.channel_capacity = to_u64(value);
            else if (key == "live_top_up")
                cfg.live_top_up = to_bool(value);
            else if (key == "withdraw_at_expiry")
                cfg.withdraw_at_expiry = to_bool(value);
            else
                throw std::invalid_argument("unknown key");
        } catch (const std::exception& e) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", field '" +
                                                   key + "': " + e.what());
        }
    }

    auto diags = cfg.diagnostics();
    if (!diags.empty()) {
        std::string msg = "invalid scenario:";
        for (const auto& d : diags)
            msg += "\n  field " + d;
        throw Error(ErrorCode::ParseError, msg);
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    return parse_scenario(in);
}

std::string format_scenario(const ScenarioConfig& cfg)
{
    std::ostringstream out;
    out << "mode = " << to_string(cfg.mode) << '\n'
        << "num_peers = " << cfg.num_peers << '\n'
        << "chunk_count = " << cfg.chunk_count << '\n'
        << "chunk_value = " << cfg.chunk_value << '\n'
        << "deposit = " << cfg.deposit << '\n'
        << "collateral = " << cfg.collateral << '\n'
        << "duration = " << cfg.duration << '\n'
        << "settlement_gas_fee = " << cfg.settlement_gas_fee << '\n'
        << "confirmation_depth = " << cfg.confirmation_depth << '\n'
        << "block_interval = " << cfg.block_interval << '\n';
    out << "churn =";
    for (std::size_t i = 0; i < cfg.churn.size(); ++i)
        out << (i ? ", " : " ") << cfg.churn[i].tick << ':' << cfg.churn[i].from << '>'
            << cfg.churn[i].to;
    out << '\n' << "adversaries =";
    for (std::size_t i = 0; i < cfg.adversaries.size(); ++i)
        out << (i ? ", " : " ") << cfg.adversaries[i].peer << ':'
            << to_string(cfg.adversaries[i].behavior);
    out << '\n'
        << "settlement_policy = " << cfg.settlement_policy.to_string() << '\n'
        << "random_seed = " << cfg.random_seed << '\n'
        << "chunk_size = " << cfg.chunk_size << '\n'
        << "channel_capacity = " << cfg.channel_capacity << '\n'
        << "live_top_up = " << (cfg.live_top_up ? "true" : "false") << '\n'
        << "withdraw_at_expiry = " << (cfg.withdraw_at_expiry ? "true" : "false") << '\n';
    return out.str();
}

void save_scenario(const ScenarioConfig& cfg, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << format_scenario(cfg);
    if (!out)
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

} // namespace mpool::sim
