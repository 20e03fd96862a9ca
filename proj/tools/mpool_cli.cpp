// Command-line front end for the simulator.
//
//   mpool run <scenario> [--seed N] [--out path] [--format json|csv]
//   mpool compare <scenario> [--seed N] [--out path] [--format json|csv]
//   mpool attack collusion|withholding <scenario> [--seed N] [--out path] [--format json|csv]
//     (theorem1 and theorem2 are accepted as aliases)
//   mpool check <scenario>
//   mpool manifest <scenario>
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid scenario or usage.

#include "mpool/sim.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace mpool;
using namespace mpool::sim;

namespace {

struct CommonArgs {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonArgs& args)
{
    cmd->add_option("scenario", args.scenario, "scenario file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "override random_seed");
    cmd->add_option("--out", args.out, "write the report here instead of stdout");
    cmd->add_option("--format", args.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
}

ScenarioConfig load(const CommonArgs& args)
{
    auto cfg = load_scenario(args.scenario);
    if (args.seed)
        cfg.random_seed = *args.seed;
    return cfg;
}

void emit(const CommonArgs& args, const std::string& text)
{
    if (args.out.empty())
        std::cout << text;
    else
        write_report(text, args.out);
}

template <typename Report>
std::string render(const CommonArgs& args, const Report& r)
{
    return args.format == "csv" ? to_csv(r) : to_json(r);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Micropayment pool simulator"};
    app.require_subcommand(1);

    CommonArgs run_args;
    auto* run = app.add_subcommand("run", "run one scenario and print its metrics");
    add_common(run, run_args);

    CommonArgs compare_args;
    auto* compare = app.add_subcommand("compare", "run a scenario in pool and channel mode");
    add_common(compare, compare_args);

    CommonArgs attack_args;
    std::string attack_kind;
    auto* attack = app.add_subcommand("attack", "run a scripted adversarial scenario");
    attack->add_option("kind", attack_kind, "collusion (theorem1) or withholding (theorem2)")
        ->required()
        ->check(CLI::IsMember({"collusion", "withholding", "theorem1", "theorem2"}));
    add_common(attack, attack_args);

    std::string check_path;
    auto* check = app.add_subcommand("check", "validate a scenario file");
    check->add_option("scenario", check_path, "scenario file")->required()->check(CLI::ExistingFile);

    std::string manifest_path;
    auto* manifest = app.add_subcommand("manifest", "print the chunk manifest of a scenario");
    manifest->add_option("scenario", manifest_path, "scenario file")
        ->required()
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        auto code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            emit(run_args, render(run_args, run_scenario(load(run_args))));
        } else if (*compare) {
            emit(compare_args, render(compare_args, compare_modes(load(compare_args))));
        } else if (*attack) {
            auto cfg = load(attack_args);
            bool collusion = attack_kind == "collusion" || attack_kind == "theorem1";
            auto report = collusion ? run_collusion_attack(cfg) : run_withholding_attack(cfg);
            emit(attack_args, render(attack_args, report));
        } else if (*check) {
            auto cfg = load_scenario(check_path);
            std::cout << format_scenario(cfg);
        } else if (*manifest) {
            auto cfg = load_scenario(manifest_path);
            ChunkSource source(cfg.random_seed, cfg.chunk_size, cfg.chunk_count);
            write_manifest(std::cout, source.manifest(cfg.chunk_value));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::InvalidConfig)
            return 2;
        return 1;
    }
    return 0;
}
