#include "nakasim/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "nakasim/config.hpp"
#include "nakasim/experiments.hpp"
#include "nakasim/pivots.hpp"
#include "nakasim/security_calc.hpp"

namespace nakasim {

namespace fs = std::filesystem;

std::vector<double> parse_grid(const std::string& spec)
{
    std::vector<double> out;
    auto num = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size())
            throw ConfigError("grid", "bad number '" + s + "' in '" + spec + "'");
        return v;
    };
    if (spec.find(':') != std::string::npos) {
        std::stringstream ss(spec);
        std::string a, step, b;
        std::getline(ss, a, ':');
        std::getline(ss, step, ':');
        std::getline(ss, b, ':');
        double lo = num(a), st = num(step), hi = num(b);
        if (!(st > 0.0) || hi < lo)
            throw ConfigError("grid", "need lo:step:hi with step > 0 and hi >= lo");
        auto n = static_cast<long>(std::floor((hi - lo) / st + 1e-9));
        for (long i = 0; i <= n; ++i)
            out.push_back(std::round((lo + i * st) * 1e12) / 1e12);
        return out;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(num(item));
    if (out.empty())
        throw ConfigError("grid", "empty grid");
    return out;
}

namespace {

void write_atomic(const fs::path& path, const std::string& body)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os)
            throw ConfigError("--out", "cannot write " + tmp.string());
        os << body;
    }
    fs::rename(tmp, path);
}

std::uint64_t audit_failures(const RunMetrics& m)
{
    return m.p2_violations + m.prefix_violations + m.blank_mismatches + m.honest_blanked;
}

int cmd_simulate(const std::string& config, std::int64_t seed, const std::string& out_dir, bool no_trace,
                 std::ostream& out)
{
    ScenarioFile f = load_scenario(config);
    ScenarioConfig cfg = f.cfg;
    if (seed >= 0)
        cfg.params.seed = static_cast<std::uint64_t>(seed);
    if (no_trace)
        cfg.record_trace = false;
    fs::path dir = out_dir.empty() ? (f.out_dir.empty() ? fs::path("out") : fs::path(f.out_dir)) : fs::path(out_dir);
    fs::create_directories(dir);

    std::vector<RunMetrics> metrics(static_cast<std::size_t>(cfg.repeat));
    parallel_for(metrics.size(), [&](std::size_t i) {
        ScenarioConfig c = cfg;
        c.params.seed = cfg.params.seed + i * cfg.seed_stride;
        Trace trace;
        metrics[i] = run_scenario(c, c.record_trace ? &trace : nullptr);
        if (c.record_trace) {
            std::ostringstream os;
            write_trace(os, trace);
            write_atomic(dir / ("trace_seed" + std::to_string(c.params.seed) + ".jsonl"), os.str());
        }
    });

    std::ostringstream csv, util;
    csv << "seed,slots,seconds,blocks,honest_blocks,lmin_end,growth_rate,growth_normalized,tip_height,"
           "agreed_height,mean_utilization,final_lead,max_lead,lead_positive_fraction,teases,restarts,"
           "p2_violations,prefix_violations,confirmed_reorgs,blank_mismatches,honest_blanked,missing_content,"
           "blanked_confirmed\n";
    util << "seed,node,utilization\n";
    std::uint64_t failures = 0;
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        const RunMetrics& m = metrics[i];
        std::uint64_t s = cfg.params.seed + i * cfg.seed_stride;
        csv << s << ',' << m.slots << ',' << m.seconds << ',' << m.blocks << ',' << m.honest_blocks << ','
            << m.lmin_end << ',' << m.growth_rate << ',' << m.growth_normalized << ',' << m.tip_height << ','
            << m.agreed_height << ',' << m.mean_utilization << ',' << m.final_lead << ',' << m.max_lead << ','
            << m.lead_positive_fraction << ',' << m.teases << ',' << m.restarts << ',' << m.p2_violations << ','
            << m.prefix_violations << ',' << m.confirmed_reorgs << ',' << m.blank_mismatches << ','
            << m.honest_blanked << ',' << m.missing_content << ',' << m.blanked_confirmed << '\n';
        for (std::size_t n = 0; n < m.utilization.size(); ++n)
            util << s << ',' << n << ',' << m.utilization[n] << '\n';
        failures += audit_failures(m);
        out << "seed " << s << ": growth " << m.growth_rate << " blocks/s (" << m.growth_normalized
            << " of honest rate), agreed height " << m.agreed_height << '\n';
    }
    write_atomic(dir / "metrics.csv", csv.str());
    write_atomic(dir / "utilization.csv", util.str());
    return failures ? 2 : 0;
}

int cmd_analyze(const std::string& trace_path, std::int64_t nu, double c_tilde, std::int64_t kcp,
                const std::string& out_dir, std::ostream& out)
{
    std::ifstream in(trace_path);
    if (!in)
        throw ConfigError("--trace", "cannot open " + trace_path);
    Trace t = read_trace(in);
    if (nu < 0)
        nu = t.info.params.nu;
    if (c_tilde < 0)
        c_tilde = t.info.params.c_tilde;
    PivotReport r = analyze_trace(t, nu, c_tilde, kcp);
    std::string json = report_to_json(r);
    if (out_dir.empty()) {
        out << json << '\n';
    } else {
        fs::create_directories(out_dir);
        write_atomic(fs::path(out_dir) / "report.json", json + "\n");
        std::ostringstream csv;
        write_index_csv(csv, r);
        write_atomic(fs::path(out_dir) / "indices.csv", csv.str());
        for (const auto& a : r.audits)
            out << a.name << ": " << verdict_name(a.verdict) << (a.witness.empty() ? "" : " (" + a.witness + ")")
                << '\n';
    }
    return r.all_pass() ? 0 : 2;
}

int cmd_region(double capacity, double delta_h, const std::string& grid, bool reference, std::ostream& out)
{
    if (!(capacity > 0.0))
        throw ConfigError("--capacity", "must be positive");
    if (delta_h < 0.0)
        throw ConfigError("--delta-h", "must be non-negative");
    std::vector<double> betas = parse_grid(grid);
    for (double b : betas)
        if (b < 0.0 || b >= 1.0)
            throw ConfigError("--beta-grid", "betas must lie in [0, 1)");
    out << "beta,lambda_max,c_tilde_star,secure,model\n";
    out << std::setprecision(10);
    auto emit = [&](const std::vector<RegionRow>& rows) {
        for (const auto& r : rows)
            out << r.beta << ',' << r.lambda_max << ',' << r.c_tilde << ',' << (r.secure ? "secure" : "insecure")
                << ',' << r.model << '\n';
    };
    emit(region_curve(betas, capacity, delta_h));
    if (reference)
        emit(bounded_delay_reference(betas, capacity));
    return 0;
}

int cmd_frontier(const std::string& attack, const std::string& grid, GrowthSetup s, int seeds, std::ostream& out)
{
    s.attack = parse_attack(attack);
    if (s.attack == AttackKind::PosTeaser && s.protocol == Protocol::PoW)
        s.protocol = Protocol::PoS;
    std::vector<double> caps = parse_grid(grid);
    for (double c : caps)
        if (!(c > 0.0))
            throw ConfigError("--capacity-grid", "capacities must be positive");
    out << "capacity,lambda_grwth,lambda_grwth_lo,lambda_grwth_hi,beta_threshold,attack,spv_rate\n";
    for (const auto& r : attack_frontier(s, caps, seeds))
        out << r.capacity << ',' << r.growth << ',' << r.lo << ',' << r.hi << ',' << r.beta_threshold << ','
            << attack_name(s.attack) << ',' << s.spv_rate << '\n';
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"nakasim: Nakamoto consensus under bounded capacity"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "run a scenario and write traces and metrics");
    std::string config, out_dir;
    std::int64_t seed = -1;
    bool no_trace = false;
    sim->add_option("--config", config, "scenario JSON")->required();
    sim->add_option("--seed", seed, "override the base seed");
    sim->add_option("--out", out_dir, "output directory");
    sim->add_flag("--no-trace", no_trace, "skip trace files");

    auto* ana = app.add_subcommand("analyze", "pivot analysis and audits of a trace");
    std::string trace_path, ana_out;
    std::int64_t nu = -1, kcp = 5;
    double c_tilde = -1.0;
    ana->add_option("--trace", trace_path, "trace JSONL")->required();
    ana->add_option("--nu", nu, "nu in slots (default: from the trace)");
    ana->add_option("--c-tilde", c_tilde, "C-tilde in blocks (default: from the trace)");
    ana->add_option("--kcp", kcp, "K_cp for the recurrence check");
    ana->add_option("--out", ana_out, "write report.json and indices.csv here");

    auto* reg = app.add_subcommand("region", "security region frontier");
    double capacity = 1.0, delta_h = 0.0;
    std::string beta_grid = "0:0.05:0.45";
    bool reference = false;
    reg->add_option("--capacity", capacity, "blocks per second");
    reg->add_option("--delta-h", delta_h, "header delay in seconds");
    reg->add_option("--beta-grid", beta_grid, "lo:step:hi or a,b,c");
    reg->add_flag("--reference", reference, "also emit the bounded-delay reference curve");

    auto* fr = app.add_subcommand("attack-frontier", "honest growth and beta threshold per capacity");
    std::string attack = "Teaser", cap_grid = "0.5,1,2";
    GrowthSetup gs;
    gs.lambda_adv = 1.0;
    int seeds = 10;
    fr->add_option("--attack", attack, "None, Private, Teaser or PosTeaser");
    fr->add_option("--capacity-grid", cap_grid, "lo:step:hi or a,b,c");
    fr->add_option("--lambda-hon", gs.lambda_hon, "honest blocks per second");
    fr->add_option("--lambda-adv", gs.lambda_adv, "adversary blocks per second");
    fr->add_option("--spv-rate", gs.spv_rate, "SPV blocks per second");
    fr->add_option("--nodes", gs.n_nodes, "node count");
    fr->add_option("--tau", gs.tau, "seconds per slot");
    fr->add_option("--seconds", gs.seconds, "run length");
    fr->add_option("--warmup", gs.warmup, "seconds excluded from growth");
    fr->add_option("--seeds", seeds, "seeds per capacity");

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i > 0; --i)
            args.emplace_back(argv[i]);
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return 1;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(config, seed, out_dir, no_trace, out);
        if (ana->parsed())
            return cmd_analyze(trace_path, nu, c_tilde, kcp, ana_out, out);
        if (reg->parsed())
            return cmd_region(capacity, delta_h, beta_grid, reference, out);
        if (fr->parsed())
            return cmd_frontier(attack, cap_grid, gs, seeds, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace nakasim
