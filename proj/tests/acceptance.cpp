// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nakasim/experiments.hpp"
#include "nakasim/lottery.hpp"
#include "nakasim/pivots.hpp"
#include "nakasim/security_calc.hpp"
#include "nakasim/simulation.hpp"
#include "nakasim/stats.hpp"

using namespace nakasim;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...)
{
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

Bits bernoulli_bits(std::mt19937_64& rng, std::size_t n, double p)
{
    std::bernoulli_distribution coin(p);
    Bits b(n);
    for (auto& x : b)
        x = coin(rng) ? 1 : 0;
    return b;
}

// 1. p_good against lottery samples
Outcome c1_p_good()
{
    auto start = std::chrono::steady_clock::now();
    struct Pt {
        double beta, rho;
        std::int64_t nu;
    };
    const Pt pts[] = {{0.25, 0.1, 4}, {0.0, 0.05, 0}, {0.1, 0.2, 2}, {0.3, 0.02, 10}, {0.05, 0.5, 1}};
    const Slot n = 1000000;
    bool ok = true;
    double worst = 0.0;
    for (const auto& pt : pts) {
        SimParams p;
        p.n_nodes = 20;
        p.beta = pt.beta;
        p.rho = pt.rho;
        p.nu = pt.nu;
        p.seed = 11;
        Lottery lot(p);
        std::vector<std::uint8_t> h1(static_cast<std::size_t>(n + pt.nu)), empty(h1.size());
        for (Slot s = 0; s < n + pt.nu; ++s) {
            SlotOutcome o = lot.sample_slot(s);
            h1[s] = o.h_count == 1 && o.a_count == 0;
            empty[s] = o.h_count + o.a_count == 0;
        }
        std::uint64_t nonempty = 0, good = 0;
        std::int64_t run = 0;  // empty slots following s
        std::vector<std::int64_t> after(h1.size());
        for (auto s = static_cast<std::int64_t>(h1.size()) - 1; s >= 0; --s) {
            after[s] = run;
            run = empty[s] ? run + 1 : 0;
        }
        for (Slot s = 0; s < n; ++s) {
            if (empty[s])
                continue;
            ++nonempty;
            if (h1[s] && after[s] >= pt.nu)
                ++good;
        }
        double f = static_cast<double>(good) / nonempty;
        double want = p_good(pt.beta, pt.rho, pt.nu);
        double se = std::sqrt(want * (1.0 - want) / nonempty);
        double z = std::fabs(f - want) / se;
        worst = std::max(worst, z);
        if (z > 3.0)
            ok = false;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {ok && secs < 30.0, fmt("worst |z| = %.2f over 5 points, %.1f s", worst, secs)};
}

// 2. PP frequency on truncated walks
Outcome c2_pp_frequency()
{
    std::mt19937_64 rng(2024);
    bool ok = true;
    std::string d;
    for (double p : {0.6, 0.75, 0.9}) {
        std::uint64_t hits = 0, samples = 0;
        for (int w = 0; w < 20; ++w) {
            Bits g = bernoulli_bits(rng, 10000, p);
            Bits pp = pp_set_walk(g);
            for (std::size_t k = 2500; k < 7500; ++k) {
                hits += pp[k];
                ++samples;
            }
        }
        double f = static_cast<double>(hits) / samples;
        if (f < p_pp(p) - 0.01)
            ok = false;
        d += fmt("p=%.2f: %.4f vs %.4f; ", p, f, p_pp(p));
    }
    return {ok, d};
}

// 3. exhaustive oracles
Outcome c3_exhaustive()
{
    std::uint64_t bad_eq = 0, bad_sub = 0, bad_margin = 0, bad_notcp = 0;
    {
        const std::size_t n = 14;
        for (std::uint32_t m = 0; m < (1u << n); ++m) {
            Bits g(n);
            for (std::size_t i = 0; i < n; ++i)
                g[i] = (m >> i) & 1;
            Bits fast = pp_set_walk(g);
            for (std::size_t k = 0; k < n; ++k)
                if (is_pp_interval(k, g) != is_pp_walk(k, g) || (fast[k] != 0) != is_pp_interval(k, g))
                    ++bad_eq;
        }
    }
    // (G, D) pairs with D <= G: each index is 0 (neither), 1 (G only) or 2 (both)
    auto pairs = [](std::size_t n, const std::function<void(const Bits&, const Bits&)>& fn) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < n; ++i)
            total *= 3;
        Bits g(n), d(n);
        for (std::size_t m = 0; m < total; ++m) {
            std::size_t x = m;
            for (std::size_t i = 0; i < n; ++i, x /= 3) {
                g[i] = x % 3 != 0;
                d[i] = x % 3 == 2;
            }
            fn(g, d);
        }
    };
    for (std::size_t n = 1; n <= 10; ++n)
        pairs(n, [&](const Bits& g, const Bits& d) {
            Bits pp = pp_set_interval(g), cp = cp_set(d);
            for (std::size_t k = 0; k < g.size(); ++k)
                if (cp[k] && !pp[k])
                    ++bad_sub;
        });
    for (std::size_t n = 1; n <= 12; ++n) {
        for (std::uint32_t m = 0; m < (1u << n); ++m) {
            Bits g(n);
            for (std::size_t i = 0; i < n; ++i)
                g[i] = (m >> i) & 1;
            Bits pp = pp_set_interval(g);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j <= n; ++j)
                    if (!margin_check(g, pp, i, j))
                        ++bad_margin;
        }
        pairs(n, [&](const Bits& g, const Bits& d) {
            for (std::size_t i = 0; i < g.size(); ++i)
                for (std::size_t j = i + 1; j <= g.size(); ++j)
                    if (!not_cp_interval_check(g, d, i, j))
                        ++bad_notcp;
        });
    }
    bool ok = bad_eq + bad_sub + bad_margin + bad_notcp == 0;
    return {ok, fmt("counterexamples: equivalence %llu, CP subset %llu, margin %llu, not-CP %llu",
                    (unsigned long long)bad_eq, (unsigned long long)bad_sub, (unsigned long long)bad_margin,
                    (unsigned long long)bad_notcp)};
}

// 4. tail bounds against sampled frequencies
Outcome c4_tail_bounds()
{
    std::mt19937_64 rng(99);
    bool ok = true;
    std::string d;
    struct XPt {
        double eps, delta;
        int n;
    };
    for (const XPt& pt : {XPt{0.1, 0.5, 200}, XPt{0.2, 0.5, 100}, XPt{0.25, 0.8, 50}}) {
        const std::uint64_t samples = 100000;
        std::bernoulli_distribution coin(0.5 + pt.eps);
        double cut = (1.0 - pt.delta) * 2.0 * pt.eps * pt.n;
        std::uint64_t hits = 0;
        for (std::uint64_t s = 0; s < samples; ++s) {
            int x = 0;
            for (int i = 0; i < pt.n; ++i)
                x += coin(rng) ? 1 : -1;
            if (x <= cut)
                ++hits;
        }
        double bound = hoeffding_tail_x(pt.eps, pt.delta, pt.n);
        if (!binomial_within_bound(hits, samples, bound))
            ok = false;
        d += fmt("X(eps=%.2f): %.4f <= %.4f; ", pt.eps, double(hits) / samples, bound);
    }
    const std::size_t horizon = 4000;
    for (double p : {0.85, 0.9, 0.95}) {
        const double delta = 0.9;
        auto k = choose_kcp(p, delta, horizon, 0.2);
        if (!k || static_cast<std::size_t>(k->k_cp) > horizon) {
            ok = false;
            d += fmt("P(p=%.2f): no window fits; ", p);
            continue;
        }
        auto w = static_cast<std::size_t>(k->k_cp);
        std::size_t lo = (horizon - w) / 2;
        double cut = (1.0 - delta) * p_pp(p) * static_cast<double>(w);
        const std::uint64_t samples = 10000;
        std::uint64_t hits = 0;
        for (std::uint64_t s = 0; s < samples; ++s) {
            Bits pp = pp_set_walk(bernoulli_bits(rng, horizon, p));
            std::size_t count = 0;
            for (std::size_t i = lo; i < lo + w; ++i)
                count += pp[i];
            if (count <= cut)
                ++hits;
        }
        double bound = std::min(1.0, k->bound);
        if (!binomial_within_bound(hits, samples, bound))
            ok = false;
        d += fmt("P(p=%.2f, window %zu): %.4f <= %.4f; ", p, w, double(hits) / samples, bound);
    }
    return {ok, d};
}

ScenarioConfig secure_config(AttackKind attack, double beta, double rho, std::int64_t slots, std::uint64_t seed)
{
    ScenarioConfig c;
    SimParams& p = c.params;
    p.n_nodes = 10;
    p.tau = 1.0;
    p.capacity = 1.0;
    p.delta_h = 0.0;
    p.nu = 29;
    p.c_tilde = 30.0;
    p.beta = beta;
    p.rho = rho;
    p.horizon_slots = slots;
    p.seed = seed;
    c.attack.strategy = attack;
    c.record_trace = true;
    c.record_deliveries = false;
    return c;
}

// 5. invariant audits on simulated traces, plus doctored controls
Outcome c5_invariants()
{
    // 100 secure-region runs, then 10 congested teaser runs that give the
    // budget audit indices to check
    const int secure_runs = 100, runs = 110;
    const AttackKind kinds[] = {AttackKind::None, AttackKind::Private, AttackKind::Teaser};
    std::vector<std::string> failures(runs);
    std::vector<std::uint64_t> budget_checked(runs);
    parallel_for(runs, [&](std::size_t i) {
        double beta = i % 2 ? 0.1 : 0.05;
        double rho = (i / 2) % 2 ? 0.002 : 0.001;
        ScenarioConfig c = secure_config(kinds[i % 3], beta, rho, 500000, 100 + i);
        if (i >= secure_runs) {
            SimParams& p = c.params;
            p.tau = 0.1;
            p.rho = 0.07;
            p.beta = 1.0 / 7.0;
            p.c_tilde = 2.0;
            p.nu = 0;
            p.link_analysis_params();
            p.horizon_slots = 200000;
            c.attack.strategy = AttackKind::Teaser;
        }
        Trace t;
        RunMetrics m = run_scenario(c, &t);
        PivotReport r = analyze_trace(t, c.params.nu, c.params.c_tilde, 200);
        std::string f;
        for (const auto& a : r.audits) {
            if (a.name == "budget")
                budget_checked[i] = a.checked;
            if (a.verdict != Verdict::Pass)
                f += a.name + " ";
        }
        if (m.p2_violations)
            f += "P2 ";
        failures[i] = f;
    });
    int bad = 0;
    std::string first;
    std::uint64_t budget_total = 0;
    for (int i = 0; i < runs; ++i) {
        budget_total += budget_checked[i];
        if (!failures[i].empty()) {
            ++bad;
            if (first.empty())
                first = fmt("run %d: %s", i, failures[i].c_str());
        }
    }

    // negative controls on one attack-free trace
    Trace t;
    run_scenario(secure_config(AttackKind::None, 0.05, 0.002, 300000, 7), &t);
    const std::int64_t nu = t.info.params.nu;
    const double ct = t.info.params.c_tilde;
    auto verdict_of = [&](const Trace& x, const std::string& audit) {
        for (const auto& a : analyze_trace(x, nu, ct, 200).audits)
            if (a.name == audit)
                return a.verdict;
        return Verdict::Pass;
    };
    struct Control {
        const char* name;
        Trace trace;
        const char* audit;
    };
    std::vector<Control> controls = {
        {"abandon", doctor_abandon(t, 0), "stabilization"},
        {"double-fetch", doctor_double_fetch(t, 0), "p1"},
        {"burst", doctor_burst(t, 0, 3), "capacity"},
        {"stall", doctor_stall(t, 0), "chain_growth"},
        {"skip-parent", doctor_skip_parent(t, 0), "prefix"},
        {"idle-window", doctor_idle_window(t, 0, nu), "budget"},
    };
    int caught = 0;
    std::string missed;
    for (const auto& c : controls) {
        if (verdict_of(c.trace, c.audit) == Verdict::Fail)
            ++caught;
        else
            missed += std::string(c.name) + " ";
    }
    bool ok = bad == 0 && caught == static_cast<int>(controls.size());
    std::string d = fmt("%d/%d runs clean (%d secure, %d congested teaser; budget audit checked %llu indices), "
                        "%d/%zu doctored traces caught",
                        runs - bad, runs, secure_runs, runs - secure_runs, (unsigned long long)budget_total, caught,
                        controls.size());
    if (!first.empty())
        d += "; first failure " + first;
    if (!missed.empty())
        d += "; missed " + missed;
    return {ok, d};
}

// 6. teaser against private attack
Outcome c6_teaser_vs_private()
{
    const std::vector<double> caps = {2.0, 1.0, 0.5};  // x = 1/C ascending
    std::vector<double> x, fp, ft;
    bool strict = true;
    std::string d;
    for (double c : caps) {
        GrowthSetup s;
        s.lambda_hon = 1.0;
        s.lambda_adv = 1.0;
        s.capacity = c;
        s.n_nodes = 20;
        s.attack = AttackKind::Private;
        GrowthPoint p = measure_growth(s, 10);
        s.attack = AttackKind::Teaser;
        GrowthPoint t = measure_growth(s, 10);
        if (!(t.ci.hi < p.ci.lo))
            strict = false;
        x.push_back(1.0 / c);
        fp.push_back(p.ci.mean);
        ft.push_back(t.ci.mean);
        d += fmt("C=%.1f private %.3f [%.3f,%.3f] teaser %.3f [%.3f,%.3f]; ", c, p.ci.mean, p.ci.lo, p.ci.hi,
                 t.ci.mean, t.ci.lo, t.ci.hi);
    }
    // secure lambda/C at the adversary share where growth/lambda_hon = target
    double lo = std::max(fp.back(), ft.back()), hi = std::min(fp.front(), ft.front());
    double target = 0.5 * (lo + hi);
    double xp = crossing(x, fp, target), xt = crossing(x, ft, target);
    double ratio = xt > 0 && xp > 0 ? xp / xt : 0.0;
    d += fmt("secure-rate ratio %.2f at growth %.3f", ratio, target);
    return {strict && ratio >= 1.5 && ratio <= 2.5, d};
}

// 7. partition with Greedy and LongestHeaderChain
Outcome c7_partition()
{
    struct Case {
        PolicyKind policy;
        double capacity;
    };
    const Case cases[] = {{PolicyKind::Greedy, 0.3}, {PolicyKind::Greedy, 1.0}, {PolicyKind::LongestHeaderChain, 1.0}};
    const int seeds = 3;
    std::vector<RunMetrics> out(3 * seeds);
    parallel_for(out.size(), [&](std::size_t i) {
        GrowthSetup s;
        s.n_nodes = 100;
        s.lambda_hon = 1.0;
        s.capacity = cases[i / seeds].capacity;
        s.policy.kind = cases[i / seeds].policy;
        s.seconds = 4000.0;
        s.warmup = 0.0;
        s.attack = AttackKind::Partition;
        ScenarioConfig c = growth_config(s, 1 + i % seeds);
        c.attack.partition_duration = 15.0;
        out[i] = run_scenario(c);
    });
    bool ok = true;
    std::uint32_t greedy_low = 0;
    double worst_ratio = 1.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const RunMetrics& m = out[i];
        if (i < seeds) {
            greedy_low = std::max(greedy_low, m.agreed_height);
            if (m.agreed_height >= 5)
                ok = false;
        } else {
            double r = m.tip_height ? double(m.agreed_height) / m.tip_height : 0.0;
            worst_ratio = std::min(worst_ratio, r);
            if (r < 0.8)
                ok = false;
        }
    }
    return {ok, fmt("Greedy C=0.3 max agreed height %u; C=1.0 worst agreed/tip %.3f", greedy_low, worst_ratio)};
}

// 8. PoS teaser, SaPoS and the PoW teaser at matched parameters
Outcome c8_pos_teaser()
{
    struct Case {
        AttackKind attack;
        Protocol protocol;
    };
    const Case cases[] = {{AttackKind::None, Protocol::PoS},
                          {AttackKind::PosTeaser, Protocol::PoS},
                          {AttackKind::PosTeaser, Protocol::SaPoS},
                          {AttackKind::Teaser, Protocol::PoW}};
    const int seeds = 3;
    std::vector<RunMetrics> out(4 * seeds);
    parallel_for(out.size(), [&](std::size_t i) {
        GrowthSetup s;
        s.n_nodes = 50;
        s.lambda_hon = 1.0;
        s.lambda_adv = 0.2;
        s.capacity = 1.0;
        s.seconds = 4000.0;
        s.warmup = 1000.0;
        s.attack = cases[i / seeds].attack;
        s.protocol = cases[i / seeds].protocol;
        out[i] = run_scenario(growth_config(s, 1 + i % seeds));
    });
    double g[4] = {0, 0, 0, 0};
    std::uint64_t sapos_bad = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        g[i / seeds] += out[i].growth_rate / seeds;
        if (i / seeds == 2)
            sapos_bad += out[i].blank_mismatches + out[i].honest_blanked + out[i].missing_content;
    }
    bool pos_ok = g[1] < 0.1 * g[0];
    double rel = std::fabs(g[2] - g[3]) / g[3];
    bool ok = pos_ok && rel <= 0.2 && sapos_bad == 0;
    return {ok, fmt("no attack %.3f, PoS teaser %.4f (%.3f of no attack), SaPoS %.3f vs PoW teaser %.3f (%.1f%% apart), "
                    "SaPoS audit violations %llu",
                    g[0], g[1], g[1] / g[0], g[2], g[3], 100.0 * rel, (unsigned long long)sapos_bad)};
}

// 9. security region
Outcome c9_region()
{
    RatePoint opt = max_rate(0.0, 1.0, 0.0);
    RatePoint grid = max_rate_grid(0.0, 1.0, 0.0, 0.001);
    double diff = std::fabs(opt.lambda_max - grid.lambda_max);
    std::vector<double> betas;
    for (int i = 0; i <= 9; ++i)
        betas.push_back(0.05 * i);
    auto rows = region_curve(betas, 1.0, 0.0);
    bool mono = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].lambda_max < rows[i - 1].lambda_max) || !rows[i].secure)
            mono = false;
    bool half_insecure = !region_curve({0.5}, 1.0, 0.0)[0].secure;
    double worst = 0.0;
    for (double c : {1.0, 10.0, 36.5, 100.0, 1000.0}) {
        double arg = 2.0 * c / (c + 4.0 + std::sqrt(8.0 * c + 16.0));
        double p = cp_boundary_p(c);
        worst = std::max(worst, std::fabs(1.0 / p - arg));
        worst = std::max(worst, std::fabs(p_pp(p) - 16.0 / c));
    }
    bool ok = diff <= 1e-4 && mono && half_insecure && worst <= 1e-9;
    return {ok, fmt("max_rate %.7f at C~=%.2f, grid %.7f (diff %.1e); monotone %s; beta=0.5 insecure %s; boundary err %.1e",
                    opt.lambda_max, opt.c_tilde, grid.lambda_max, diff, mono ? "yes" : "no",
                    half_insecure ? "yes" : "no", worst)};
}

// 10. CP recurrence in secure runs and its collapse under a winning teaser
Outcome c10_cp_recurrence()
{
    const double beta = 0.05, rho = 0.001, delta = 0.9;
    const std::int64_t slots = 15000000;
    const double horizon = slots * -std::expm1(-rho);
    auto k = choose_kcp(p_good(beta, rho, 29), delta, horizon, 0.01);
    if (!k)
        return {false, "no K_cp for the secure parameters"};
    const std::int64_t k_cp = k->k_cp;

    auto run = [&](double b, std::int64_t n, int seeds, std::uint64_t first) {
        std::vector<CpRecurrence> rec(static_cast<std::size_t>(seeds));
        parallel_for(rec.size(), [&](std::size_t i) {
            ScenarioConfig c = secure_config(AttackKind::Teaser, b, rho, n, first + i);
            Trace t;
            run_scenario(c, &t);
            rec[i] = analyze_trace(t, c.params.nu, c.params.c_tilde, k_cp).recurrence;
        });
        std::uint64_t w = 0, p = 0;
        for (const auto& r : rec) {
            w += r.sliding_windows;
            p += r.sliding_pass;
        }
        return std::make_pair(w ? double(p) / w : 0.0, w);
    };
    auto secure = run(beta, slots, 100, 1000);
    auto attacked = run(0.55, 10000000, 10, 5000);
    bool ok = secure.second > 0 && secure.first >= 0.99 && attacked.second > 0 && attacked.first < 0.5;
    return {ok, fmt("K_cp %lld: secure %.4f of %llu windows, teaser at beta=0.55 %.4f of %llu windows",
                    (long long)k_cp, secure.first, (unsigned long long)secure.second, attacked.first,
                    (unsigned long long)attacked.second)};
}

}  // namespace

// Optional arguments pick criteria by number.
int main(int argc, char** argv)
{
    std::vector<int> only;
    for (int a = 1; a < argc; ++a)
        only.push_back(std::atoi(argv[a]));
    struct Criterion {
        const char* name;
        Outcome (*fn)();
    };
    const Criterion all[] = {
        {"p_good formula vs lottery", c1_p_good},
        {"PP frequency on truncated walks", c2_pp_frequency},
        {"exhaustive pivot oracles", c3_exhaustive},
        {"tail bounds vs sampled frequency", c4_tail_bounds},
        {"trace invariant audits", c5_invariants},
        {"teaser vs private growth", c6_teaser_vs_private},
        {"greedy partition", c7_partition},
        {"PoS teaser vs SaPoS", c8_pos_teaser},
        {"security region", c9_region},
        {"CP recurrence", c10_cp_recurrence},
    };
    int failed = 0, i = 0;
    for (const auto& c : all) {
        ++i;
        if (!only.empty() && std::find(only.begin(), only.end(), i) == only.end())
            continue;
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass)
            ++failed;
        std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed;
}
