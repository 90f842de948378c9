#include <catch2/catch_amalgamated.hpp>

#include <echelon/echelon.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace echelon;
namespace fs = std::filesystem;

/*
    Desk-scale acceptance gate. Every tolerance is pinned here; each criterion
    prints exactly one [PASS]/[FAIL] line with its measured values so the gate
    can be audited from the test log alone.
*/
namespace {

// criterion 1: closed form vs brute force
constexpr double kGridTol = 1e-3;
// criteria 2, 4: Monte-Carlo agreement in standard errors
constexpr double kSigmas = 3.0;
// criterion 3: floating-point slack for "exact" alignment (double rounding)
constexpr double kUlpSlack = 1e-12;
// criterion 5: relative error for the gradient estimator mean
constexpr double kGradRelTol = 0.01;
// criterion 7: desk-scale last-iterate tolerances
constexpr double kCenS1Tol = 0.03;
constexpr double kCenS2Tol = 0.15;
constexpr double kDecS2Tol = 0.2;
constexpr double kDecOmegaTol = 0.05;
// criterion 8: growth-rate gates
constexpr double kExponentMax = 0.65;
constexpr double kReg2RatioMax = 1.8;
// per-criterion wall-clock budgets, seconds
constexpr double kBudget1 = 5.0, kBudget2 = 30.0, kBudget3 = 5.0, kBudget4 = 60.0,
                 kBudget5 = 30.0, kBudget6 = 10.0, kBudget7 = 600.0, kBudget8 = 900.0;

const CostParams kCosts = make_costs(0.3, 0.1, 0.5);
const DemandModel kUniform = make_uniform_demand(1.0, 4.0);

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/*
    Shared desk-scale study: 16 trials per mode at T = 2^17 on the flagship
    scenario, reduced to the per-trial endpoint errors and per-checkpoint mean
    regrets needed by criteria 7 and 8. Traces are discarded trial by trial.
*/
struct DeskStudy {
    std::vector<long> checkpoints;                       // 2^12 .. 2^17
    std::vector<double> cen_reg_mean, dec_reg_mean;      // mean regret per checkpoint
    std::vector<double> cen_s1_err, cen_s2_err;          // final-epoch errors per trial
    std::vector<double> dec_s2_err, dec_omega_err;
    double reg2_quarter_mean = 0.0, reg2_full_mean = 0.0;
    double build_seconds = 0.0;
};

const DeskStudy& desk_study() {
    static const DeskStudy study = [] {
        Stopwatch sw;
        DeskStudy s;
        const long T = 131072;
        const long trials = 16;
        for (long c = 4096; c <= T; c *= 2) s.checkpoints.push_back(c);
        const OptimalLevels opt = optimal_levels(kCosts, kUniform);
        std::vector<RunningStat> cen_reg(s.checkpoints.size()), dec_reg(s.checkpoints.size());
        RunningStat r2q, r2f;
        for (long k = 0; k < trials; ++k) {
            RunParams rp;
            rp.model = kUniform;
            rp.costs = kCosts;
            rp.T = T;
            rp.delta = 1.0 / (static_cast<double>(T) * T);

            rp.seed = derive_seed(1, 0, 0, static_cast<std::uint64_t>(k));
            const RunTrace cen = run_centralized(rp);
            const TrialMetrics mc = trial_metrics(cen, s.checkpoints, opt, false);
            for (std::size_t i = 0; i < s.checkpoints.size(); ++i)
                cen_reg[i].add(mc.regret[i]);
            s.cen_s1_err.push_back(mc.s1_err.back());
            s.cen_s2_err.push_back(mc.s2_err.back());

            rp.seed = derive_seed(1, 0, 1, static_cast<std::uint64_t>(k));
            const RunTrace dec = run_decentralized(rp);
            const TrialMetrics md = trial_metrics(dec, s.checkpoints, opt, true);
            for (std::size_t i = 0; i < s.checkpoints.size(); ++i)
                dec_reg[i].add(md.regret[i]);
            s.dec_s2_err.push_back(md.s2_err.back());
            s.dec_omega_err.push_back(md.omega_err.back());

            const BenchmarkRegrets br = benchmark_agent_regrets(dec, kCosts, kUniform,
                                                                {T / 4, T});
            r2q.add(br.reg2[0]);
            r2f.add(br.reg2[1]);
        }
        for (const auto& st : cen_reg) s.cen_reg_mean.push_back(st.mean);
        for (const auto& st : dec_reg) s.dec_reg_mean.push_back(st.mean);
        s.reg2_quarter_mean = r2q.mean;
        s.reg2_full_mean = r2f.mean;
        s.build_seconds = sw.seconds();
        return s;
    }();
    return study;
}

} // namespace

TEST_CASE("criterion 1: closed-form optimum agrees with brute force", "[acceptance]") {
    Stopwatch sw;
    const OptimalLevels opt = optimal_levels(kCosts, kUniform);
    bool closed = std::abs(opt.s1 - 3.25) <= 1e-9 && std::abs(opt.s2 - 2.5) <= 1e-9
                  && std::abs(opt.omega - 0.1) <= 1e-9 && std::abs(opt.h_star - 0.35) <= 1e-9
                  && std::abs(s_max(kCosts, kUniform) - 3.5) <= 1e-9;

    double best = 1e30, b1 = 0.0, b2 = 0.0;
    for (long i = 0; i <= 3000; ++i) {
        const double s1 = 1.0 + static_cast<double>(i) * 1e-3;
        for (long j = 0; j <= 2500; ++j) {
            const double s2 = 1.0 + static_cast<double>(j) * 1e-3;
            const double v = h_expected(kCosts, kUniform, s1, s2);
            if (v < best) {
                best = v;
                b1 = s1;
                b2 = s2;
            }
        }
    }
    const double d1 = std::abs(b1 - 3.25), d2 = std::abs(b2 - 2.5);
    const double el = sw.seconds();
    const bool ok = closed && d1 <= kGridTol + 1e-12 && d2 <= kGridTol + 1e-12
                    && std::abs(best - 0.35) <= 1e-4 && el < kBudget1;
    report(1, ok,
           fmt("grid argmin (%.4f, %.4f) vs closed form (3.25, 2.5), |ds1|=%.2e |ds2|=%.2e "
               "(tol %.0e), omega*=%.6f H*=%.6f, %.2fs",
               b1, b2, d1, d2, kGridTol, opt.omega, opt.h_star, el));
    CHECK(ok);
}

TEST_CASE("criterion 2: stationary surrogate is unbiased for the expected cost",
          "[acceptance]") {
    Stopwatch sw;
    const std::vector<DemandModel> models = {
        kUniform, make_truncated_gaussian_demand(1.0, 4.0, 3.0, 1.0),
        make_truncated_exponential_demand(1.0, 4.0, 1.0 / 3.0)};
    const long N = 1000000;
    bool ok = true;
    double worst_z = 0.0;
    RngStream rng(21);
    for (const auto& m : models) {
        for (int p = 0; p < 5; ++p) {
            const double s1 = 1.5 + 2.5 * rng.uniform01();
            const double s2 = 0.5 + 2.9 * rng.uniform01();
            RngStream draws = rng.substream(static_cast<std::uint64_t>(100 + p));
            RunningStat st;
            for (long i = 0; i < N; ++i) {
                const double d_prev = sample(m, draws);
                const double d_t = sample(m, draws);
                st.add(surrogate_hhat(s1, s2, d_t, d_prev, kCosts));
            }
            const double target = h_expected(kCosts, m, s1, s2);
            const double se = st.sd() / std::sqrt(static_cast<double>(N));
            const double z = std::abs(st.mean - target) / se;
            worst_z = std::max(worst_z, z);
            if (z > kSigmas) ok = false;
        }
    }
    const double el = sw.seconds();
    ok = ok && el < kBudget2;
    report(2, ok,
           fmt("monte-carlo surrogate mean vs expected cost, 5 points x 3 demand laws x %ld "
               "pairs, worst |z|=%.2f (gate %.1f), %.1fs",
               N, worst_z, kSigmas, el));
    CHECK(ok);
}

TEST_CASE("criterion 3: fixed-target segments align after the drain bound", "[acceptance]") {
    Stopwatch sw;
    RngStream rng(33);
    bool ok = true;
    long worst_burn = 0;
    long worst_bound = 1000000; // replaced by the first trial
    for (int trial = 0; trial < 100; ++trial) {
        // random pre-segment builds an arbitrary (possibly overfull) state
        const double pre1 = 1.0 + 3.0 * rng.uniform01();
        const double pre2 = 3.5 * rng.uniform01();
        ChainState chain = init_chain(pre1, pre2, sample(kUniform, rng));
        for (int warm = 0; warm < 20; ++warm) {
            auto [next, out] = step(chain, pre1, pre2, sample(kUniform, rng), 0.0, kCosts);
            chain = next;
        }
        // segment with new fixed targets
        const double t1 = 1.0 + 3.0 * rng.uniform01();
        const double t2 = 3.5 * rng.uniform01();
        const double start_level = chain.s_hat_1 + chain.pending_shipment + chain.s_hat_2;
        const long bound =
            static_cast<long>(std::ceil(std::max(start_level, 0.0) / kUniform.d)) + 2;
        const int len = 80;
        std::vector<bool> aligned(len);
        double d_prev = chain.last_demand;
        for (int i = 0; i < len; ++i) {
            const double d_t = sample(kUniform, rng);
            auto [next, out] = step(chain, t1, t2, d_t, 0.0, kCosts);
            const double sur = surrogate_hhat(t1, t2, d_t, d_prev, kCosts);
            aligned[i] = std::abs(out.o - d_t) <= kUlpSlack
                         && std::abs(out.loss_central - sur) <= kUlpSlack;
            chain = next;
            d_prev = d_t;
        }
        long burn = len;
        for (int i = len - 1; i >= 0 && aligned[i]; --i) burn = i;
        if (burn >= len || burn > bound) ok = false;
        if (burn - bound > worst_burn - worst_bound) {
            worst_burn = burn;
            worst_bound = bound;
        }
    }
    const double el = sw.seconds();
    ok = ok && el < kBudget3;
    report(3, ok,
           fmt("order-tracks-demand and per-round cost match the surrogate (slack %.0e) on "
               "100 random segments; tightest burn-in %ld vs bound %ld, %.2fs",
               kUlpSlack, worst_burn, worst_bound, el));
    CHECK(ok);
}

TEST_CASE("criterion 4: subgradient second moment respects the variance bound",
          "[acceptance]") {
    Stopwatch sw;
    const DemandModel discrete =
        make_discrete_demand({1.0, 2.0, 3.0, 4.0}, {0.25, 0.25, 0.25, 0.25});
    struct Family {
        const DemandModel* m;
        std::vector<double> omegas;
    };
    const std::vector<Family> families = {{&kUniform, {0.05, 0.1, 0.3}},
                                          {&discrete, {0.04, 0.08, 0.25}}};
    const long N = 100000;
    bool ok = true;
    double worst_margin = -1e30;
    RngStream rng(44);
    for (const auto& fam : families) {
        for (double omega : fam.omegas) {
            const double B = bernstein_bound(kCosts, *fam.m, omega);
            const double x_star = inverse_cdf(*fam.m, omega / (omega + kCosts.h2));
            for (int gi = 0; gi < 50; ++gi) {
                const double x = 1.0 + 3.0 * static_cast<double>(gi) / 49.0;
                RngStream draws = rng.substream(static_cast<std::uint64_t>(
                    1000 * (&fam - &families[0]) + 100 * gi + static_cast<int>(100 * omega)));
                RunningStat st;
                for (long i = 0; i < N; ++i) {
                    const double o = sample(*fam.m, draws);
                    const double g = x > o ? kCosts.h2 : (x < o ? -omega : 0.0);
                    const double dx = x - x_star;
                    st.add(dx * dx * g * g - B * dx * g);
                }
                const double se = st.sd() / std::sqrt(static_cast<double>(N));
                const double margin = st.mean - kSigmas * se;
                worst_margin = std::max(worst_margin, margin);
                if (margin > 1e-12) ok = false;
            }
        }
    }
    const double el = sw.seconds();
    ok = ok && el < kBudget4;
    report(4, ok,
           fmt("E[(x-x*)^2 g^2] <= B E[(x-x*) g] within %.1f SE on 50 points x 3 prices x "
               "{continuous, discrete}; worst margin %.2e, %.1fs",
               kSigmas, worst_margin, el));
    CHECK(ok);
}

TEST_CASE("criterion 5: gradient estimator mean matches the augmented gradient",
          "[acceptance]") {
    Stopwatch sw;
    const double T = 131072.0;
    const double delta = 1.0 / (T * T);
    const long L = 64;
    const double kap =
        augmentation_kappa(kCosts, delta, T, 1.0, static_cast<double>(L), kUniform.D);
    const double s1 = 3.25;
    const long N = 100000;
    bool ok = true;
    double worst_rel = 0.0;
    RngStream rng(55);
    for (int p = 0; p < 10; ++p) {
        const double s2 = 2.6 + 1.2 * static_cast<double>(p) / 9.0;
        RngStream draws = rng.substream(static_cast<std::uint64_t>(p));
        RunningStat st;
        std::vector<double> pool(L);
        for (long i = 0; i < N; ++i) {
            for (auto& v : pool) v = sample(kUniform, draws);
            const EmpiricalCdf ecdf(pool);
            const double d_prev = sample(kUniform, draws);
            const double d_t = sample(kUniform, draws);
            st.add(ogd_gradient(kCosts, s1, s2, d_t, d_prev, kap, ecdf.eval(s2)));
        }
        const double target = grad_h_s2(kCosts, kUniform, s1, s2) + kap * cdf(kUniform, s2);
        const double rel = std::abs(st.mean - target) / std::abs(target);
        worst_rel = std::max(worst_rel, rel);
        if (rel > kGradRelTol) ok = false;
    }
    const double el = sw.seconds();
    ok = ok && el < kBudget5;
    report(5, ok,
           fmt("estimator mean vs gradient-plus-augmentation at 10 pinned points "
               "(%ld draws, fresh %ld-sample cdf each), worst rel err %.4f (tol %.2f), %.1fs",
               N, L, worst_rel, kGradRelTol, el));
    CHECK(ok);
}

TEST_CASE("criterion 6: switching counts match the low-switching design", "[acceptance]") {
    Stopwatch sw;
    const long T = 16384;
    bool ok = true;
    std::string note;

    RunParams rp;
    rp.model = kUniform;
    rp.costs = kCosts;
    rp.T = T;
    rp.delta = 1.0 / (static_cast<double>(T) * T);
    rp.seed = 77;
    const RunTrace cen = run_centralized(rp);
    const long cen_limit = static_cast<long>(std::ceil(std::log2(static_cast<double>(T)))) + 1;
    long cen_switches = 0;
    for (long t = 2; t <= T; ++t)
        if (cen.target2[t - 1] != cen.target2[t - 2]) ++cen_switches;
    if (static_cast<long>(cen.epochs.size()) != cen_limit) ok = false;
    if (cen_switches > cen_limit) ok = false;

    // standalone lazy learner publishes exactly floor(log2 L) + 1 times
    bool lazy_ok = true;
    RngStream rng(66);
    for (long L : {64L, 256L, 1024L, 8192L, 16384L}) {
        LazyOnsState st = make_lazy_ons(2.0, 0.3, 1.0 / static_cast<double>(L), {1.0, 4.0});
        for (long i = 0; i < L; ++i) {
            const double o = sample(kUniform, rng);
            st = agent2_round_update(st, o, 0.1, kCosts);
        }
        const long expect = static_cast<long>(std::floor(std::log2(static_cast<double>(L)))) + 1;
        if (st.k != expect) lazy_ok = false;
    }
    if (!lazy_ok) ok = false;

    rp.seed = 78;
    const RunTrace dec = run_decentralized(rp);
    bool dec_ok = true;
    for (const auto& ep : dec.epochs) {
        const long eff = std::min(ep.length, T - ep.start + 1);
        const long limit =
            static_cast<long>(std::floor(std::log2(static_cast<double>(eff)))) + 1;
        long switches = 0;
        for (long t = ep.start + 1; t < ep.start + ep.length && t <= T; ++t)
            if (dec.target2[t - 1] != dec.target2[t - 2]) ++switches;
        if (switches > limit) dec_ok = false;
    }
    if (!dec_ok) ok = false;

    const double el = sw.seconds();
    ok = ok && el < kBudget6;
    report(6, ok,
           fmt("planner epochs %zu == ceil(log2 T)+1 == %ld, planner switches %ld <= %ld; "
               "lazy publish counts exact (%s); per-phase switch bound (%s); %.2fs",
               cen.epochs.size(), cen_limit, cen_switches, cen_limit,
               lazy_ok ? "yes" : "no", dec_ok ? "yes" : "no", el));
    CHECK(ok);
}

TEST_CASE("criterion 7: desk-scale last iterates land on the optimum", "[acceptance]") {
    Stopwatch sw;
    const DeskStudy& s = desk_study();
    const double c1 = median(s.cen_s1_err);
    const double c2 = median(s.cen_s2_err);
    const double d2 = median(s.dec_s2_err);
    const double dw = median(s.dec_omega_err);
    const double el = sw.seconds();
    const bool ok = c1 <= kCenS1Tol && c2 <= kCenS2Tol && d2 <= kDecS2Tol && dw <= kDecOmegaTol
                    && el < kBudget7;
    report(7, ok,
           fmt("median endpoint errors over 16 trials at T=2^17: planner |s1-3.25|=%.4f "
               "(tol %.2f), |s2-2.5|=%.4f (tol %.2f); protocol |s2-2.5|=%.4f (tol %.1f), "
               "|omega-0.1|=%.4f (tol %.2f); %.1fs",
               c1, kCenS1Tol, c2, kCenS2Tol, d2, kDecS2Tol, dw, kDecOmegaTol, el));
    CHECK(ok);
}

TEST_CASE("criterion 8: regret growth stays sublinear with polylog stage-2 regret",
          "[acceptance]") {
    Stopwatch sw;
    const DeskStudy& s = desk_study();
    bool ok = true;
    double cen_exp = 0.0, dec_exp = 0.0;
    std::string fit_note;
    try {
        std::vector<std::pair<double, double>> cen_pts, dec_pts;
        for (std::size_t i = 0; i < s.checkpoints.size(); ++i) {
            cen_pts.push_back({static_cast<double>(s.checkpoints[i]), s.cen_reg_mean[i]});
            dec_pts.push_back({static_cast<double>(s.checkpoints[i]), s.dec_reg_mean[i]});
        }
        cen_exp = fit_growth(cen_pts);
        dec_exp = fit_growth(dec_pts);
        if (cen_exp > kExponentMax || dec_exp > kExponentMax) ok = false;
    } catch (const std::exception& e) {
        ok = false;
        fit_note = std::string(" (fit failed: ") + e.what() + ")";
    }
    const double ratio = s.reg2_full_mean / s.reg2_quarter_mean;
    const bool ratio_ok = s.reg2_quarter_mean > 0.0 && s.reg2_full_mean > 0.0
                          && ratio <= kReg2RatioMax;
    if (!ratio_ok) ok = false;
    const double el = sw.seconds();
    ok = ok && el < kBudget8;
    report(8, ok,
           fmt("log-log regret exponents planner %.3f, protocol %.3f (gate %.2f)%s; mean "
               "stage-2 benchmark regret T/4=%.3f T=%.3f ratio=%.3f (gate %.1f, requires "
               "positive growth); %.1fs",
               cen_exp, dec_exp, kExponentMax, fit_note.c_str(), s.reg2_quarter_mean,
               s.reg2_full_mean, ratio, kReg2RatioMax, el));
    CHECK(ok);
}

TEST_CASE("criterion 9: identical seeds give byte-identical summaries", "[acceptance]") {
    Stopwatch sw;
    const fs::path base = fs::temp_directory_path()
                          / ("echelon_accept_" + std::to_string(::getpid()));
    fs::remove_all(base);
    fs::create_directories(base);
    const fs::path cfg_path = base / "study.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "T = 512\ntrials = 2\nmode = both\ndemand = uniform 1 4\n"
            << "costs = 0.3 0.1 0.5\nseed = 3\n";
    }
    const std::string cli = ECHELON_CLI_PATH;
    const auto run_once = [&](const std::string& out_dir) {
        const std::string cmd = cli + " run --config " + cfg_path.string() + " --out "
                                + out_dir + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    const int rc_a = run_once((base / "a").string());
    const int rc_b = run_once((base / "b").string());
    std::string text_a, text_b;
    {
        std::ifstream fa(base / "a" / "summary.csv", std::ios::binary);
        std::ifstream fb(base / "b" / "summary.csv", std::ios::binary);
        std::ostringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        text_a = sa.str();
        text_b = sb.str();
    }
    const bool ok = rc_a == 0 && rc_b == 0 && !text_a.empty() && text_a == text_b;
    const double el = sw.seconds();
    report(9, ok,
           fmt("two cli runs, same config and seed: exit codes %d/%d, summary bytes %zu/%zu, "
               "identical=%s, %.1fs",
               rc_a, rc_b, text_a.size(), text_b.size(), text_a == text_b ? "yes" : "no", el));
    fs::remove_all(base);
    CHECK(ok);
}