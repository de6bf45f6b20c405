#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nvmx/core/rng.hpp>
#include <nvmx/cov/accumulator.hpp>
#include <nvmx/cov/background.hpp>
#include <nvmx/cov/driven.hpp>
#include <nvmx/cov/io.hpp>
#include <nvmx/cov/records.hpp>
#include <nvmx/cov/scc_readout.hpp>
#include <nvmx/cov/spectroscopy.hpp>
#include <nvmx/photon/readout_noise.hpp>

namespace {

using namespace nvmx;

// ---------------------------------------------------------------- pearson

TEST(Pearson, PerfectlySynchronizedStreams) {
    RngStream rng = RngStream::root(11).child(0x70313161);
    std::vector<double> a(500);
    for (auto& v : a) v = static_cast<double>(rng.poisson(4.0));
    CorrelationRecord same = pearson(a, a);
    EXPECT_NEAR(same.r_raw, 1.0, 1e-12);

    // anti-synchronized binary streams are the mirror case
    std::vector<double> x(400), y(400);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = static_cast<double>(i & 1);
        y[i] = 1.0 - x[i];
    }
    EXPECT_NEAR(pearson(x, y).r_raw, -1.0, 1e-12);
}

TEST(Pearson, MatchesHandComputedToyCase) {
    // r = 3/5 by direct computation, stderr = (1 - 0.36)/sqrt(3)
    std::vector<double> a{1.0, 2.0, 3.0, 4.0};
    std::vector<double> b{2.0, 1.0, 4.0, 3.0};
    CorrelationRecord rec = pearson(a, b, 7, 9);
    EXPECT_NEAR(rec.r_raw, 0.6, 1e-15);
    EXPECT_NEAR(rec.stderr, 0.3695041722813605, 1e-15);
    EXPECT_EQ(rec.site_i, 7);
    EXPECT_EQ(rec.site_j, 9);
    EXPECT_EQ(rec.n_shots, 4u);
    EXPECT_DOUBLE_EQ(rec.r_corr, rec.r_raw);
    EXPECT_EQ(rec.baseline, 0.0);
}

TEST(Pearson, RejectsDegenerateInput) {
    std::vector<double> flat(10, 3.0);
    std::vector<double> live{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    EXPECT_THROW(pearson(flat, live), std::invalid_argument);
    EXPECT_THROW(pearson(live, flat), std::invalid_argument);
    EXPECT_THROW(pearson({1.0, 2.0}, {1.0}), std::invalid_argument);
    EXPECT_THROW(pearson({1.0}, {2.0}), std::invalid_argument);
}

TEST(Pearson, IndependentStreamsStayInNullBand) {
    const std::size_t n = 100000;
    RngStream rng = RngStream::root(21);
    RngStream ra = rng.child(1), rb = rng.child(2);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = static_cast<double>(ra.poisson(3.0));
        b[i] = static_cast<double>(rb.poisson(3.0));
    }
    CorrelationRecord rec = pearson(a, b);
    EXPECT_LT(std::abs(rec.r_raw), 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Pearson, BootstrapErrorTracksAnalyticFormula) {
    const std::size_t n = 2000;
    RngStream rng = RngStream::root(33).child(0x62737472);
    std::vector<double> a(n), b(n);
    double rho = 0.3;
    for (std::size_t i = 0; i < n; ++i) {
        double z1 = rng.normal();
        double z2 = rng.normal();
        a[i] = z1;
        b[i] = rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
    }
    CorrelationRecord rec = pearson(a, b);
    double boot = pearson_bootstrap_stderr(a, b, 400, 77);
    EXPECT_NEAR(boot, rec.stderr, 0.25 * rec.stderr);
}

// ------------------------------------------------------------- accumulator

TEST(Accumulator, MergeIsExactAcrossArbitrarySplits) {
    const std::size_t n = 10007;
    RngStream rng = RngStream::root(909).child(0x6d657267);
    std::vector<std::vector<double>> shots(n, std::vector<double>(3));
    for (auto& s : shots) {
        s[0] = rng.normal();
        s[1] = 0.4 * s[0] + rng.normal();
        s[2] = static_cast<double>(rng.poisson(2.5));
    }

    CovAccumulator whole(3);
    for (const auto& s : shots) whole.add(s);

    CovAccumulator pa(3), pb(3), pc(3);
    for (std::size_t i = 0; i < 1000; ++i) pa.add(shots[i]);
    for (std::size_t i = 1000; i < 5007; ++i) pb.add(shots[i]);
    for (std::size_t i = 5007; i < n; ++i) pc.add(shots[i]);

    // right-heavy association, then fold into an empty accumulator
    pb.merge(pc);
    CovAccumulator merged(3);
    merged.merge(pa);
    merged.merge(pb);

    EXPECT_EQ(merged.count(), whole.count());
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(merged.mean(i), whole.mean(i), 1e-12);
        for (std::size_t j = 0; j < 3; ++j)
            EXPECT_NEAR(merged.covariance(i, j), whole.covariance(i, j),
                        1e-12 * std::max(1.0, std::abs(whole.covariance(i, j))));
    }
    EXPECT_NEAR(merged.pearson(0, 1).r_raw, whole.pearson(0, 1).r_raw, 1e-12);
}

TEST(Accumulator, PairEnumerationIsLexicographic) {
    CovAccumulator acc(5);
    RngStream rng = RngStream::root(5).child(0x656e756d);
    std::vector<double> x(5);
    for (int s = 0; s < 50; ++s) {
        for (auto& v : x) v = rng.normal();
        acc.add(x);
    }
    auto pairs = acc.all_pairs();
    ASSERT_EQ(pairs.size(), 10u); // 5 choose 2
    EXPECT_EQ(pairs.front().site_i, 0);
    EXPECT_EQ(pairs.front().site_j, 1);
    EXPECT_EQ(pairs.back().site_i, 3);
    EXPECT_EQ(pairs.back().site_j, 4);
    std::size_t idx = 0;
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j, ++idx) {
            EXPECT_EQ(pairs[idx].site_i, i);
            EXPECT_EQ(pairs[idx].site_j, j);
        }
}

TEST(Accumulator, RejectsBadUse) {
    EXPECT_THROW(CovAccumulator(1), std::invalid_argument);
    CovAccumulator acc(2);
    EXPECT_THROW(acc.add(std::vector<double>{1.0, 2.0, 3.0}), std::invalid_argument);
    EXPECT_THROW(acc.pearson(0, 1), std::invalid_argument); // no samples yet
    CovAccumulator other(3);
    EXPECT_THROW(acc.merge(other), std::invalid_argument);
    acc.add(std::vector<double>{1.0, 1.0});
    acc.add(std::vector<double>{1.0, 2.0});
    EXPECT_THROW(acc.pearson(0, 1), std::invalid_argument); // channel 0 frozen
}

// -------------------------------------------------------------- background

TEST(Background, ClosedFormAnchors) {
    BackgroundModel bg{4.0, 0.05};
    BackgroundCorrelation c = background_correlation(bg);
    EXPECT_NEAR(c.exact, 0.009876543209876543, 1e-15); // 0.04 / 4.05
    EXPECT_NEAR(c.approx, 0.01, 1e-15);
    EXPECT_TRUE(bg.in_validity_regime());

    BackgroundCorrelation quiet = background_correlation({4.0, 0.0});
    EXPECT_EQ(quiet.exact, 0.0);
    EXPECT_EQ(quiet.approx, 0.0);
    BackgroundCorrelation dark = background_correlation({0.0, 0.3});
    EXPECT_EQ(dark.exact, 0.0);
}

TEST(Background, ApproximationHoldsInsideValidityRegime) {
    for (double mu : {1.0, 4.0, 8.0})
        for (double sn : {0.02, 0.05, 0.1}) {
            BackgroundModel bg{mu, sn};
            ASSERT_TRUE(bg.in_validity_regime());
            BackgroundCorrelation c = background_correlation(bg);
            EXPECT_LT(std::abs(c.approx / c.exact - 1.0), 0.10)
                << "mu=" << mu << " sigma_n=" << sn;
        }
    // outside the regime the gap opens up and the flag says so
    BackgroundModel wide{4.0, 0.2};
    EXPECT_FALSE(wide.in_validity_regime());
    BackgroundCorrelation c = background_correlation(wide);
    EXPECT_GT(std::abs(c.approx / c.exact - 1.0), 0.10);
}

// Independent Monte Carlo oracle for the shared-gain model, deliberately
// built on the standard library generator rather than the library's RNG.
TEST(Background, MonteCarloMatchesExactFormula) {
    const std::size_t n = 1000000;
    std::mt19937_64 gen(20240817);
    std::poisson_distribution<long> pois(4.0);
    std::normal_distribution<double> gain(1.0, 0.05);

    std::vector<double> s1(n), s2(n);
    for (std::size_t i = 0; i < n; ++i) {
        double g = gain(gen);
        s1[i] = g * static_cast<double>(pois(gen));
        s2[i] = g * static_cast<double>(pois(gen));
    }
    CorrelationRecord rec = pearson(s1, s2);
    double expected = background_correlation({4.0, 0.05}).exact;
    EXPECT_NEAR(rec.r_raw, expected, 3.0 * rec.stderr);
    EXPECT_GT(rec.r_raw, 3.0 * rec.stderr); // the baseline itself is resolved
}

TEST(Background, MonteCarloWithIntrinsicCorrelation) {
    // common Poisson component plants r_true = 0.4/4.0 = 0.1 between the
    // sites before the gain touches them
    const std::size_t n = 1000000;
    std::mt19937_64 gen(5150);
    std::poisson_distribution<long> shared(0.4);
    std::poisson_distribution<long> solo(3.6);
    std::normal_distribution<double> gain(1.0, 0.05);

    std::vector<double> s1(n), s2(n);
    for (std::size_t i = 0; i < n; ++i) {
        double g = gain(gen);
        double c = static_cast<double>(shared(gen));
        s1[i] = g * (c + static_cast<double>(solo(gen)));
        s2[i] = g * (c + static_cast<double>(solo(gen)));
    }
    CorrelationRecord rec = pearson(s1, s2);
    BackgroundModel bg{4.0, 0.05};
    BackgroundCorrelation c = background_correlation_with_signal(bg, 0.1);
    EXPECT_NEAR(c.exact, 0.1088888888888889, 1e-15); // 0.441 / 4.05
    EXPECT_NEAR(rec.r_raw, c.exact, 3.0 * rec.stderr);
    // the excess over r_true is the predicted positive offset
    EXPECT_NEAR(rec.r_raw - 0.1, offset_under_true_correlation(bg, 0.1), 3.0 * rec.stderr);
}

TEST(Background, OffsetAnchorsAndSign) {
    BackgroundModel bg{4.0, 0.05};
    EXPECT_EQ(offset_under_true_correlation(bg, 1.0), 0.0);
    EXPECT_NEAR(offset_under_true_correlation(bg, 0.0), 0.01, 1e-15);
    EXPECT_NEAR(offset_under_true_correlation(bg, -0.002), 0.01002, 1e-15);
    // positive no matter the sign of the intrinsic correlation
    for (double r : {-1.0, -0.5, 0.0, 0.5, 0.999})
        EXPECT_GE(offset_under_true_correlation(bg, r), 0.0);
    EXPECT_THROW(offset_under_true_correlation(bg, 1.5), std::invalid_argument);
    EXPECT_THROW(background_correlation_with_signal(bg, -1.0001), std::invalid_argument);
}

// ----------------------------------------------------------------- records

TEST(Records, ExpectedPairCorrelationAnchors) {
    EXPECT_NEAR(expected_pair_correlation(1.0, 1.0, 12.0, 12.0, 1.0), 1.0 / 144.0, 1e-15);
    EXPECT_EQ(expected_pair_correlation(0.9, 0.8, 12.0, 15.0, 0.0), 0.0);
    EXPECT_LT(expected_pair_correlation(0.9, 0.9, 12.0, 12.0, -0.6), 0.0);

    // magnitude can never beat the readout-noise bound
    RngStream rng = RngStream::root(40).child(0x626e6400);
    for (int i = 0; i < 200; ++i) {
        double ci = 1e-3 + 0.999 * rng.uniform();
        double cj = 1e-3 + 0.999 * rng.uniform();
        double si = 1.0 + 19.0 * rng.uniform();
        double sj = 1.0 + 19.0 * rng.uniform();
        double pp = 2.0 * rng.uniform() - 1.0;
        double r = expected_pair_correlation(ci, cj, si, sj, pp);
        EXPECT_LE(std::abs(r), pair_correlation_bound(si, sj) + 1e-15);
    }

    EXPECT_THROW(expected_pair_correlation(0.0, 1.0, 12.0, 12.0, 1.0), std::invalid_argument);
    EXPECT_THROW(expected_pair_correlation(1.0, 1.2, 12.0, 12.0, 1.0), std::invalid_argument);
    EXPECT_THROW(expected_pair_correlation(1.0, 1.0, 0.9, 12.0, 1.0), std::invalid_argument);
    EXPECT_THROW(expected_pair_correlation(1.0, 1.0, 12.0, 12.0, 1.5), std::invalid_argument);
}

TEST(Records, SigmaRFromAmplitudeInvertsThePeak) {
    EXPECT_NEAR(sigma_r_from_amplitude(1.0 / 144.0), 12.0, 1e-12);
    EXPECT_NEAR(sigma_r_from_amplitude(1.0 / 225.0), 15.0, 1e-12);
    EXPECT_DOUBLE_EQ(sigma_r_from_amplitude(1.0), 1.0);
    EXPECT_THROW(sigma_r_from_amplitude(0.0), std::invalid_argument);
    EXPECT_THROW(sigma_r_from_amplitude(-0.01), std::invalid_argument);
    EXPECT_THROW(sigma_r_from_amplitude(1.01), std::invalid_argument);
}

TEST(Records, ScalarBaselineSubtraction) {
    std::vector<CorrelationRecord> recs(1);
    recs[0].r_raw = 2.01e-3;
    recs[0].r_corr = recs[0].r_raw;
    recs[0].stderr = 3e-3;
    BaselineEstimate cal;
    cal.baseline = 2.01e-3;
    cal.stderr = 4e-3;
    subtract_baseline(recs, cal);
    EXPECT_NEAR(recs[0].r_corr, 0.0, 1e-18);
    EXPECT_NEAR(recs[0].stderr, 5e-3, 1e-15); // 3-4-5 quadrature
    EXPECT_DOUBLE_EQ(recs[0].baseline, 2.01e-3);

    // zero baseline is the identity
    std::vector<CorrelationRecord> plain(1);
    plain[0].r_raw = 0.007;
    plain[0].r_corr = 0.007;
    plain[0].stderr = 1e-3;
    subtract_baseline(plain, BaselineEstimate{});
    EXPECT_DOUBLE_EQ(plain[0].r_corr, 0.007);
    EXPECT_DOUBLE_EQ(plain[0].stderr, 1e-3);
}

TEST(Records, BaselineSubtractionIsAPureShift) {
    const double c = 5e-4;
    std::vector<CorrelationRecord> a(3), b(3);
    for (int i = 0; i < 3; ++i) {
        a[i].site_i = b[i].site_i = 0;
        a[i].site_j = b[i].site_j = i + 1;
        a[i].r_raw = 1e-3 * (i + 1);
        b[i].r_raw = a[i].r_raw + c;
        a[i].r_corr = a[i].r_raw;
        b[i].r_corr = b[i].r_raw;
    }
    BaselineEstimate cal_a{2e-3, 0.0, 3, 1000};
    BaselineEstimate cal_b{2e-3 + c, 0.0, 3, 1000};
    subtract_baseline(a, cal_a);
    subtract_baseline(b, cal_b);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i].r_corr, b[i].r_corr, 1e-18);
}

TEST(Records, PerPairBaselineMatchesByPairLabel) {
    std::vector<CorrelationRecord> recs(2);
    recs[0] = {0, 1, 5e-3, 1e-3, 0.0, 0.0, 5e-3, 100};
    recs[1] = {0, 2, 6e-3, 1e-3, 0.0, 0.0, 6e-3, 100};
    std::vector<CorrelationRecord> cal(2);
    cal[0] = {0, 2, 2e-3, 5e-4, 0.0, 0.0, 2e-3, 100};
    cal[1] = {0, 1, 1e-3, 5e-4, 0.0, 0.0, 1e-3, 100};

    // order in the calibration set does not matter, only the labels
    std::vector<CorrelationRecord> shuffled = recs;
    subtract_baseline(shuffled, cal);
    EXPECT_NEAR(shuffled[0].r_corr, 4e-3, 1e-18);
    EXPECT_NEAR(shuffled[1].r_corr, 4e-3, 1e-18);

    std::vector<CorrelationRecord> orphan(1);
    orphan[0] = {3, 4, 1e-3, 1e-3, 0.0, 0.0, 1e-3, 100};
    EXPECT_THROW(subtract_baseline(orphan, cal), std::invalid_argument);
}

// --------------------------------------------------------------- readout

TEST(Scc, PoissonTailAnchors) {
    SccReadout m; // defaults: c 0.5/0.4, lambdas 1.6/6.7, cut at 3
    EXPECT_NEAR(m.tail(1.6), 0.07881348722971894, 1e-12);
    EXPECT_NEAR(m.tail(6.7), 0.9011920345966106, 1e-12);
    EXPECT_NEAR(m.p_fire(0), 0.49000276091316475, 1e-12);
    EXPECT_NEAR(m.p_fire(1), 0.40776490617647565, 1e-12);
    EXPECT_NEAR(m.sigma_r(), 12.09613933043602, 1e-9);
}

TEST(Scc, SolverHitsRequestedNoise) {
    SccReadout twelve = scc_readout_with_sigma_r(12.0, 0.45);
    EXPECT_NEAR(twelve.sigma_r(), 12.0, 1e-9);
    EXPECT_NEAR(0.5 * (twelve.c0 + twelve.c1), 0.45, 1e-12);
    EXPECT_NEAR(twelve.c0 - twelve.c1, 0.10080116108696682, 1e-6);
    EXPECT_EQ(twelve.threshold, 3u);

    SccReadout fifteen = scc_readout_with_sigma_r(15.0, 0.45);
    EXPECT_NEAR(fifteen.sigma_r(), 15.0, 1e-9);
    EXPECT_NEAR(fifteen.c0 - fifteen.c1, 0.08064092886957344, 1e-6);
    // noisier target needs less charge contrast
    EXPECT_LT(fifteen.c0 - fifteen.c1, twelve.c0 - twelve.c1);

    // the floor at this midpoint is about 1.344
    EXPECT_THROW(scc_readout_with_sigma_r(1.2, 0.45), std::invalid_argument);
    EXPECT_THROW(scc_readout_with_sigma_r(0.9, 0.45), std::invalid_argument);
    EXPECT_THROW(scc_readout_with_sigma_r(12.0, 0.0), std::invalid_argument);
}

TEST(Scc, SampledFlagMatchesAnalyticRates) {
    SccReadout m;
    RngStream rng = RngStream::root(71).child(0x73636373);
    const int n = 200000;
    for (int spin = 0; spin < 2; ++spin) {
        double fired = 0.0;
        for (int i = 0; i < n; ++i) fired += m.sample(spin, rng);
        double p = m.p_fire(spin);
        double se = std::sqrt(p * (1.0 - p) / n);
        EXPECT_NEAR(fired / n, p, 4.0 * se) << "spin " << spin;
    }
    // zero gain means zero photons, which always reads dark
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(m.sample(0, rng, 0.0), 0.0);
}

TEST(Scc, AnalyticNoiseAgreesWithSampledEstimator) {
    SccReadout m = scc_readout_with_sigma_r(12.0, 0.45);
    RngStream rng = RngStream::root(72).child(0x73636d63);
    const int n = 400000;
    std::vector<double> g0(n), g1(n);
    for (int i = 0; i < n; ++i) g0[i] = m.sample(0, rng);
    for (int i = 0; i < n; ++i) g1[i] = m.sample(1, rng);
    SigmaREstimate est = sigma_r_from_samples(g0, g1, 200, 73);
    EXPECT_GT(m.sigma_r(), est.ci_lo);
    EXPECT_LT(m.sigma_r(), est.ci_hi);
}

TEST(Scc, ValidatesParameters) {
    SccReadout m;
    m.c0 = m.c1 = 0.5;
    EXPECT_THROW(m.validate(), std::invalid_argument);
    m = SccReadout{};
    m.c0 = 1.2;
    EXPECT_THROW(m.validate(), std::invalid_argument);
    m = SccReadout{};
    m.lambda1 = m.lambda0;
    EXPECT_THROW(m.validate(), std::invalid_argument);
}

// ----------------------------------------------------------------- driven

DrivenConfig small_driven_config() {
    DrivenConfig cfg;
    cfg.opposite = {0, 0, 0, 1};
    cfg.readout = scc_readout_with_sigma_r(12.0, 0.45);
    const int k = 16;
    for (int m = 0; m < k; ++m) cfg.thetas_rad.push_back(kTwoPi * m / k);
    cfg.n_shots = 20000;
    cfg.seed = 424242;
    return cfg;
}

TEST(Driven, CurveTracksTheoryEverywhere) {
    DrivenConfig cfg = small_driven_config();
    SweepResult res = simulate_driven(cfg);

    // 16 sweep points times 4-choose-2 pairs
    ASSERT_EQ(res.records.size(), 16u * 6u);
    ASSERT_EQ(res.baseline.n_pairs, 6u);

    for (const auto& sr : res.records) {
        bool oi = cfg.opposite[static_cast<std::size_t>(sr.rec.site_i)] != 0;
        bool oj = cfg.opposite[static_cast<std::size_t>(sr.rec.site_j)] != 0;
        double want = expected_driven_correlation(sr.sweep_value, oi, oj, 12.0, 12.0);
        EXPECT_NEAR(sr.rec.r_corr, want, 4.0 * sr.rec.stderr)
            << "theta=" << sr.sweep_value << " pair " << sr.rec.site_i << sr.rec.site_j;
        // no corrected correlator may exceed the readout-noise bound
        EXPECT_LE(std::abs(sr.rec.r_corr), 1.0 / 144.0 + 3.0 * sr.rec.stderr);
    }
}

TEST(Driven, FittedCurvesHaveTheRightShape) {
    DrivenConfig cfg = small_driven_config();
    SweepResult res = simulate_driven(cfg);

    // stack the three same-state pair curves and the three opposite ones
    std::vector<double> th_same, r_same, th_opp, r_opp;
    for (const auto& sr : res.records) {
        bool opp = cfg.opposite[static_cast<std::size_t>(sr.rec.site_i)] !=
                   cfg.opposite[static_cast<std::size_t>(sr.rec.site_j)];
        (opp ? th_opp : th_same).push_back(sr.sweep_value);
        (opp ? r_opp : r_same).push_back(sr.rec.r_corr);
    }
    DrivenCurveFit same = fit_driven_curve(th_same, r_same);
    DrivenCurveFit opp = fit_driven_curve(th_opp, r_opp);

    EXPECT_GT(same.amplitude, 0.0);
    EXPECT_LT(opp.amplitude, 0.0);
    // extrema sit at multiples of pi; one 16-point grid step is 2*pi/16
    EXPECT_LT(std::abs(same.theta_extremum_rad), kTwoPi / 16.0);
    EXPECT_LT(std::abs(opp.theta_extremum_rad), kTwoPi / 16.0);
    // amplitude agrees with 1/144 at this modest shot count's resolution
    EXPECT_NEAR(same.amplitude, 1.0 / 144.0, 3.0 * same.amplitude_stderr);
    EXPECT_NEAR(opp.amplitude, -1.0 / 144.0, 3.0 * opp.amplitude_stderr);
    // and the implied readout noise lands near the configured 12
    EXPECT_NEAR(sigma_r_from_amplitude(same.amplitude), 12.0, 2.5);
}

TEST(Driven, GainNoiseBaselineIsDetectedAndRemoved) {
    DrivenConfig cfg;
    cfg.opposite = {0, 0};
    cfg.readout = SccReadout{};
    cfg.thetas_rad = {0.25 * kTwoPi}; // quarter turn: no spin correlation left
    cfg.n_shots = 200000;
    cfg.gain_sigma = 0.2;
    cfg.seed = 5started5;
    SweepResult res = simulate_driven(cfg);
    ASSERT_EQ(res.records.size(), 1u);
    const CorrelationRecord& rec = res.records[0].rec;

    // the shared gain shows up strongly in the raw correlator
    EXPECT_GT(rec.r_raw, 3.0 * rec.stderr);
    // the no-drive calibration sees the same effect
    EXPECT_GT(res.baseline.baseline, 3.0 * res.baseline.stderr);
    double joint = std::hypot(rec.stderr, res.baseline.stderr);
    EXPECT_NEAR(rec.r_raw, res.baseline.baseline, 4.0 * joint);
    // and the corrected value is consistent with zero
    EXPECT_LT(std::abs(rec.r_corr), 3.0 * rec.stderr);
}

TEST(Driven, DeterministicUnderSeedReplay) {
    DrivenConfig cfg;
    cfg.opposite = {0, 1};
    cfg.readout = SccReadout{};
    cfg.thetas_rad = {0.0, 1.0};
    cfg.n_shots = 1000;
    cfg.seed = 99;
    SweepResult a = simulate_driven(cfg);
    SweepResult b = simulate_driven(cfg);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i)
        EXPECT_EQ(a.records[i].rec.r_raw, b.records[i].rec.r_raw);

    cfg.seed = 100;
    SweepResult c = simulate_driven(cfg);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.records.size(); ++i)
        any_diff = any_diff || a.records[i].rec.r_raw != c.records[i].rec.r_raw;
    EXPECT_TRUE(any_diff);
}

TEST(Driven, ValidatesConfiguration) {
    DrivenConfig cfg;
    cfg.opposite = {0, 0};
    cfg.readout = SccReadout{};
    cfg.thetas_rad = {kTwoPi}; // out of the half-open range
    EXPECT_THROW(simulate_driven(cfg), std::invalid_argument);
    cfg.thetas_rad = {-0.1};
    EXPECT_THROW(simulate_driven(cfg), std::invalid_argument);
    cfg.thetas_rad = {};
    EXPECT_THROW(simulate_driven(cfg), std::invalid_argument);
    cfg.thetas_rad = {0.0};
    cfg.n_shots = 999;
    EXPECT_THROW(simulate_driven(cfg), std::invalid_argument);
    cfg.n_shots = 1000;
    cfg.opposite = {0};
    EXPECT_THROW(simulate_driven(cfg), std::invalid_argument);
}

TEST(Driven, FitHelperRecoversPlantedCurves) {
    std::vector<double> th, rp, rn;
    for (int m = 0; m < 32; ++m) {
        double t = kTwoPi * m / 32.0;
        th.push_back(t);
        double cp = std::cos(t - 0.3);
        rp.push_back(0.001 + 0.005 * cp * cp);
        double cn = std::cos(t + 0.2);
        rn.push_back(0.002 - 0.004 * cn * cn);
    }
    DrivenCurveFit fp = fit_driven_curve(th, rp);
    EXPECT_NEAR(fp.amplitude, 0.005, 1e-12);
    EXPECT_NEAR(fp.theta_extremum_rad, 0.3, 1e-12);
    EXPECT_NEAR(fp.offset, 0.001 + 0.0025, 1e-12);
    EXPECT_LT(fp.rms_residual, 1e-14);

    DrivenCurveFit fn = fit_driven_curve(th, rn);
    EXPECT_NEAR(fn.amplitude, -0.004, 1e-12);
    EXPECT_NEAR(fn.theta_extremum_rad, -0.2, 1e-12);

    EXPECT_THROW(fit_driven_curve({0.0, 1.0}, {0.0, 1.0}), std::invalid_argument);
    std::vector<double> flat(8, 1.0), vals(8, 0.5);
    EXPECT_THROW(fit_driven_curve(flat, vals), std::invalid_argument);
}

// ------------------------------------------------------------ spectroscopy

TEST(Spectro, PhaseProductMatchesBesselClosedForm) {
    XY8Config xy8;
    PhysConstants pc;
    // at resonance the filter maps the field onto phase a*cos(u); averaging
    // sin^2 over u gives (1 - J0(2a))/2
    struct Anchor {
        double a, pp;
    };
    for (Anchor an : {Anchor{0.3, 0.04399756825139467}, Anchor{1.0, 0.38805461042938216},
                      Anchor{1.4, 0.5925180166821936}}) {
        double b = b_for_peak_phase(xy8, an.a, pc);
        EXPECT_NEAR(spectroscopy_phase_product(xy8, b, xy8.resonance_hz(), pc), an.pp, 1e-10);
    }

    // off resonance the same law holds with the filtered amplitude
    double b = b_for_peak_phase(xy8, 1.4, pc);
    for (double f : {1.0e6, 1.6e6, 2.4e6, 3.0e6}) {
        FilterWeights w = xy8_filter_weights(xy8, f);
        double a_eff = pc.gyromagnetic_rad() * b * std::hypot(w.w_cos, w.w_sin);
        double want = 0.5 * (1.0 - std::cyl_bessel_j(0.0, 2.0 * a_eff));
        EXPECT_NEAR(spectroscopy_phase_product(xy8, b, f, pc), want, 1e-10) << f;
    }
}

TEST(Spectro, FieldAmplitudeHelperRoundTrips) {
    XY8Config xy8;
    PhysConstants pc;
    double b = b_for_peak_phase(xy8, 1.4, pc);
    EXPECT_NEAR(xy8_peak_phase(xy8, b, pc), 1.4, 1e-12);
    EXPECT_THROW(b_for_peak_phase(xy8, 0.0, pc), std::invalid_argument);
}

TEST(Spectro, ValidatesConfiguration) {
    SpectroscopyConfig cfg;
    cfg.opposite = {0, 1};
    cfg.freqs_hz = {2.0e6};
    cfg.b_amp_t = b_for_peak_phase(cfg.xy8, 1.7); // folds past pi/2
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg.b_amp_t = b_for_peak_phase(cfg.xy8, 1.4);
    EXPECT_NO_THROW(cfg.validate());
    cfg.freqs_hz = {0.0};
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg.freqs_hz = {2.0e6};
    cfg.opposite = {0};
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Spectro, CorrelationAppearsOnlyAtTheFilterResonance) {
    SpectroscopyConfig cfg;
    cfg.opposite = {0, 0, 1};
    cfg.readout = scc_readout_with_sigma_r(12.0, 0.45);
    cfg.b_amp_t = b_for_peak_phase(cfg.xy8, 1.4);
    cfg.freqs_hz = {1.0e6, 1.6e6, 2.0e6, 2.4e6, 3.0e6};
    cfg.n_shots = 1500000;
    cfg.baseline_shots = 200000;
    cfg.seed = 777;
    SweepResult res = simulate_spectroscopy(cfg);
    ASSERT_EQ(res.records.size(), 5u * 3u);

    double f_res = cfg.xy8.resonance_hz();
    EXPECT_DOUBLE_EQ(f_res, 2.0e6);
    for (const auto& sr : res.records) {
        double want = expected_spectroscopy_correlation(
            cfg, sr.sweep_value, static_cast<std::size_t>(sr.rec.site_i),
            static_cast<std::size_t>(sr.rec.site_j));
        EXPECT_NEAR(sr.rec.r_corr, want, 4.0 * sr.rec.stderr)
            << "f=" << sr.sweep_value << " pair " << sr.rec.site_i << sr.rec.site_j;
        bool opp = cfg.opposite[static_cast<std::size_t>(sr.rec.site_i)] !=
                   cfg.opposite[static_cast<std::size_t>(sr.rec.site_j)];
        if (sr.sweep_value == f_res) {
            // resolved with the expected sign at >= 3 sigma on resonance
            if (opp)
                EXPECT_LT(sr.rec.r_corr, -3.0 * sr.rec.stderr);
            else
                EXPECT_GT(sr.rec.r_corr, 3.0 * sr.rec.stderr);
        } else if (sr.sweep_value < 1.5e6 || sr.sweep_value > 2.5e6) {
            // far off resonance nothing is detected
            EXPECT_LT(std::abs(sr.rec.r_corr), 3.5 * sr.rec.stderr);
        }
    }
}

TEST(Spectro, DeterministicUnderSeedReplay) {
    SpectroscopyConfig cfg;
    cfg.opposite = {0, 1};
    cfg.readout = SccReadout{};
    cfg.b_amp_t = b_for_peak_phase(cfg.xy8, 1.0);
    cfg.freqs_hz = {2.0e6};
    cfg.n_shots = 1000;
    cfg.seed = 31;
    SweepResult a = simulate_spectroscopy(cfg);
    SweepResult b = simulate_spectroscopy(cfg);
    ASSERT_EQ(a.records.size(), 1u);
    EXPECT_EQ(a.records[0].rec.r_raw, b.records[0].rec.r_raw);
}

// --------------------------------------------------------------------- io

std::string cov_tmp_path(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / "nvmx_cov_test";
    std::filesystem::create_directories(d);
    return (d / name).string();
}

TEST(CovIo, CorrelatorCsvRoundTrips) {
    std::vector<SweepRecord> records(2);
    records[0].sweep_value = 0.5;
    records[0].rec = {0, 1, 6.9e-3, 1.1e-3, 2.0e-3, 1e-4, 4.9e-3, 20000};
    records[1].sweep_value = 1.5;
    records[1].rec = {0, 2, -5.5e-3, 1.2e-3, 2.0e-3, 1e-4, -7.5e-3, 20000};

    std::string path = cov_tmp_path("correlators.csv");
    write_correlator_csv(path, records);

    std::ifstream in(path);
    ASSERT_TRUE(in.good());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "sweep_value,site_i,site_j,r_raw,r_corr,stderr,n_shots");
    int rows = 0;
    while (std::getline(in, line)) {
        double sweep, r_raw, r_corr, se;
        int i, j;
        long long n;
        ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%d,%d,%lf,%lf,%lf,%lld", &sweep, &i, &j,
                              &r_raw, &r_corr, &se, &n),
                  7)
            << line;
        const SweepRecord& want = records[static_cast<std::size_t>(rows)];
        EXPECT_EQ(sweep, want.sweep_value);
        EXPECT_EQ(i, want.rec.site_i);
        EXPECT_EQ(j, want.rec.site_j);
        EXPECT_EQ(r_raw, want.rec.r_raw); // 17 digits round-trip exactly
        EXPECT_EQ(r_corr, want.rec.r_corr);
        EXPECT_EQ(se, want.rec.stderr);
        EXPECT_EQ(n, static_cast<long long>(want.rec.n_shots));
        ++rows;
    }
    EXPECT_EQ(rows, 2);
}

TEST(CovIo, BaselineJsonRoundTrips) {
    BaselineEstimate cal;
    cal.baseline = 2.01e-3;
    cal.stderr = 3.4e-4;
    cal.n_pairs = 6;
    cal.n_shots = 300000;
    std::string path = cov_tmp_path("baseline.json");
    write_baseline_json(path, cal);
    BaselineEstimate back = read_baseline_json(path);
    EXPECT_EQ(back.baseline, cal.baseline);
    EXPECT_EQ(back.stderr, cal.stderr);
    EXPECT_EQ(back.n_pairs, cal.n_pairs);
    EXPECT_EQ(back.n_shots, cal.n_shots);

    EXPECT_THROW(read_baseline_json(cov_tmp_path("missing.json")), std::runtime_error);
    EXPECT_THROW(write_baseline_json("/nonexistent-dir/x.json", cal), std::runtime_error);
}

} // namespace
