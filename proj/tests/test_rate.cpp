#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <nvmx/core/rng.hpp>
#include <nvmx/rate/evolve.hpp>
#include <nvmx/rate/model.hpp>
#include <nvmx/rate/scc.hpp>

using nvmx::LevelPopulations;
using nvmx::NVSite;
using nvmx::RateModel;

namespace {

NVSite canonical_site() {
    NVSite s;
    s.id = 1;
    s.x = 10.0;
    s.y = 10.0;
    return s;  // lambda 1.6/6.7, init 0.7/0.95 defaults
}

} // namespace

TEST(RateModel, ZeroPowerFreezesPopulations) {
    RateModel m = RateModel::orange_594();
    LevelPopulations p{0.5, 0.2, 0.3};
    LevelPopulations q = nvmx::evolve(m, p, 0.0, 1e-3);
    EXPECT_NEAR(q.minus_ms0, 0.5, 1e-12);
    EXPECT_NEAR(q.minus_ms1, 0.2, 1e-12);
    EXPECT_NEAR(q.neutral, 0.3, 1e-12);
}

TEST(RateModel, PopulationConservedAndNonNegative) {
    RateModel m = RateModel::orange_594();
    nvmx::RngStream rng = nvmx::RngStream::root(31);
    for (int trial = 0; trial < 30; ++trial) {
        double a = rng.uniform(), b = rng.uniform() * (1.0 - a);
        LevelPopulations p{a, b, 1.0 - a - b};
        double power = 12.0 * rng.uniform();
        double t = 2e-6 * rng.uniform();
        LevelPopulations q = nvmx::evolve(m, p, power, t);
        EXPECT_NEAR(q.sum(), 1.0, 1e-9);
        EXPECT_GE(q.minus_ms0, 0.0);
        EXPECT_GE(q.minus_ms1, 0.0);
        EXPECT_GE(q.neutral, 0.0);
    }
}

TEST(RateModel, SemigroupProperty) {
    // evolve(t1+t2) == evolve(t1) then evolve(t2); the propagator is exact
    RateModel m = RateModel::orange_594();
    LevelPopulations p{0.665, 0.035, 0.3};
    for (double t1 : {5e-8, 2e-7, 1e-6}) {
        for (double t2 : {1e-7, 7e-7}) {
            LevelPopulations one = nvmx::evolve(m, p, 6.0, t1 + t2);
            LevelPopulations two = nvmx::evolve(m, nvmx::evolve(m, p, 6.0, t1), 6.0, t2);
            EXPECT_NEAR(one.minus_ms0, two.minus_ms0, 1e-8);
            EXPECT_NEAR(one.minus_ms1, two.minus_ms1, 1e-8);
            EXPECT_NEAR(one.neutral, two.neutral, 1e-8);
        }
    }
}

TEST(RateModel, MatrixExponentialMatchesSeriesOracle) {
    // brute-force truncated Taylor series on a scaled step, squared back up
    RateModel m = RateModel::orange_594();
    Eigen::Matrix3d g = m.generator(6.0) * 250e-9;
    Eigen::Matrix3d scaled = g / 1024.0;
    Eigen::Matrix3d series = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d term = Eigen::Matrix3d::Identity();
    for (int k = 1; k <= 12; ++k) {
        term = term * scaled / static_cast<double>(k);
        series += term;
    }
    for (int s = 0; s < 10; ++s) series = series * series;
    Eigen::Matrix3d lib = g.exp();
    EXPECT_LT((lib - series).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RateModel, GeneratorColumnsSumToZero) {
    for (auto m : {RateModel::orange_594(), RateModel::red_637()}) {
        Eigen::Matrix3d g = m.generator(9.0);
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(g.col(c).sum(), 0.0, 1e-9);
    }
}

TEST(RateModel, PresetOrdering) {
    EXPECT_GT(RateModel::orange_594().coeff.recomb_hz, RateModel::red_637().coeff.recomb_hz);
    EXPECT_THROW(nvmx::rate_model_preset("green_520"), std::invalid_argument);
}

TEST(Scc, ZeroPulseGivesIdenticalDistributions) {
    auto d = nvmx::scc_distributions(RateModel::orange_594(), canonical_site(), 6.0, 0.0);
    EXPECT_NEAR(d.no_pi.w_minus, d.pi.w_minus, 1e-12);
    EXPECT_NEAR(d.no_pi.w_minus, 0.7, 1e-12);
    EXPECT_TRUE(std::isinf(nvmx::scc_sigma_r(RateModel::orange_594(), canonical_site(), 6.0, 0.0)));
}

TEST(Scc, NoRecombinationFullyIonizesEventually) {
    RateModel m = RateModel::orange_594();
    m.coeff.recomb_hz = 0.0;
    auto d = nvmx::scc_distributions(m, canonical_site(), 6.0, 1.0);  // one second
    EXPECT_NEAR(d.no_pi.w_minus, 0.0, 1e-9);
    EXPECT_NEAR(d.pi.w_minus, 0.0, 1e-9);
}

TEST(Scc, SigmaRAlwaysAboveOne) {
    RateModel m = RateModel::orange_594();
    auto grid = nvmx::log_time_grid(50e-9, 4e-6, 25);
    for (const auto& pt : nvmx::sigma_r_curve(m, canonical_site(), 6.0, grid))
        EXPECT_GE(pt.sigma_r, 1.0);
}

TEST(Scc, InteriorOptimumNearCalibratedPoint) {
    RateModel m = RateModel::orange_594();
    auto grid = nvmx::log_time_grid(50e-9, 4e-6, 60);
    auto opt = nvmx::optimal_ionization(m, canonical_site(), 6.0, grid);
    EXPECT_GT(opt.t_star_s, 200e-9);
    EXPECT_LT(opt.t_star_s, 300e-9);
    EXPECT_NEAR(opt.sigma_r_star, 12.0, 1.0);
}

TEST(Scc, GridArgminAgreesWithRefinement) {
    RateModel m = RateModel::orange_594();
    auto grid = nvmx::log_time_grid(50e-9, 4e-6, 60);
    auto curve = nvmx::sigma_r_curve(m, canonical_site(), 6.0, grid);
    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (curve[i].sigma_r < curve[best].sigma_r) best = i;
    auto opt = nvmx::optimal_ionization(m, canonical_site(), 6.0, grid);
    double spacing = grid[best + 1] - grid[best];
    EXPECT_NEAR(opt.t_star_s, curve[best].t_ion_s, spacing);
    EXPECT_LE(opt.sigma_r_star, curve[best].sigma_r + 1e-12);
}

TEST(Scc, HalvingPowerShiftsOptimumLater) {
    RateModel m = RateModel::orange_594();
    auto grid = nvmx::log_time_grid(50e-9, 20e-6, 80);
    auto full = nvmx::optimal_ionization(m, canonical_site(), 6.0, grid);
    auto half = nvmx::optimal_ionization(m, canonical_site(), 3.0, grid);
    EXPECT_GT(half.t_star_s, full.t_star_s);
}

TEST(Scc, MultiplexLowBudgetMonotone) {
    RateModel m = RateModel::orange_594();
    auto grid = nvmx::log_time_grid(50e-9, 40e-6, 80);
    auto rows = nvmx::multiplex_scaling(m, canonical_site(), 6.0, {1, 2, 4, 8, 16}, grid);
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_GE(rows[i].sigma_r_star, rows[i - 1].sigma_r_star - 1e-9)
            << "n=" << rows[i].n_sites;
}

TEST(Scc, MultiplexHighBudgetDipsThenRises) {
    RateModel m = RateModel::orange_594();
    auto grid = nvmx::log_time_grid(50e-9, 40e-6, 80);
    auto rows = nvmx::multiplex_scaling(m, canonical_site(), 30.0, {1, 2, 3, 5, 8, 12, 16}, grid);
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].sigma_r_star < rows[best].sigma_r_star) best = i;
    EXPECT_GT(best, 0u) << "optimum should not be the single-site point";
    EXPECT_LT(best, rows.size() - 1) << "optimum should not be the largest array";
    EXPECT_GT(rows[0].sigma_r_star, rows[best].sigma_r_star + 0.05);
    EXPECT_GT(rows.back().sigma_r_star, rows[best].sigma_r_star + 0.05);
}

TEST(Scc, RedFloorBeatsOrangeFloor) {
    auto grid = nvmx::log_time_grid(50e-9, 40e-6, 80);
    NVSite site = canonical_site();
    auto orange = nvmx::multiplex_scaling(RateModel::orange_594(), site, 30.0,
                                          {1, 2, 3, 5, 8, 12, 16}, grid);
    auto red = nvmx::multiplex_scaling(RateModel::red_637(), site, 30.0,
                                       {1, 2, 3, 5, 8, 12, 16}, grid);
    auto floor = [](const std::vector<nvmx::MultiplexPoint>& rows) {
        double f = rows[0].sigma_r_star;
        for (const auto& r : rows) f = std::min(f, r.sigma_r_star);
        return f;
    };
    EXPECT_LT(floor(red), floor(orange));
}

TEST(Scc, TrendsSurvive20PercentPerturbations) {
    // qualitative claims should not hinge on the exact calibration numbers
    nvmx::RngStream rng = nvmx::RngStream::root(33);
    auto grid = nvmx::log_time_grid(50e-9, 40e-6, 60);
    NVSite site = canonical_site();
    for (int trial = 0; trial < 5; ++trial) {
        RateModel m = RateModel::orange_594();
        auto jitter = [&rng]() { return 0.8 + 0.4 * rng.uniform(); };
        m.coeff.ion_ms0_hz *= jitter();
        m.coeff.ion_ms1_hz *= jitter();
        if (m.coeff.ion_ms1_hz <= m.coeff.ion_ms0_hz)
            m.coeff.ion_ms1_hz = m.coeff.ion_ms0_hz * 3.0;
        m.coeff.recomb_hz *= jitter();
        m.coeff.mixing_hz *= jitter();

        auto low = nvmx::multiplex_scaling(m, site, 6.0, {1, 4, 16}, grid);
        EXPECT_GE(low[1].sigma_r_star, low[0].sigma_r_star - 1e-9) << "trial " << trial;
        EXPECT_GE(low[2].sigma_r_star, low[1].sigma_r_star - 1e-9) << "trial " << trial;

        auto full = nvmx::optimal_ionization(m, site, 6.0, grid);
        auto half = nvmx::optimal_ionization(m, site, 3.0, grid);
        EXPECT_GT(half.t_star_s, full.t_star_s) << "trial " << trial;
    }
}

TEST(Scc, InitialStateHelper) {
    LevelPopulations p = nvmx::scc_initial_state(0.7, 0.95, false);
    EXPECT_NEAR(p.minus_ms0, 0.665, 1e-12);
    EXPECT_NEAR(p.minus_ms1, 0.035, 1e-12);
    EXPECT_NEAR(p.neutral, 0.3, 1e-12);
    LevelPopulations q = nvmx::scc_initial_state(0.7, 0.95, true);
    EXPECT_NEAR(q.minus_ms1, 0.665, 1e-12);
    EXPECT_THROW(nvmx::scc_initial_state(1.2, 0.9, false), std::invalid_argument);
}
