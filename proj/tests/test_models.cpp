#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "noisecal/models.hpp"

using namespace noisecal;

namespace {

Dataset make_xy(const std::vector<std::vector<double>>& xrows, const std::vector<double>& y,
                std::vector<std::string> names = {}) {
    Dataset d;
    d.X = Matrix(xrows.size(), xrows.empty() ? 0 : xrows[0].size());
    for (std::size_t i = 0; i < xrows.size(); ++i)
        for (std::size_t j = 0; j < xrows[i].size(); ++j) d.X(i, j) = xrows[i][j];
    d.y = y;
    if (names.empty())
        for (std::size_t j = 0; j < d.p(); ++j) names.push_back("x" + std::to_string(j));
    d.column_names = std::move(names);
    return d;
}

Dataset make_1d(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<std::vector<double>> rows;
    for (const double v : x) rows.push_back({v});
    return make_xy(rows, y);
}

Dataset random_linear(std::mt19937_64& rng, std::size_t n, std::size_t p, double noise_sd) {
    std::uniform_real_distribution<double> ux(40.0, 110.0);
    std::normal_distribution<double> eps(0.0, noise_sd);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    std::vector<double> beta(p);
    for (auto& b : beta) b = ux(rng) / 50.0 - 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r(p);
        double t = 5.0;
        for (std::size_t j = 0; j < p; ++j) {
            r[j] = ux(rng);
            t += beta[j] * r[j];
        }
        rows.push_back(r);
        y.push_back(t + eps(rng));
    }
    return make_xy(rows, y);
}

}  // namespace

TEST_CASE("straight-line fit on exact points") {
    const auto d = make_1d({0, 1, 2, 3, 4, 5, 6, 7, 8, 9},
                           {1, 3, 5, 7, 9, 11, 13, 15, 17, 19});  // y = 1 + 2x
    const Model m = fit_slr(d);
    const auto& lp = std::get<LinearParams>(m.params);
    CHECK(lp.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lp.slopes[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(m.predict_one(std::vector<double>{10.0}) == doctest::Approx(21.0));
}

TEST_CASE("straight-line fit minimizes squared error on a non-collinear triple") {
    // x = 0,1,2; y = 0,1,0 repeated to clear the minimum-size floor
    std::vector<double> x, y;
    for (int rep = 0; rep < 4; ++rep)
        for (int i = 0; i < 3; ++i) {
            x.push_back(i);
            y.push_back(i == 1 ? 1.0 : 0.0);
        }
    const Model m = fit_slr(make_1d(x, y));
    const auto& lp = std::get<LinearParams>(m.params);
    CHECK(lp.slopes[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(lp.intercept == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("multi-feature fit recovers exact coefficients") {
    std::mt19937_64 rng(2);
    const Dataset d = random_linear(rng, 60, 3, 0.0);
    const Model m = fit_mlr(d);
    for (std::size_t i = 0; i < d.n(); ++i)
        CHECK(m.predict_one(d.X.row(i)) == doctest::Approx(d.y[i]).epsilon(1e-9));
}

TEST_CASE("a duplicated column is reported by name") {
    std::mt19937_64 rng(4);
    Dataset d = random_linear(rng, 30, 2, 1.0);
    for (std::size_t i = 0; i < d.n(); ++i) d.X(i, 1) = 2.0 * d.X(i, 0);
    d.column_names = {"node_dba", "copy_of_node"};
    try {
        fit_mlr(d);
        FAIL("expected a rank-deficiency error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("copy_of_node") != std::string::npos);
    }
}

TEST_CASE("polynomial fit recovers a pure quadratic") {
    std::vector<double> x, y;
    for (int i = 0; i <= 20; ++i) {
        x.push_back(40.0 + 3.0 * i);
        y.push_back(x.back() * x.back());
    }
    const Model m = fit_pr(make_1d(x, y), 4);
    const auto& pp = std::get<PolyParams>(m.params);
    REQUIRE(pp.coeffs.size() == 5);
    CHECK(pp.coeffs[2] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(pp.coeffs[3]) < 1e-6);
    CHECK(std::abs(pp.coeffs[4]) < 1e-9);
    CHECK(m.predict_one(std::vector<double>{70.0}) == doctest::Approx(4900.0).epsilon(1e-8));
}

TEST_CASE("degree-one polynomial equals the straight-line fit") {
    std::mt19937_64 rng(6);
    const Dataset d = random_linear(rng, 40, 1, 2.0);
    const Model poly = fit_pr(d, 1);
    const Model line = fit_slr(d);
    for (std::size_t i = 0; i < d.n(); ++i)
        CHECK(poly.predict_one(d.X.row(i)) ==
              doctest::Approx(line.predict_one(d.X.row(i))).epsilon(1e-9));
}

TEST_CASE("segmented fit finds a planted kink") {
    std::vector<double> x, y;
    for (int i = 0; i <= 100; ++i) {
        const double xv = i / 10.0;  // 0..10, kink at 5
        x.push_back(xv);
        y.push_back(xv < 5.0 ? xv : 10.0 - xv);
    }
    SrGrid grid;
    grid.exact_midpoints = true;
    const Model m = fit_sr(make_1d(x, y), grid);
    const auto& sp = std::get<SegmentedParams>(m.params);
    CHECK(sp.breakpoint == doctest::Approx(5.0).epsilon(0.02));
    CHECK(sp.b1 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sp.b2 == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(m.predict_one(std::vector<double>{2.0}) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(m.predict_one(std::vector<double>{8.0}) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("support-vector fit with a flat target needs no support vectors") {
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
        x.push_back(50.0 + i);
        y.push_back(80.0 + 0.01 * (i % 3));  // spread 0.02 << epsilon
    }
    const Model m = fit_svr(make_1d(x, y), 10.0, 0.5, -1.0);
    const auto& sv = std::get<SvrParams>(m.params);
    CHECK(sv.support_x.rows == 0);
    CHECK(m.predict_one(std::vector<double>{55.0}) == doctest::Approx(80.01).epsilon(1e-3));
}

TEST_CASE("support-vector fit tracks a clean linear relation within epsilon") {
    std::mt19937_64 rng(8);
    const Dataset d = random_linear(rng, 60, 1, 0.0);
    const Model m = fit_svr(d, 10.0, 0.5, -1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i)
        worst = std::max(worst, std::abs(m.predict_one(d.X.row(i)) - d.y[i]));
    CHECK(worst < 1.5);  // epsilon tube plus slack at the boundary
}

TEST_CASE("depth-one tree splits step data at the step") {
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
        x.push_back(i);
        y.push_back(i < 10 ? 10.0 : 20.0);
    }
    const Model m = fit_dt(make_1d(x, y), 1, 1);
    const auto& tp = std::get<TreeParams>(m.params);
    REQUIRE(tp.nodes.size() == 3);
    CHECK(tp.nodes[0].feature == 0);
    CHECK(tp.nodes[0].threshold == doctest::Approx(9.5));
    CHECK(m.predict_one(std::vector<double>{3.0}) == doctest::Approx(10.0));
    CHECK(m.predict_one(std::vector<double>{15.0}) == doctest::Approx(20.0));
}

TEST_CASE("tree leaves respect the minimum size") {
    std::mt19937_64 rng(10);
    const Dataset d = random_linear(rng, 200, 2, 5.0);
    const Model m = fit_dt(d, 8, 12);
    const auto& tp = std::get<TreeParams>(m.params);
    // route every training row and count arrivals per leaf
    std::vector<std::size_t> hits(tp.nodes.size(), 0);
    for (std::size_t i = 0; i < d.n(); ++i) {
        int node = 0;
        while (tp.nodes[node].feature >= 0) {
            const auto& nd = tp.nodes[node];
            node = d.X(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        ++hits[node];
    }
    for (std::size_t k = 0; k < tp.nodes.size(); ++k)
        if (tp.nodes[k].feature < 0) CHECK(hits[k] >= 12);
}

TEST_CASE("a one-tree forest without bagging is the plain tree") {
    std::mt19937_64 rng(12);
    const Dataset d = random_linear(rng, 120, 2, 4.0);
    const Model tree = fit_dt(d, 5, 5);
    const Model forest = fit_rfr(d, 1, 5, 2, false, 99);
    for (std::size_t i = 0; i < d.n(); ++i)
        CHECK(forest.predict_one(d.X.row(i)) == doctest::Approx(tree.predict_one(d.X.row(i))));
}

TEST_CASE("forest fits are deterministic per seed") {
    std::mt19937_64 rng(14);
    const Dataset d = random_linear(rng, 150, 2, 4.0);
    const Model a = fit_rfr(d, 30, 5, 1, true, 7);
    const Model b = fit_rfr(d, 30, 5, 1, true, 7);
    const Model c = fit_rfr(d, 30, 5, 1, true, 8);
    bool differs = false;
    for (std::size_t i = 0; i < d.n(); ++i) {
        CHECK(a.predict_one(d.X.row(i)) == b.predict_one(d.X.row(i)));
        differs |= a.predict_one(d.X.row(i)) != c.predict_one(d.X.row(i));
    }
    CHECK(differs);
}

TEST_CASE("forest predictions stay inside the training target range") {
    std::mt19937_64 rng(16);
    const Dataset d = random_linear(rng, 150, 2, 4.0);
    const Model m = fit_rfr(d, 50, 6, 1, true, 3);
    const double lo = *std::min_element(d.y.begin(), d.y.end());
    const double hi = *std::max_element(d.y.begin(), d.y.end());
    std::uniform_real_distribution<double> ux(0.0, 160.0);
    for (int rep = 0; rep < 200; ++rep) {
        const double pred = m.predict_one(std::vector<double>{ux(rng), ux(rng)});
        CHECK(pred >= lo - 1e-9);
        CHECK(pred <= hi + 1e-9);
    }
}

TEST_CASE("averaging more trees shrinks the seed-to-seed spread") {
    std::mt19937_64 rng(18);
    const Dataset d = random_linear(rng, 200, 2, 6.0);
    auto spread = [&](int n_trees) {
        std::vector<double> at_probe;
        const std::vector<double> probe{75.0, 60.0};
        for (std::uint64_t s = 0; s < 12; ++s)
            at_probe.push_back(fit_rfr(d, n_trees, 5, 1, true, s).predict_one(probe));
        const auto [lo, hi] = std::minmax_element(at_probe.begin(), at_probe.end());
        return *hi - *lo;
    };
    CHECK(spread(100) < spread(1));
}

TEST_CASE("the dispatcher applies documented defaults") {
    std::mt19937_64 rng(20);
    const Dataset d = random_linear(rng, 60, 1, 2.0);
    const Model pr = fit_model(d, {Family::Pr, {}});
    CHECK(std::get<PolyParams>(pr.params).coeffs.size() == 5);  // degree 4
    const Model direct = fit_dt(d, 5, 5);
    const Model via = fit_model(d, {Family::Dt, {}});
    for (std::size_t i = 0; i < d.n(); ++i)
        CHECK(via.predict_one(d.X.row(i)) == doctest::Approx(direct.predict_one(d.X.row(i))));
}

TEST_CASE("every family round-trips through serialization") {
    std::mt19937_64 rng(22);
    const Dataset d1 = random_linear(rng, 80, 1, 3.0);
    const Dataset d2 = random_linear(rng, 80, 2, 3.0);
    const std::vector<std::pair<const Dataset*, FitSpec>> cases = {
        {&d1, {Family::Slr, {}}},
        {&d2, {Family::Mlr, {}}},
        {&d1, {Family::Pr, {{"degree", 3}}}},
        {&d1, {Family::Sr, {}}},
        {&d1, {Family::Svr, {}}},
        {&d2, {Family::Dt, {}}},
        {&d2, {Family::Rfr, {{"n_trees", 20}}}},
    };
    for (const auto& [d, spec] : cases) {
        const Model m = fit_model(*d, spec);
        const Model back = deserialize_model(serialize_model(m));
        CHECK(back.family == m.family);
        CHECK(back.n_features == m.n_features);
        for (std::size_t i = 0; i < d->n(); ++i)
            CHECK(back.predict_one(d->X.row(i)) ==
                  doctest::Approx(m.predict_one(d->X.row(i))).epsilon(1e-12));
    }
}

TEST_CASE("tiny or non-finite datasets are rejected") {
    Dataset d = make_1d({1, 2, 3}, {1, 2, 3});
    CHECK_THROWS_AS(fit_slr(d), Error);
    Dataset bad = make_1d({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    bad.y[4] = std::nan("");
    CHECK_THROWS_AS(fit_slr(bad), Error);
}
