#include <doctest.h>

#include "sphw/errors.hpp"
#include "sphw/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace sphw;

namespace {

// Successive shortest paths with Bellman-Ford; a test-side exact oracle for
// small transport problems, independent of the network simplex.
double ssp_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    const std::size_t n1 = mu.size();
    const std::size_t n2 = nu.size();
    const std::size_t s = n1 + n2;
    const std::size_t t = s + 1;
    const std::size_t nodes = t + 1;
    struct Arc {
        std::size_t to;
        double cap;
        double cost;
        std::size_t rev;
    };
    std::vector<std::vector<Arc>> g(nodes);
    auto add = [&](std::size_t u, std::size_t v, double cap, double cost) {
        g[u].push_back({v, cap, cost, g[v].size()});
        g[v].push_back({u, 0.0, -cost, g[u].size() - 1});
    };
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n1; ++i) add(s, i, mu.weights[i], 0.0);
    for (std::size_t j = 0; j < n2; ++j) add(n1 + j, t, nu.weights[j], 0.0);
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) add(i, n1 + j, inf, norm(mu.points[i] - nu.points[j]));
    }
    double cost = 0.0;
    double shipped = 0.0;
    while (shipped < 1.0 - 1e-13) {
        std::vector<double> dist(nodes, inf);
        std::vector<std::pair<std::size_t, std::size_t>> prev(nodes, {nodes, 0});
        dist[s] = 0.0;
        for (std::size_t it = 0; it < nodes; ++it) {
            bool changed = false;
            for (std::size_t u = 0; u < nodes; ++u) {
                if (dist[u] == inf) continue;
                for (std::size_t k = 0; k < g[u].size(); ++k) {
                    const Arc& a = g[u][k];
                    if (a.cap > 1e-15 && dist[u] + a.cost < dist[a.to] - 1e-14) {
                        dist[a.to] = dist[u] + a.cost;
                        prev[a.to] = {u, k};
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        if (dist[t] == inf) break;
        double push = inf;
        for (std::size_t v = t; v != s; v = prev[v].first) push = std::min(push, g[prev[v].first][prev[v].second].cap);
        for (std::size_t v = t; v != s; v = prev[v].first) {
            Arc& a = g[prev[v].first][prev[v].second];
            a.cap -= push;
            g[a.to][a.rev].cap += push;
        }
        cost += push * dist[t];
        shipped += push;
    }
    return cost;
}

DiscreteMeasure random_measure(std::mt19937_64& rng, int dim, std::size_t n, double spread = 1.0) {
    std::uniform_real_distribution<double> u(-spread, spread);
    std::uniform_real_distribution<double> w(0.05, 1.0);
    DiscreteMeasure m;
    m.dim = dim;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m.points.push_back({u(rng), dim == 2 ? u(rng) : 0.0});
        m.weights.push_back(w(rng));
        total += m.weights.back();
    }
    for (double& x : m.weights) x /= total;
    return m;
}

DiscreteMeasure shifted(DiscreteMeasure m, Vec2 c) {
    for (Vec2& p : m.points) p += c;
    return m;
}

} // namespace

TEST_CASE("1D distance between point masses") {
    CHECK(w1_1d_discrete(DiscreteMeasure::dirac(1, {0.3, 0.0}), DiscreteMeasure::dirac(1, {-1.2, 0.0})) ==
          doctest::Approx(1.5));
    const DiscreteMeasure mu{1, {{0.0, 0.0}, {2.0, 0.0}}, {0.5, 0.5}};
    const DiscreteMeasure nu = DiscreteMeasure::dirac(1, {1.0, 0.0});
    CHECK(w1_1d_discrete(mu, nu) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(w1_1d_discrete(mu, mu) == 0.0);
}

TEST_CASE("LP distance examples") {
    CHECK(w1_lp(DiscreteMeasure::dirac(2, {0.0, 0.0}), DiscreteMeasure::dirac(2, {3.0, 4.0})).distance ==
          doctest::Approx(5.0).epsilon(1e-15));
    const DiscreteMeasure corners = DiscreteMeasure::uniform(2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    const DiscreteMeasure center = DiscreteMeasure::dirac(2, {0.5, 0.5});
    const LpResult r = w1_lp(corners, center);
    CHECK(r.distance == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
    CHECK(r.plan.entries.size() == 4);
    CHECK(r.plan.marginal_error(corners, center) <= 1e-15);
}

TEST_CASE("dimension mismatch and budget errors") {
    const DiscreteMeasure a = DiscreteMeasure::dirac(1, {0.0, 0.0});
    const DiscreteMeasure b = DiscreteMeasure::dirac(2, {0.0, 0.0});
    CHECK_THROWS_AS(w1_1d_discrete(a, b), MismatchError);
    CHECK_THROWS_AS(w1_lp(a, b), MismatchError);
    CHECK_THROWS_AS(w1_1d_discrete(b, b), MismatchError);

    std::mt19937_64 rng(2);
    const DiscreteMeasure m = random_measure(rng, 2, 20);
    LpOptions tight;
    tight.max_arcs = 100;
    CHECK_THROWS_AS(w1_lp(m, m, tight), ResourceError);

    DiscreteMeasure bad = m;
    bad.weights[0] += 0.1;
    CHECK_THROWS_AS(w1_lp(bad, m), InvalidParameter);
}

TEST_CASE("LP agrees with the exact 1D solver on random instances") {
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<std::size_t> count(1, 32);
    for (int trial = 0; trial < 100; ++trial) {
        const DiscreteMeasure mu = random_measure(rng, 1, count(rng));
        const DiscreteMeasure nu = random_measure(rng, 1, count(rng));
        const double exact = w1_1d_discrete(mu, nu);
        const LpResult lp = w1_lp(mu, nu);
        REQUIRE(std::abs(lp.distance - exact) <= 1e-9);
        REQUIRE(lp.plan.marginal_error(mu, nu) <= 1e-9);
        REQUIRE(lp.plan.min_mass() >= 0.0);
    }
}

TEST_CASE("LP agrees with a successive-shortest-path oracle in 2D") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> count(1, 10);
    for (int trial = 0; trial < 60; ++trial) {
        const DiscreteMeasure mu = random_measure(rng, 2, count(rng));
        const DiscreteMeasure nu = random_measure(rng, 2, count(rng));
        REQUIRE(w1_lp(mu, nu).distance == doctest::Approx(ssp_oracle(mu, nu)).epsilon(1e-10));
    }
}

TEST_CASE("LP handles degenerate uniform grids") {
    // Equal-mass grids are highly degenerate for the simplex.
    auto grid = [](std::size_t k) {
        std::vector<Vec2> pts;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) pts.push_back({(i + 0.5) / k, (j + 0.5) / k});
        }
        return DiscreteMeasure::uniform(2, pts);
    };
    for (std::size_t k : {2u, 4u, 8u, 16u}) {
        const DiscreteMeasure coarse = grid(k);
        const DiscreteMeasure fine = grid(2 * k);
        const LpResult r = w1_lp(coarse, fine);
        // Each coarse atom splits onto the four fine atoms at diagonal
        // offset 1/(4k).
        CHECK(r.distance == doctest::Approx(std::sqrt(2.0) / (4.0 * k)).epsilon(1e-12));
        CHECK(r.plan.marginal_error(coarse, fine) <= 1e-12);
    }
}

TEST_CASE("metric axioms on random measures") {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<std::size_t> count(1, 16);
    for (int dim : {1, 2}) {
        for (int trial = 0; trial < 30; ++trial) {
            const DiscreteMeasure a = random_measure(rng, dim, count(rng));
            const DiscreteMeasure b = random_measure(rng, dim, count(rng));
            const DiscreteMeasure c = random_measure(rng, dim, count(rng));
            for (bool use_lp : {false, true}) {
                if (!use_lp && dim != 1) continue;
                auto w = [&](const DiscreteMeasure& x, const DiscreteMeasure& y) {
                    return use_lp ? w1_lp(x, y).distance : w1_1d_discrete(x, y);
                };
                const double ab = w(a, b);
                REQUIRE(ab >= 0.0);
                REQUIRE(w(a, a) <= 1e-12);
                REQUIRE(std::abs(ab - w(b, a)) <= 1e-12);
                REQUIRE(w(a, c) <= ab + w(b, c) + 1e-9);
            }
        }
    }
}

TEST_CASE("translation equivariance") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const DiscreteMeasure a = random_measure(rng, 2, 8);
        const DiscreteMeasure b = random_measure(rng, 2, 11);
        const Vec2 c{0.37, -1.1};
        const double base = w1_lp(a, b).distance;
        CHECK(std::abs(w1_lp(shifted(a, c), shifted(b, c)).distance - base) <= 1e-12);
        CHECK(std::abs(w1_lp(shifted(a, c), b).distance - base) <= norm(c) + 1e-12);

        const DiscreteMeasure a1 = random_measure(rng, 1, 9);
        const DiscreteMeasure b1 = random_measure(rng, 1, 5);
        const Vec2 c1{2.5, 0.0};
        CHECK(std::abs(w1_1d_discrete(shifted(a1, c1), shifted(b1, c1)) - w1_1d_discrete(a1, b1)) <= 1e-12);
    }
}

TEST_CASE("dual certificate proves LP optimality") {
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<std::size_t> count(1, 64);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = trial % 2 ? 2 : 1;
        const DiscreteMeasure mu = random_measure(rng, dim, count(rng));
        const DiscreteMeasure nu = random_measure(rng, dim, count(rng));
        const LpResult r = w1_lp(mu, nu);
        const DualCertificate cert = certify_plan(mu, nu, r.plan);
        REQUIRE_FALSE(cert.negative_cycle);
        REQUIRE(std::abs(cert.gap) <= 1e-7);
    }
}

TEST_CASE("dual certificate rejects a suboptimal plan") {
    const DiscreteMeasure mu{1, {{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5}};
    const DiscreteMeasure nu{1, {{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5}};
    TransportPlan crossed;
    crossed.entries = {{0, 1, 0.5}, {1, 0, 0.5}};
    crossed.cost = 1.0;
    const DualCertificate cert = certify_plan(mu, nu, crossed);
    CHECK(cert.negative_cycle);
}

TEST_CASE("distance against a piecewise-constant density") {
    const auto uniform = PiecewiseConstantDensity1D::uniform(0.0, 1.0);
    CHECK(w1_1d_vs_density(DiscreteMeasure::dirac(1, {0.5, 0.0}), uniform) == doctest::Approx(0.25).epsilon(1e-15));
    for (std::size_t n : {1u, 2u, 4u, 7u, 64u}) {
        std::vector<Vec2> pts;
        for (std::size_t i = 1; i <= n; ++i) pts.push_back({(i - 0.5) / n, 0.0});
        CHECK(w1_1d_vs_density(DiscreteMeasure::uniform(1, pts), uniform) ==
              doctest::Approx(1.0 / (4.0 * n)).epsilon(1e-12));
    }
    // Point mass outside the density's support: |x - 1/2| for x = 3.
    CHECK(w1_1d_vs_density(DiscreteMeasure::dirac(1, {3.0, 0.0}), uniform) == doctest::Approx(2.5));

    const PiecewiseConstantDensity1D unnormalized{{0.0, 1.0}, {2.0}};
    CHECK_THROWS_AS(w1_1d_vs_density(DiscreteMeasure::dirac(1, {0.5, 0.0}), unnormalized), InvalidParameter);
}

TEST_CASE("density distance matches a fine discretization") {
    // Two-step density: 0.5 on [0, 1), 1.5 on [1, 1.5), 0 elsewhere.
    // Cross-checked against the discrete solver using a fine midpoint grid.
    const PiecewiseConstantDensity1D rho{{0.0, 1.0, 1.5}, {0.5, 1.0}};
    const DiscreteMeasure mu{1, {{0.2, 0.0}, {0.9, 0.0}, {1.3, 0.0}}, {0.3, 0.3, 0.4}};
    DiscreteMeasure fine;
    fine.dim = 1;
    const std::size_t m = 3 << 17; // weights are exact powers of two
    for (std::size_t i = 0; i < m; ++i) {
        const double x = 1.5 * (i + 0.5) / m;
        fine.points.push_back({x, 0.0});
        fine.weights.push_back((x < 1.0 ? 0.5 : 1.0) * 1.5 / m);
    }
    CHECK(w1_1d_vs_density(mu, rho) == doctest::Approx(w1_1d_discrete(mu, fine)).epsilon(1e-6));
}

TEST_CASE("sup over time picks the largest same-time distance") {
    auto cloud = [](double t, double offset) {
        ParticleState p;
        p.dim = 1;
        p.t = t;
        p.mass = {0.5, 0.5};
        p.pos = {{offset, 0.0}, {offset + 1.0, 0.0}};
        p.vel = {{0.0, 0.0}, {0.0, 0.0}};
        return p;
    };
    std::vector<ParticleState> a, b, c;
    for (double t : {0.0, 0.5, 1.0}) {
        a.push_back(cloud(t, 0.0));
        b.push_back(cloud(t, 0.0));
        c.push_back(cloud(t, 0.75));
    }
    const SupResult same = sup_wasserstein_over_time(a, b);
    CHECK(same.max_distance == 0.0);
    CHECK(same.argmax_time == 0.0);
    CHECK(sup_wasserstein_over_time(a, c).max_distance == doctest::Approx(0.75));

    std::vector<ParticleState> shorter(a.begin(), a.begin() + 2);
    CHECK_THROWS_AS(sup_wasserstein_over_time(a, shorter), MismatchError);
    std::vector<ParticleState> late = b;
    late[1].t = 0.6;
    CHECK_THROWS_AS(sup_wasserstein_over_time(a, late), MismatchError);
}

TEST_CASE("convergence rates") {
    CHECK(*convergence_rates({0.04, 0.02}, 1).final_rate() == doctest::Approx(-1.0));
    CHECK(*convergence_rates({0.04, 0.02}, 2).final_rate() == doctest::Approx(-0.5));
    // 0.5 log2(0.0201 / 0.04), evaluated with mpmath
    CHECK(*convergence_rates({0.04, 0.0201}, 2).final_rate() ==
          doctest::Approx(-0.496402249297898041).epsilon(1e-14));
    const RateTable t = convergence_rates({0.04, 0.0, 0.01}, 1);
    CHECK(t.has_undefined_rate());
    CHECK_FALSE(t.rows[1].rate);
    CHECK_FALSE(t.rows[2].rate);
    CHECK_THROWS_AS(convergence_rates({0.1}, 1), InvalidParameter);
}

TEST_CASE("plan CSV export") {
    TransportPlan p;
    p.entries = {{0, 2, 0.25}, {1, 0, 0.75}};
    std::ostringstream os;
    write_plan_csv(p, os);
    CHECK(os.str() == "i,j,mass\n0,2,0.25\n1,0,0.75\n");
}
