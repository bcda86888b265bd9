#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "lcq/actions.hpp"
#include "lcq/rng.hpp"

using namespace lcq;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Brute-force oracle: best payoff over random points on the lp sphere of
// radius L. Every sample is feasible, so the oracle never overshoots the sup.
double sphere_sample_max(std::span<const double> g, double L, NormIndex p, int samples, Rng& rng) {
    const int m = static_cast<int>(g.size());
    double best = -1e300;
    std::vector<double> b(m);
    for (int s = 0; s < samples; ++s) {
        double norm = 0.0;
        while (norm == 0.0) {
            for (int i = 0; i < m; ++i) b[i] = rng.normal();
            norm = p.norm(b);
        }
        for (int i = 0; i < m; ++i) b[i] *= L / norm;
        best = std::max(best, dot(g, b));
    }
    return best;
}

}  // namespace

TEST_CASE("dual exponents") {
    CHECK(NormIndex(2.0).dual().value() == 2.0);
    CHECK(NormIndex(1.0).dual().is_inf());
    CHECK(NormIndex::inf().dual().value() == 1.0);
    CHECK(NormIndex(3.0).dual().value() == doctest::Approx(1.5).epsilon(1e-15));
    CHECK_THROWS_AS(NormIndex(0.5), std::invalid_argument);

    Rng rng(1);
    for (int k = 0; k < 50; ++k) {
        const double p = rng.uniform(1.001, 20.0);
        const NormIndex back = NormIndex(p).dual().dual();
        CHECK(back.value() == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(dual_exponent(NormIndex::one()).is_inf());
}

TEST_CASE("maximizer closed forms on the documented cases") {
    {
        const auto b = hamiltonian_maximizer(std::vector<double>{3, 4}, 1.0, NormIndex::two());
        CHECK(b[0] == doctest::Approx(0.6).epsilon(1e-13));
        CHECK(b[1] == doctest::Approx(0.8).epsilon(1e-13));
    }
    {
        const auto b = hamiltonian_maximizer(std::vector<double>{3, 4}, 2.0, NormIndex::one());
        CHECK(b[0] == 0.0);
        CHECK(b[1] == 2.0);
    }
    {
        const auto b = hamiltonian_maximizer(std::vector<double>{3, -4}, 2.0, NormIndex::inf());
        CHECK(b[0] == 2.0);
        CHECK(b[1] == -2.0);
    }
    {
        // p = 3, g = (1, 1): both components L / 2^(1/3); frozen value checked
        // against the sampled-sphere oracle below.
        const auto b = hamiltonian_maximizer(std::vector<double>{1, 1}, 1.0, NormIndex(3.0));
        CHECK(b[0] == doctest::Approx(0.7937005259840998).epsilon(1e-12));
        CHECK(b[1] == doctest::Approx(0.7937005259840998).epsilon(1e-12));
        CHECK(NormIndex(3.0).norm(b) == doctest::Approx(1.0).epsilon(1e-12));
        const double payoff = dot(std::vector<double>{1.0, 1.0}, b);
        CHECK(payoff == doctest::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(1e-12));
        Rng rng(77);
        CHECK(payoff >=
              sphere_sample_max(std::vector<double>{1, 1}, 1.0, NormIndex(3.0), 100000, rng) -
                  1e-6);
    }
}

TEST_CASE("maximizer beats sampled-sphere oracle and saturates Hoelder") {
    Rng rng(21);
    const double ps[] = {1.0, 1.5, 2.0, 3.0, std::numeric_limits<double>::infinity()};
    for (int m = 1; m <= 3; ++m) {
        for (double pv : ps) {
            const NormIndex p(pv);
            for (int trial = 0; trial < 8; ++trial) {
                std::vector<double> g(m);
                for (auto& c : g) c = rng.normal();
                const double L = rng.uniform(0.1, 4.0);
                const auto b = hamiltonian_maximizer(g, L, p);
                CHECK(p.norm(b) <= L + 1e-9);
                const double payoff = dot(g, b);
                CHECK(payoff >= sphere_sample_max(g, L, p, 20000, rng) - 1e-6);
                if (pv > 1.0 && !p.is_inf()) {
                    const double holder = L * p.dual().norm(g);
                    CHECK(payoff == doctest::Approx(holder).epsilon(1e-10));
                }
            }
        }
    }
}

TEST_CASE("maximizer edge cases") {
    CHECK(hamiltonian_maximizer(std::vector<double>{0, 0}, 3.0, NormIndex::two()) ==
          std::vector<double>{0, 0});
    CHECK_THROWS_AS(
        (void)hamiltonian_maximizer(std::vector<double>{1.0}, -1.0, NormIndex::two()),
        std::invalid_argument);
    // p=1 ties break at the lowest index.
    const auto b = hamiltonian_maximizer(std::vector<double>{2, -2}, 1.0, NormIndex::one());
    CHECK(b[0] == 1.0);
    CHECK(b[1] == 0.0);
    // Scale equivariance.
    Rng rng(31);
    for (int k = 0; k < 40; ++k) {
        std::vector<double> g{rng.normal(), rng.normal(), rng.normal()};
        const double c = std::exp(rng.uniform(-8, 8));
        std::vector<double> gc(g);
        for (auto& v : gc) v *= c;
        for (double pv : {1.0, 1.7, 2.0, 4.0}) {
            const auto b1 = hamiltonian_maximizer(g, 2.0, NormIndex(pv));
            const auto b2 = hamiltonian_maximizer(gc, 2.0, NormIndex(pv));
            for (int i = 0; i < 3; ++i) CHECK(b1[i] == doctest::Approx(b2[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("clip_box equals projection") {
    const BoxConstraint box({-1, -1}, {1, 1});
    CHECK(clip_box(std::vector<double>{1.5, 0.2}, box) == std::vector<double>{1.0, 0.2});
    CHECK(clip_box(std::vector<double>{0.3, -0.9}, box) == std::vector<double>{0.3, -0.9});
    CHECK(clip_box(std::vector<double>{-5, -5}, box) == std::vector<double>{-1.0, -1.0});

    // Sampled-projection oracle: no box point is closer than the clip.
    Rng rng(41);
    const std::vector<double> a{-5, -5};
    const auto c = clip_box(a, box);
    const double dc = std::hypot(a[0] - c[0], a[1] - c[1]);
    for (int k = 0; k < 100000; ++k) {
        const double bx = rng.uniform(-1, 1), by = rng.uniform(-1, 1);
        const double d = std::hypot(a[0] - bx, a[1] - by);
        CHECK(dc <= d + 1e-12);
    }
}

TEST_CASE("clip_box is idempotent and 1-Lipschitz in sup norm") {
    const BoxConstraint box({-2, 0, -1}, {1, 3, 1});
    Rng rng(43);
    for (int k = 0; k < 300; ++k) {
        std::vector<double> u{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)};
        std::vector<double> v{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)};
        const auto cu = clip_box(u, box);
        CHECK(clip_box(cu, box) == cu);
        const auto cv = clip_box(v, box);
        double duv = 0.0, dcucv = 0.0;
        for (int i = 0; i < 3; ++i) {
            duv = std::max(duv, std::abs(u[i] - v[i]));
            dcucv = std::max(dcucv, std::abs(cu[i] - cv[i]));
        }
        CHECK(dcucv <= duv + 1e-15);
    }
}

TEST_CASE("tangent cone projection on faces and corners") {
    const BoxConstraint box({-1, -1}, {1, 1});
    // Interior: unchanged.
    CHECK(tangent_cone_project(std::vector<double>{2, 3}, std::vector<double>{0.2, -0.4}, box) ==
          std::vector<double>{2, 3});
    // Upper face in the first coordinate.
    CHECK(tangent_cone_project(std::vector<double>{2, 3}, std::vector<double>{1.0, 0.0}, box) ==
          std::vector<double>{0, 3});
    // All-upper corner: both components forced nonpositive.
    CHECK(tangent_cone_project(std::vector<double>{2, 3}, std::vector<double>{1.0, 1.0}, box) ==
          std::vector<double>{0, 0});
    CHECK(tangent_cone_project(std::vector<double>{-2, 3}, std::vector<double>{1.0, 1.0}, box) ==
          std::vector<double>{-2, 0});
    CHECK_THROWS_AS((void)tangent_cone_project(std::vector<double>{1, 1},
                                               std::vector<double>{1.5, 0.0}, box),
                    std::invalid_argument);
}

TEST_CASE("tangent cone projection is homogeneous and norm-nonincreasing") {
    const BoxConstraint box({-1, -1, -1}, {1, 1, 1});
    Rng rng(47);
    const NormIndex two = NormIndex::two();
    for (int k = 0; k < 500; ++k) {
        std::vector<double> a(3), v(3);
        for (int i = 0; i < 3; ++i) {
            const int place = static_cast<int>(rng.below(3));
            a[i] = place == 0 ? -1.0 : (place == 1 ? 1.0 : rng.uniform(-1, 1));
            v[i] = rng.normal();
        }
        const auto pv = tangent_cone_project(v, a, box);
        CHECK(two.norm(pv) <= two.norm(v) + 1e-15);
        const double c = rng.uniform(0.1, 5.0);
        std::vector<double> vc(v);
        for (auto& t : vc) t *= c;
        const auto pvc = tangent_cone_project(vc, a, box);
        for (int i = 0; i < 3; ++i) CHECK(pvc[i] == doctest::Approx(c * pv[i]).epsilon(1e-12));
        // Scaled-gradient projections never exceed L.
        const double L = rng.uniform(0.1, 3.0);
        const double nv = two.norm(v);
        if (nv > 0) {
            std::vector<double> dir(v);
            for (auto& t : dir) t *= L / nv;
            CHECK(two.norm(tangent_cone_project(dir, a, box)) <= L + 1e-12);
        }
    }
}

TEST_CASE("constrained directions") {
    const BoxConstraint box({-1, -1}, {1, 1});
    // Interior box_cap: pure sign rule.
    CHECK(constrained_direction(std::vector<double>{1, -2}, std::vector<double>{0.0, 0.0}, box,
                                3.0, ConeMode::box_cap) == std::vector<double>{3, -3});
    // Upper corner: sup over [-L, 0]^m.
    CHECK(constrained_direction(std::vector<double>{1, -2}, std::vector<double>{1.0, 1.0}, box,
                                3.0, ConeMode::box_cap) == std::vector<double>{0, -3});
    // Interior l2_cap reduces to the l2 maximizer.
    const auto b = constrained_direction(std::vector<double>{3, 4}, std::vector<double>{0.0, 0.0},
                                         box, 1.0, ConeMode::l2_cap);
    CHECK(b[0] == doctest::Approx(0.6).epsilon(1e-13));
    CHECK(b[1] == doctest::Approx(0.8).epsilon(1e-13));
}

TEST_CASE("step_action modes agree in the interior") {
    const BoxConstraint box({-1, -1}, {1, 1});
    Rng rng(53);
    int checked = 0;
    for (int k = 0; k < 400; ++k) {
        std::vector<double> a{rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9)};
        std::vector<double> g{rng.normal(), rng.normal()};
        const double L = rng.uniform(0.1, 2.0);
        const double h = rng.uniform(0.001, 0.05);
        const auto clip = step_action(a, g, L, NormIndex::two(), h, StepMode::euler_clip, box);
        const auto cone = step_action(a, g, L, NormIndex::two(), h, StepMode::euler_cone, box);
        const auto unclipped = step_action(a, g, L, NormIndex::two(), h, StepMode::free);
        if (box.contains(unclipped, -1e-9)) {  // strictly interior step
            ++checked;
            for (int i = 0; i < 2; ++i) CHECK(clip[i] == doctest::Approx(cone[i]).epsilon(1e-12));
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("step_action corner and h = 0 behavior") {
    const BoxConstraint box({-1, -1}, {1, 1});
    const std::vector<double> corner{1.0, 1.0};
    const std::vector<double> g{2.0, 1.0};  // pushes further out
    const auto cone = step_action(corner, g, 1.0, NormIndex::two(), 0.01, StepMode::euler_cone, box);
    CHECK(cone == corner);
    const auto clip = step_action(corner, g, 1.0, NormIndex::two(), 0.01, StepMode::euler_clip, box);
    CHECK(clip == corner);
    for (StepMode mode : {StepMode::free, StepMode::euler_clip, StepMode::euler_cone}) {
        const auto same = step_action(corner, g, 1.0, NormIndex::two(), 0.0, mode, box);
        CHECK(same == corner);
    }
    CHECK_THROWS_AS((void)step_action(corner, g, 1.0, NormIndex::two(), 0.01,
                                      StepMode::euler_clip, std::nullopt),
                    std::invalid_argument);
}

TEST_CASE("rollout accumulates the discounted geometric sum for constant reward") {
    ControlProblem still;
    still.name = "still";
    still.state_dim = 1;
    still.action_dim = 1;
    still.discount = 1.0;
    still.dynamics = [](std::span<const double>, std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
    };
    still.reward = [](std::span<const double>, std::span<const double>) { return 3.0; };
    auto zero_grad = [](std::span<const double>, std::span<const double> a) {
        return std::vector<double>(a.size(), 0.0);
    };
    const auto traj = rollout(still, zero_grad, std::vector<double>{0.0},
                              std::vector<double>{0.0}, 1.0, NormIndex::two(), 0.01, 10000,
                              StepMode::free);
    CHECK(std::abs(traj.discounted_return - 3.0) <= 0.01 * 3.0);
    // L = 0 keeps the action constant under mode free.
    const auto traj0 = rollout(still, zero_grad, std::vector<double>{0.0},
                               std::vector<double>{0.4}, 0.0, NormIndex::two(), 0.01, 50,
                               StepMode::free);
    for (const auto& a : traj0.actions) CHECK(a[0] == 0.4);
}

TEST_CASE("noiseless rollouts obey the Lipschitz action constraint") {
    ControlProblem drift;
    drift.name = "drift";
    drift.state_dim = 1;
    drift.action_dim = 2;
    drift.discount = 1.0;
    drift.dynamics = [](std::span<const double> x, std::span<const double>, std::span<double> out) {
        out[0] = -x[0];
    };
    drift.reward = [](std::span<const double> x, std::span<const double> a) {
        return -x[0] * x[0] - a[0] * a[0] - a[1] * a[1];
    };
    Rng rng(59);
    auto wiggly = [&](std::span<const double> x, std::span<const double> a) {
        return std::vector<double>{std::sin(5 * x[0]) + a[0], std::cos(3 * a[1])};
    };
    for (double pv : {1.0, 2.0, std::numeric_limits<double>::infinity()}) {
        const NormIndex p(pv);
        const double L = rng.uniform(0.5, 3.0);
        const double h = 0.02;
        const auto traj = rollout(drift, wiggly, std::vector<double>{1.0},
                                  std::vector<double>{0.0, 0.0}, L, p, h, 200, StepMode::free);
        for (std::size_t k = 0; k + 1 < traj.actions.size(); ++k) {
            std::vector<double> diff{traj.actions[k + 1][0] - traj.actions[k][0],
                                     traj.actions[k + 1][1] - traj.actions[k][1]};
            CHECK(p.norm(diff) <= L * h + 1e-9);
        }
    }
}
