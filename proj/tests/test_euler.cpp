#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gyrolim/euler.hpp"
#include "test_helpers.hpp"

using namespace gyrolim;
using testutil::smooth_bump;

namespace {

// compactly supported radial probability density (Gaussian times smooth bump)
struct TruncGauss {
    double var = 0.16;
    double r0 = 1.0, r1 = 1.4;
    double mass;
    TruncGauss() {
        const GridSpec fine(2.0, 512);
        double s = 0.0;
        for (int i = 0; i < fine.n; ++i)
            for (int j = 0; j < fine.n; ++j) s += raw(fine.center(i, j));
        mass = s * fine.cell_area();
    }
    double raw(Vec2 p) const {
        const double r = p.norm();
        return std::exp(-r * r / (2.0 * var)) * smooth_bump(r, r0, r1);
    }
    double operator()(Vec2 p) const { return raw(p) / mass; }
};

} // namespace

TEST_CASE("blob initialization from a truncated gaussian") {
    const GridSpec spec(2.0, 256);
    TruncGauss w0;
    const VortexBlobs blobs = init_blobs_from_vorticity(w0, 4096, spec);

    CHECK(blobs.total_circulation() == Catch::Approx(1.0).margin(1e-12));
    for (double g : blobs.gamma) CHECK(g >= 0.0);
    CHECK(std::abs(static_cast<double>(blobs.size()) - 4096.0) < 1500.0);

    // deposited vorticity close to the sampled density in L1
    const ScalarGrid dep = deposit_vorticity(blobs, spec);
    const ScalarGrid ref = ScalarGrid::from_function(spec, w0);
    double l1 = 0.0;
    for (std::size_t k = 0; k < dep.data().size(); ++k) l1 += std::abs(dep.data()[k] - ref.data()[k]);
    l1 *= spec.cell_area();
    CHECK(l1 < 0.02);
}

TEST_CASE("blob initialization edge cases") {
    const GridSpec spec(2.0, 64);
    const Vec2 spike_at = spec.center(40, 20);
    auto spike = [&](Vec2 p) { return (p - spike_at).norm() < 0.5 * spec.spacing() ? 1.0 : 0.0; };
    const VortexBlobs one = init_blobs_from_vorticity(spike, 1, spec);
    REQUIRE(one.size() == 1);
    CHECK(one.gamma[0] == 1.0);

    auto negative = [](Vec2 p) { return 1.0 - p.norm_sq(); };
    CHECK_THROWS_AS(init_blobs_from_vorticity(negative, 16, spec), std::invalid_argument);
    auto ok = [](Vec2 p) { return p.norm_sq() < 1.0 ? 1.0 : 0.0; };
    CHECK_THROWS_AS(init_blobs_from_vorticity(ok, 0, spec), std::invalid_argument);
}

TEST_CASE("blob velocity: pair speed, self-velocity, mollifier limit") {
    const double d = 1.0;
    VortexBlobs pair;
    pair.pos = {{-0.5 * d, 0.0}, {0.5 * d, 0.0}};
    pair.gamma = {0.5, 0.5};
    pair.delta = 1e-3;

    const auto u = blob_velocity(pair, pair.pos);
    const double speed = 1.0 / (2.0 * kTwoPi * d); // gamma_other / (2 pi d)
    // azimuthal co-rotation: left blob moves -y, right blob +y
    CHECK(u[0].x == Catch::Approx(0.0).margin(1e-14));
    CHECK(u[0].y == Catch::Approx(-speed).epsilon(1e-10));
    CHECK(u[1].x == Catch::Approx(0.0).margin(1e-14));
    CHECK(u[1].y == Catch::Approx(speed).epsilon(1e-10));

    VortexBlobs solo;
    solo.pos = {{0.3, -0.7}};
    solo.gamma = {1.0};
    solo.delta = 0.05;
    const auto us = blob_velocity(solo, solo.pos);
    CHECK(us[0].x == 0.0);
    CHECK(us[0].y == 0.0);

    // far from the cores the mollifier factor is 1 to machine precision
    VortexBlobs wide = pair;
    wide.delta = 0.05;
    const std::vector<Vec2> far{{2.0, 1.5}};
    const Vec2 um = blob_velocity(wide, far)[0];
    Vec2 exact{0, 0};
    for (std::size_t i = 0; i < wide.size(); ++i)
        exact += wide.gamma[i] * biot_savart_kernel(far[0] - wide.pos[i]);
    CHECK(um.x == Catch::Approx(exact.x).margin(1e-10));
    CHECK(um.y == Catch::Approx(exact.y).margin(1e-10));
}

TEST_CASE("co-rotating vortex pair returns after one period") {
    const double d = 1.0;
    // two-body closed form: each vortex circles the midpoint with radius d/2
    // and speed 1/(4 pi d), so the period is 4 pi^2 d^2
    const double period = 4.0 * kPi * kPi * d * d;
    VortexBlobs pair;
    pair.pos = {{-0.5 * d, 0.0}, {0.5 * d, 0.0}};
    pair.gamma = {0.5, 0.5};
    pair.delta = 1e-3;
    const std::vector<Vec2> start = pair.pos;

    const double dt = period / 200.0;
    for (int s = 0; s < 200; ++s) step_euler(pair, dt);

    for (int i = 0; i < 2; ++i) CHECK((pair.pos[i] - start[i]).norm() < 1e-4 * d);
    CHECK(pair.total_circulation() == 1.0);
}

TEST_CASE("radially symmetric vorticity is steady") {
    const GridSpec spec(2.0, 256);
    TruncGauss w0;
    VortexBlobs blobs = init_blobs_from_vorticity(w0, 1024, spec);
    const ScalarGrid before = deposit_vorticity(blobs, spec);
    const std::vector<double> g0 = blobs.gamma;

    const double dt = 0.025;
    for (int s = 0; s < 40; ++s) step_euler(blobs, dt);

    CHECK(blobs.gamma == g0); // untouched by transport
    const ScalarGrid after = deposit_vorticity(blobs, spec);
    double l1 = 0.0;
    for (std::size_t k = 0; k < after.data().size(); ++k) l1 += std::abs(after.data()[k] - before.data()[k]);
    l1 *= spec.cell_area();
    CHECK(l1 < 0.01);
}

TEST_CASE("derived fields: discrete divergence and stream-vorticity consistency") {
    const double var = 0.25;
    auto gauss = [&](Vec2 p) { return std::exp(-p.norm_sq() / (2.0 * var)) / (kTwoPi * var); };

    // interior divergence of (grad psi)^perp vanishes because the centered
    // mixed differences commute; the check pins that wiring
    const GridSpec spec(2.0, 128);
    const EulerFields f = fields_from_vorticity_grid(ScalarGrid::from_function(spec, gauss), 0.1);
    const ScalarGrid div_x = d_dx(f.u.x), div_y = d_dy(f.u.y);
    double div_max = 0.0;
    for (int i = 2; i < spec.n - 2; ++i)
        for (int j = 2; j < spec.n - 2; ++j)
            div_max = std::max(div_max, std::abs(div_x.at(i, j) + div_y.at(i, j)));
    CHECK(div_max < 1e-11);

    // || Lap psi - omega ||_inf is second order under grid refinement
    std::vector<double> errs;
    for (int n : {64, 128, 256}) {
        const GridSpec s(2.0, n);
        const ScalarGrid w = ScalarGrid::from_function(s, gauss);
        const EulerFields ff = fields_from_vorticity_grid(w, 0.0);
        const double h = s.spacing();
        double e = 0.0;
        for (int i = 1; i < n - 1; ++i)
            for (int j = 1; j < n - 1; ++j) {
                const double lap = (ff.psi.at(i + 1, j) + ff.psi.at(i - 1, j) + ff.psi.at(i, j + 1) +
                                    ff.psi.at(i, j - 1) - 4.0 * ff.psi.at(i, j)) /
                                   (h * h);
                e = std::max(e, std::abs(lap - w.at(i, j)));
            }
        errs.push_back(e);
    }
    const double order1 = std::log2(errs[0] / errs[1]);
    const double order2 = std::log2(errs[1] / errs[2]);
    INFO("refinement errors " << errs[0] << " " << errs[1] << " " << errs[2]);
    CHECK(order1 >= 1.8);
    CHECK(order2 >= 1.8);
}

TEST_CASE("gradu contraction equals -2 det(grad u)") {
    const GridSpec spec(2.0, 128);
    const double var = 0.2;
    auto gauss = [&](Vec2 p) { return std::exp(-p.norm_sq() / (2.0 * var)) / (kTwoPi * var); };
    const EulerFields f = fields_from_vorticity_grid(ScalarGrid::from_function(spec, gauss), 0.1);
    const double h = spec.spacing();
    double worst = 0.0;
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) {
            const double det = f.dux_dx.at(i, j) * f.duy_dy.at(i, j) - f.dux_dy.at(i, j) * f.duy_dx.at(i, j);
            worst = std::max(worst, std::abs(f.gradu_sq_trace.at(i, j) + 2.0 * det));
        }
    CHECK(worst <= 10.0 * h * h);
}

TEST_CASE("pressure matches cyclostrophic balance for a gaussian vortex") {
    const GridSpec spec(3.0, 384);
    const double var = 0.16; // sigma = 0.4
    auto gauss = [&](Vec2 p) { return std::exp(-p.norm_sq() / (2.0 * var)) / (kTwoPi * var); };
    const EulerFields f = fields_from_vorticity_grid(ScalarGrid::from_function(spec, gauss), 0.0);

    auto u_theta = [&](double r) { return (1.0 - std::exp(-r * r / (2.0 * var))) / (kTwoPi * r); };
    // radial ODE oracle: P(r2) - P(r1) = int_r1^r2 u_theta(s)^2 / s ds
    auto dp_oracle = [&](double r1, double r2) {
        const int nq = 20000;
        double acc = 0.0;
        const double ds = (r2 - r1) / nq;
        for (int k = 0; k < nq; ++k) {
            const double s = r1 + (k + 0.5) * ds;
            acc += u_theta(s) * u_theta(s) / s * ds;
        }
        return acc;
    };

    const double r1 = 0.4, r2 = 1.2;
    const double dp_grid = f.pressure.interpolate({r2, 0.0}) - f.pressure.interpolate({r1, 0.0});
    CHECK(dp_grid == Catch::Approx(dp_oracle(r1, r2)).epsilon(0.02));
}

TEST_CASE("grad u norms") {
    const GridSpec spec(2.0, 128);
    const EulerFields zero = fields_from_vorticity_grid(ScalarGrid(spec), 0.1);
    for (const auto& row : grad_u_norms(zero, {2.0, 4.0})) CHECK(row.norm == 0.0);

    const double var = 0.2;
    auto gauss = [&](Vec2 p) { return std::exp(-p.norm_sq() / (2.0 * var)) / (kTwoPi * var); };
    const EulerFields f = fields_from_vorticity_grid(ScalarGrid::from_function(spec, gauss), 0.1);
    const auto rows = grad_u_norms(f, {2.0, 4.0, 8.0, 16.0});
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        CHECK(std::isfinite(rows[k].norm));
        CHECK(rows[k + 1].norm_over_p <= rows[k].norm_over_p * (1.0 + 1e-12));
    }

    // enstrophy-type quadrature, independent accumulation
    double s = 0.0;
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) {
            s += f.dux_dx.at(i, j) * f.dux_dx.at(i, j) + f.dux_dy.at(i, j) * f.dux_dy.at(i, j) +
                 f.duy_dx.at(i, j) * f.duy_dx.at(i, j) + f.duy_dy.at(i, j) * f.duy_dy.at(i, j);
        }
    s *= spec.cell_area();
    CHECK(rows[0].norm * rows[0].norm == Catch::Approx(s).margin(1e-10));

    CHECK_THROWS_AS(grad_u_norms(f, {0.5}), std::invalid_argument);
}

TEST_CASE("blobs escaping the grid abort with a diagnostic") {
    VortexBlobs b;
    b.pos = {{5.0, 0.0}};
    b.gamma = {1.0};
    b.delta = 0.1;
    const GridSpec spec(2.0, 64);
    CHECK_THROWS_WITH(fields_from_blobs(b, spec, 0.1), Catch::Matchers::ContainsSubstring("escaped"));
}
