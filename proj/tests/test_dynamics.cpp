#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "cqed/dynamics.hpp"

using namespace cqed;
using Catch::Approx;

namespace {

// Driven, damped single cavity mode (no atom). Steady amplitude obeys
// d<a>/dt = -(kappa/2)<a> - pump, so |<a>|_ss = 2 pump / kappa.
OpenSystem driven_cavity(double pump, double kappa = 1.0, int n_max = 5) {
    Operator a = fock_annihilation(n_max);
    const Complex I(0, 1);
    Operator H = I * pump * (a - a.adjoint());
    return {a.space, H, {std::sqrt(kappa) * a}, a, "driven-cavity", fock_number(n_max)};
}

DensityMatrix random_density(const HilbertSpace& s, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Matrix m(s.dim(), s.dim());
    for (int i = 0; i < s.dim(); ++i)
        for (int j = 0; j < s.dim(); ++j) m(i, j) = Complex(nd(rng), nd(rng));
    Matrix rho = m * m.adjoint();
    rho /= rho.trace();
    return {s, rho};
}

JCParams fig_dashed_jc() {
    JCParams p;  // defaults are exactly the weak-drive reference set
    return p;
}

}  // namespace

TEST_CASE("single decay channel empties the mode at rate kappa") {
    const double kappa = 1.0;
    Operator a = fock_annihilation(3);
    OpenSystem sys{a.space, Operator{a.space, Matrix::Zero(4, 4)},
                   {std::sqrt(kappa) * a},  a,
                   "decay",                 fock_number(3)};
    LindbladGenerator gen = liouvillian(sys);
    DensityMatrix rho{a.space, Matrix::Zero(4, 4)};
    rho.mat(1, 1) = 1.0;
    DensityMatrix drho = apply_generator(gen, rho);
    const double ndot = std::real(expectation(fock_number(3), drho));
    REQUIRE(ndot == Approx(-kappa).margin(1e-12));
    REQUIRE(std::abs(drho.trace()) < 1e-12);
}

TEST_CASE("generator is trace-free on random states") {
    std::mt19937_64 rng(91101);
    std::vector<OpenSystem> systems;
    systems.push_back(build_jc(fig_dashed_jc()));
    systems.push_back(build_jc_effective(fig_dashed_jc()));
    systems.push_back(driven_cavity(0.3));
    for (const auto& sys : systems) {
        LindbladGenerator gen = liouvillian(sys);
        for (int trial = 0; trial < 5; ++trial) {
            DensityMatrix rho = random_density(sys.space, rng);
            REQUIRE(std::abs(apply_generator(gen, rho).trace()) < 1e-10);
        }
        DensityMatrix mixed{sys.space, Matrix::Identity(sys.space.dim(), sys.space.dim()) /
                                           double(sys.space.dim())};
        REQUIRE(std::abs(apply_generator(gen, mixed).trace()) < 1e-12);
    }
}

TEST_CASE("driven cavity steady state is the displaced vacuum") {
    const double pump = 0.1, kappa = 1.0;
    OpenSystem sys = driven_cavity(pump, kappa);
    DensityMatrix rho = steady_state(liouvillian(sys));
    const double nbar = std::real(expectation(fock_number(5), rho));
    REQUIRE(nbar == Approx(std::pow(2 * pump / kappa, 2)).margin(1e-6));
    const double purity = (rho.mat * rho.mat).trace().real();
    REQUIRE(purity >= 1.0 - 1e-6);
    REQUIRE(rho.trace().real() == Approx(1.0).margin(1e-9));
    REQUIRE(rho.hermiticity_defect() < 1e-10);
    REQUIRE(rho.min_eigenvalue() >= -1e-8);
}

TEST_CASE("undriven jc settles into the absolute ground state") {
    JCParams p = fig_dashed_jc();
    p.pump = 0.0;
    OpenSystem sys = build_jc(p);
    DensityMatrix rho = steady_state(liouvillian(sys));
    StateVector ground = basis_state(sys.space, {0, 0});
    const double pop = std::real(ground.amps.dot(rho.mat * ground.amps));
    REQUIRE(pop == Approx(1.0).margin(1e-9));
    REQUIRE(std::real(expectation(*sys.excitation_op, rho)) == Approx(0.0).margin(1e-9));
}

TEST_CASE("eit steady state exists and holds photons (regression)") {
    EITParams p;  // dashed reference parameters are the defaults
    OpenSystem sys = build_eit(p);
    DensityMatrix rho = steady_state(liouvillian(sys));
    REQUIRE(rho.min_eigenvalue() >= -1e-8);
    const Operator n_ph = tensor(fock_number(p.n_max), identity(HilbertSpace({{"atom", 4}})));
    const double nbar = std::real(expectation(n_ph, rho));
    REQUIRE(nbar > 0.0);
    // frozen from an independent solver run of the same model
    REQUIRE(nbar == Approx(0.2229146).margin(2e-5));
}

TEST_CASE("disconnected subspace is reported as a degenerate kernel") {
    HilbertSpace s({{"atom", 3}});
    Matrix c = Matrix::Zero(3, 3);
    c(0, 1) = 1.0;  // level 2 decays, level 3 is dark and disconnected
    OpenSystem sys{s, Operator{s, Matrix::Zero(3, 3)}, {Operator{s, c}}, Operator{s, c},
                   "two-pocket"};
    REQUIRE_THROWS_AS(steady_state(liouvillian(sys)), numeric_failure);
}

TEST_CASE("evolve_density at t = 0 is the identity map") {
    OpenSystem sys = driven_cavity(0.2);
    LindbladGenerator gen = liouvillian(sys);
    std::mt19937_64 rng(5);
    DensityMatrix rho = random_density(sys.space, rng);
    DensityMatrix out = evolve_density(rho, gen, 0.0);
    REQUIRE((out.mat - rho.mat).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE_THROWS_AS(evolve_density(rho, gen, -1.0), invalid_input);
}

TEST_CASE("steady state is a fixed point of the flow") {
    OpenSystem sys = build_jc(fig_dashed_jc());
    LindbladGenerator gen = liouvillian(sys);
    DensityMatrix rho = steady_state(gen);
    for (double t : {0.7, 3.0, 11.0}) {
        DensityMatrix out = evolve_density(rho, gen, t);
        REQUIRE((out.mat - rho.mat).cwiseAbs().maxCoeff() < 1e-8);
        REQUIRE(out.trace().real() == Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("photon number of a decaying mode follows exp(-kappa t)") {
    Operator a = fock_annihilation(3);
    OpenSystem sys{a.space, Operator{a.space, Matrix::Zero(4, 4)}, {a}, a, "decay",
                   fock_number(3)};
    LindbladGenerator gen = liouvillian(sys);
    DensityMatrix rho{a.space, Matrix::Zero(4, 4)};
    rho.mat(1, 1) = 1.0;
    for (double t : {0.3, 1.0, 2.5}) {
        DensityMatrix out = evolve_density(rho, gen, t);
        REQUIRE(std::real(expectation(fock_number(3), out)) == Approx(std::exp(-t)).margin(1e-8));
        REQUIRE(out.trace().real() == Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("spectral gap of a bare decaying mode is kappa/2") {
    Operator a = fock_annihilation(2);
    OpenSystem sys{a.space, Operator{a.space, Matrix::Zero(3, 3)}, {a}, a, "decay",
                   fock_number(2)};
    REQUIRE(spectral_gap(liouvillian(sys)) == Approx(0.5).margin(1e-9));
}

TEST_CASE("trajectories without collapse channels follow the Schroedinger flow") {
    HilbertSpace s({{"atom", 2}});
    Matrix sx = Matrix::Zero(2, 2);
    sx(0, 1) = sx(1, 0) = 1.0;
    const double omega = 1.3;
    OpenSystem sys{s, Operator{s, omega * sx}, {}, Operator{s, sx}, "rabi"};
    TrajectoryConfig cfg;
    cfg.dt = 0.01;
    cfg.t_max = 5.0;
    cfg.n_traj = 3;
    auto ens = mcwf_ensemble(sys, basis_state(s, {0}), cfg);
    for (const auto& rec : ens) {
        REQUIRE(rec.jumps.empty());
        for (size_t k = 0; k < rec.times.size(); ++k) {
            const double t = rec.times[k];
            const double p0 = std::norm(rec.states[k].amps(0));
            REQUIRE(p0 == Approx(std::cos(omega * t) * std::cos(omega * t)).margin(1e-6));
            REQUIRE(std::abs(rec.states[k].norm() - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("oversized dt is rejected against the collapse rates") {
    OpenSystem sys = driven_cavity(0.2, 1.0, 5);  // max rate = kappa * n_max = 5
    TrajectoryConfig cfg;
    cfg.dt = 0.02;  // dt * max_rate = 0.1 > 0.05
    cfg.t_max = 1.0;
    REQUIRE_THROWS_AS(mcwf_ensemble(sys, basis_state(sys.space, {0}), cfg), invalid_input);
}

TEST_CASE("jump times from a decaying photon are exponential (KS test)") {
    Operator a = fock_annihilation(1);
    OpenSystem sys{a.space, Operator{a.space, Matrix::Zero(2, 2)}, {a}, a, "decay",
                   fock_number(1)};
    TrajectoryConfig cfg;
    cfg.dt = 0.002;
    cfg.t_max = 10.0;
    cfg.n_traj = 10000;
    cfg.seed = 321;
    cfg.record_stride = 0;

    detail::McwfEngine engine(sys, cfg);
    std::vector<double> first_jumps(cfg.n_traj, -1.0);
    Vector psi0 = Vector::Zero(2);
    psi0(1) = 1.0;
    detail::parallel_trajectories(cfg.n_traj, 2, [&](int i) {
        engine.run(
            psi0, cfg, std::uint64_t(i), [](double, const Vector&) {},
            [&](double t, int) {
                if (first_jumps[i] < 0) first_jumps[i] = t;
            });
    });
    std::vector<double> times;
    for (double t : first_jumps)
        if (t >= 0) times.push_back(t);
    REQUIRE(times.size() > 9990);  // survival beyond t_max is ~5e-5

    std::sort(times.begin(), times.end());
    double dks = 0.0;
    for (size_t k = 0; k < times.size(); ++k) {
        const double f = 1.0 - std::exp(-times[k]);
        dks = std::max(dks, std::abs(f - double(k) / times.size()));
        dks = std::max(dks, std::abs(f - double(k + 1) / times.size()));
    }
    const double critical = 1.628 / std::sqrt(double(times.size()));  // 1% level
    REQUIRE(dks < critical);
}

TEST_CASE("trajectory ensemble mean matches the master equation within 3 sigma") {
    OpenSystem sys = build_jc(fig_dashed_jc());
    TrajectoryConfig cfg;
    cfg.dt = 0.005;
    cfg.t_max = 10.0;
    cfg.n_traj = 3000;
    cfg.seed = 777;
    cfg.record_stride = 20;
    StateVector psi0 = basis_state(sys.space, {0, 0});
    auto ens = mcwf_ensemble(sys, psi0, cfg);

    const Operator n_op{sys.space, sys.field_op.mat.adjoint() * sys.field_op.mat};
    EnsembleObservable obs = ensemble_expectation(ens, n_op);

    LindbladGenerator gen = liouvillian(sys);
    DensityMatrix rho{sys.space, psi0.amps * psi0.amps.adjoint()};
    const Matrix E = make_propagator(gen, cfg.dt * cfg.record_stride).step;
    Vector x = vec(rho.mat);
    for (size_t k = 0; k < obs.times.size(); ++k) {
        const double exact = std::real((n_op.mat * unvec(x, sys.space.dim())).trace());
        // before the first jump every trajectory is identical, the sample
        // variance vanishes, and the unobserved jump branch biases the mean by
        // O(P_jump * nbar) ~ 1e-7; allow that much on top of the 3 sigma band
        const double bound = 3.0 * obs.stderr_[k] + 1e-6;
        if (k > 0) REQUIRE(std::abs(obs.mean[k] - exact) <= bound);
        x = E * x;
    }
}

TEST_CASE("identical seeds give bit-identical jump records") {
    OpenSystem sys = build_jc(fig_dashed_jc());
    TrajectoryConfig cfg;
    cfg.dt = 0.01;
    cfg.t_max = 50.0;
    cfg.n_traj = 16;
    cfg.seed = 20240809;
    StateVector psi0 = basis_state(sys.space, {0, 0});

    auto a = mcwf_ensemble(sys, psi0, cfg, 1);
    auto b = mcwf_ensemble(sys, psi0, cfg, 2);  // different worker count
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].jumps.size() == b[i].jumps.size());
        for (size_t k = 0; k < a[i].jumps.size(); ++k) {
            REQUIRE(a[i].jumps[k].time == b[i].jumps[k].time);
            REQUIRE(a[i].jumps[k].channel == b[i].jumps[k].channel);
        }
        for (size_t k = 1; k < a[i].jumps.size(); ++k)
            REQUIRE(a[i].jumps[k].time > a[i].jumps[k - 1].time);
    }

    cfg.seed = 20240810;
    auto c = mcwf_ensemble(sys, psi0, cfg, 2);
    bool any_diff = false;
    for (size_t i = 0; i < a.size() && !any_diff; ++i)
        any_diff = a[i].jumps.size() != c[i].jumps.size();
    REQUIRE(any_diff);
}

TEST_CASE("no-jump evolution shrinks the norm monotonically") {
    OpenSystem sys = build_jc(fig_dashed_jc());
    Matrix hnh = nonhermitian_hamiltonian(sys);
    Vector psi = basis_state(sys.space, {1, 0}).amps;  // one photon inside
    Vector k1, k2, k3, k4;
    double last = psi.squaredNorm();
    for (int s = 0; s < 2000; ++s) {
        detail::rk4_step(hnh, psi, 0.005, k1, k2, k3, k4);
        const double now = psi.squaredNorm();
        REQUIRE(now < last);
        last = now;
    }
}

TEST_CASE("norm-threshold and first-order unravelings agree in distribution") {
    OpenSystem sys = build_jc_effective(fig_dashed_jc(), 0.5);
    StateVector psi0 = basis_state(sys.space, {0});
    const Operator pop{sys.space, sys.field_op.mat.adjoint() * sys.field_op.mat};

    auto run = [&](JumpMethod m, std::uint64_t seed) {
        TrajectoryConfig cfg;
        cfg.dt = 0.005;
        cfg.t_max = 20.0;
        cfg.n_traj = 1500;
        cfg.seed = seed;
        cfg.jump_method = m;
        cfg.record_stride = 40;
        return ensemble_expectation(mcwf_ensemble(sys, psi0, cfg), pop);
    };
    EnsembleObservable fo = run(JumpMethod::FirstOrderProbability, 11);
    EnsembleObservable nt = run(JumpMethod::NormThreshold, 12);
    REQUIRE(fo.times.size() == nt.times.size());
    for (size_t k = 1; k < fo.times.size(); ++k) {
        const double sigma = std::hypot(fo.stderr_[k], nt.stderr_[k]);
        REQUIRE(std::abs(fo.mean[k] - nt.mean[k]) <= 4.0 * std::max(sigma, 1e-12));
    }
}

TEST_CASE("effective eit steady state populations sum to one") {
    EITParams p;
    auto [e, sys] = derive_eit_effective(p);
    DensityMatrix rho = steady_state(liouvillian(sys));
    double pops = 0;
    for (int k = 0; k < 4; ++k) pops += rho.mat(k, k).real();
    REQUIRE(pops == Approx(1.0).margin(1e-9));
    REQUIRE(rho.min_eigenvalue() >= -1e-8);
}
