#include <catch2/catch_amalgamated.hpp>

#include "cqed/correlations.hpp"

using namespace cqed;
using Catch::Approx;

namespace {

OpenSystem driven_cavity(double pump, double kappa = 1.0, int n_max = 5) {
    Operator a = fock_annihilation(n_max);
    const Complex I(0, 1);
    Operator H = I * pump * (a - a.adjoint());
    return {a.space, H, {std::sqrt(kappa) * a}, a, "driven-cavity", fock_number(n_max)};
}

CorrelationSeries synthetic(double freq, double decay, double t_max, int n) {
    CorrelationSeries s;
    for (int k = 0; k < n; ++k) {
        const double t = t_max * k / (n - 1);
        s.tau.push_back(t);
        s.g2.push_back(1.0 + std::exp(-decay * t) * std::cos(freq * t));
        s.stderr_.push_back(0.0);
    }
    s.model_label = "synthetic";
    return s;
}

}  // namespace

TEST_CASE("coherent drive gives a flat unity correlation") {
    OpenSystem sys = driven_cavity(0.1);
    CorrelationSeries s = g2_conditional(sys, 10.0, 256);
    REQUIRE(s.tau.front() == 0.0);
    for (size_t k = 1; k < s.tau.size(); ++k) REQUIRE(s.tau[k] > s.tau[k - 1]);
    for (double v : s.g2) REQUIRE(v == Approx(1.0).margin(1e-6));
    for (double e : s.stderr_) REQUIRE(e == 0.0);
}

TEST_CASE("two-manifold models are perfectly antibunched at the origin") {
    JCParams jc;
    CorrelationSeries a = g2_conditional(build_jc_effective(jc, 0.5), 20.0, 128);
    REQUIRE(std::abs(a.g2.front()) < 1e-12);
    EITParams eit;
    auto [e, sys] = derive_eit_effective(eit, 0.5);
    CorrelationSeries b = g2_conditional(sys, 20.0, 128);
    REQUIRE(std::abs(b.g2.front()) < 1e-12);
    // g2 is nonnegative everywhere
    for (double v : a.g2) REQUIRE(v >= -1e-9);
    for (double v : b.g2) REQUIRE(v >= -1e-9);
}

TEST_CASE("blockade suppresses the exact eit correlation at the origin") {
    EITParams p;  // dashed reference set
    CorrelationSeries s = g2_conditional(build_eit(p), 5.0, 128);
    // converged value for this truncation; well below the coherent level
    REQUIRE(s.g2.front() == Approx(0.0580).margin(5e-4));
    REQUIRE(s.g2.front() < 0.1);
}

TEST_CASE("zero photon flux is a reported error naming the model") {
    JCParams p;
    p.pump = 0.0;
    OpenSystem sys = build_jc_effective(p);
    try {
        g2_conditional(sys, 5.0, 128);
        FAIL("expected zero-flux failure");
    } catch (const numeric_failure& e) {
        REQUIRE(std::string(e.what()).find("jc-effective") != std::string::npos);
    }
}

TEST_CASE("correlation tail relaxes to the coherent level") {
    JCParams p;
    OpenSystem sys = build_jc(p);
    const double tau_max = 10.0 / spectral_gap(liouvillian(sys));
    CorrelationSeries s = g2_conditional(sys, tau_max, 512);
    double tail = 0;
    const size_t ntail = s.g2.size() / 10;
    for (size_t k = s.g2.size() - ntail; k < s.g2.size(); ++k) tail += s.g2[k];
    tail /= double(ntail);
    REQUIRE(tail == Approx(1.0).margin(0.05));
}

TEST_CASE("emission unraveling preserves the generator exactly") {
    JCParams jc;
    EITParams eit;
    std::vector<OpenSystem> systems;
    systems.push_back(build_jc_effective(jc, 0.5));
    systems.push_back(derive_eit_effective(eit, 0.5).second);
    systems.push_back(build_jc(jc));
    for (const auto& sys : systems) {
        OpenSystem rot = emission_unraveling(sys);
        // channel 0 is now proportional to the field operator
        const Matrix& c0 = rot.collapse_ops[0].mat;
        const double fn = rot.field_op.mat.norm();
        const Complex lambda = (rot.field_op.mat.adjoint() * c0).trace() / (fn * fn);
        REQUIRE((c0 - lambda * rot.field_op.mat).norm() < 1e-10 * c0.norm());
        // and the Lindblad generator is untouched
        const Matrix la = liouvillian(sys).supermatrix;
        const Matrix lb = liouvillian(rot).supermatrix;
        REQUIRE((la - lb).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("unrelated field operator cannot be unraveled") {
    // collapse channel is atomic decay, but the field op is the cavity mode
    JCParams p;
    OpenSystem sys = build_jc(p);
    sys.collapse_ops.erase(sys.collapse_ops.begin());  // drop the cavity channel
    REQUIRE_THROWS_AS(emission_unraveling(sys), numeric_failure);
}

TEST_CASE("jump-pair histogram of a coherent drive is flat") {
    OpenSystem sys = driven_cavity(0.25, 1.0, 4);
    TrajectoryConfig cfg;
    cfg.dt = 0.01;
    cfg.t_max = 250.0;
    cfg.n_traj = 400;
    cfg.seed = 97;
    CorrelationSeries s = g2_from_jumps(sys, cfg, 8.0, 16, 10.0);
    REQUIRE(s.tau.front() == 0.0);
    REQUIRE(s.pair_counts.size() == 16);
    for (size_t b = 0; b < s.g2.size(); ++b) {
        REQUIRE(s.pair_counts[b] > 100);
        REQUIRE(std::abs(s.g2[b] - 1.0) <= 3.5 * s.stderr_[b]);
    }
}

TEST_CASE("jump-pair histogram matches the conditional oracle (two-manifold model)") {
    JCParams p;
    p.g = 20.0;
    p.theta = 20.0;
    p.pump = 0.5;
    OpenSystem sys = build_jc_effective(p, 0.5);
    TrajectoryConfig cfg;
    cfg.dt = 0.005;
    cfg.t_max = 200.0;
    cfg.n_traj = 2000;
    cfg.seed = 4242;
    const double tau_max = 12.0;
    const int n_bins = 24;
    CorrelationSeries hist = g2_from_jumps(sys, cfg, tau_max, n_bins, 10.0);
    CorrelationSeries cond = g2_conditional(sys, tau_max, 961);

    int qualified = 0;
    for (int b = 0; b < n_bins; ++b) {
        if (hist.pair_counts[size_t(b)] < 100) continue;
        ++qualified;
        const double lo = hist.tau[size_t(b)];
        const double hi = lo + tau_max / n_bins;
        const double ref = series_bin_mean(cond, lo, hi);
        REQUIRE(std::abs(hist.g2[size_t(b)] - ref) <= 3.0 * hist.stderr_[size_t(b)]);
    }
    REQUIRE(qualified >= n_bins / 2);
}

TEST_CASE("blockade shows up as an empty leading histogram bin") {
    EITParams p;  // dashed reference set
    auto [e, sys] = derive_eit_effective(p, 0.5);
    TrajectoryConfig cfg;
    cfg.dt = 0.01;
    cfg.t_max = 60.0;
    cfg.n_traj = 1500;
    cfg.seed = 3141;
    CorrelationSeries hist = g2_from_jumps(sys, cfg, 16.0, 40, 6.0);
    // first bin consistent with zero within 3 sigma
    REQUIRE(hist.g2.front() <= 3.0 * hist.stderr_.front());
    // while the tail has healthy statistics near 1
    long tail_pairs = 0;
    for (size_t b = hist.g2.size() / 2; b < hist.g2.size(); ++b)
        tail_pairs += hist.pair_counts[b];
    REQUIRE(tail_pairs > 500);
}

TEST_CASE("undriven model yields an explicit under-sampling error") {
    JCParams p;
    p.pump = 0.0;
    OpenSystem sys = build_jc_effective(p);
    TrajectoryConfig cfg;
    cfg.dt = 0.01;
    cfg.t_max = 20.0;
    cfg.n_traj = 4;
    REQUIRE_THROWS_AS(g2_from_jumps(sys, cfg, 5.0, 8, 1.0), numeric_failure);
}

TEST_CASE("stochastic reruns with one seed are reproducible") {
    OpenSystem sys = driven_cavity(0.3, 1.0, 4);
    TrajectoryConfig cfg;
    cfg.dt = 0.01;
    cfg.t_max = 60.0;
    cfg.n_traj = 64;
    cfg.seed = 555;
    CorrelationSeries a = g2_from_jumps(sys, cfg, 4.0, 8, 5.0, 1);
    CorrelationSeries b = g2_from_jumps(sys, cfg, 4.0, 8, 5.0, 2);
    for (size_t k = 0; k < a.g2.size(); ++k) {
        REQUIRE(a.g2[k] == b.g2[k]);  // bit-identical across worker counts
        REQUIRE(a.pair_counts[k] == b.pair_counts[k]);
    }
}

TEST_CASE("synthetic damped cosine peak is located within 2 percent") {
    CorrelationSeries s = synthetic(5.0, 0.5, 30.0, 1024);
    FrequencyReport rep = extract_frequencies(s, 0.01);
    REQUIRE(!rep.peaks.empty());
    REQUIRE(rep.dc_removed);
    REQUIRE(rep.peaks[0].frequency == Approx(5.0).epsilon(0.02));
    REQUIRE(rep.peaks[0].width > 0.0);
    // peaks are sorted by amplitude and capped at the grid Nyquist limit
    const double nyquist = M_PI / (s.tau[1] - s.tau[0]);
    for (size_t k = 1; k < rep.peaks.size(); ++k) {
        REQUIRE(rep.peaks[k].amplitude <= rep.peaks[k - 1].amplitude);
        REQUIRE(rep.peaks[k].frequency <= nyquist);
    }
}

TEST_CASE("flat series reports no peaks") {
    CorrelationSeries s;
    for (int k = 0; k < 256; ++k) {
        s.tau.push_back(0.05 * k);
        s.g2.push_back(1.0);
        s.stderr_.push_back(0.0);
    }
    REQUIRE(extract_frequencies(s, 0.001).peaks.empty());
}

TEST_CASE("frequency extraction needs a long enough grid") {
    CorrelationSeries s = synthetic(3.0, 0.5, 5.0, 32);
    REQUIRE_THROWS_AS(extract_frequencies(s, 0.01), invalid_input);
}

TEST_CASE("two well separated tones are both recovered") {
    CorrelationSeries s = synthetic(2.0, 0.2, 40.0, 2048);
    for (size_t k = 0; k < s.tau.size(); ++k)
        s.g2[k] += 0.2 * std::exp(-0.2 * s.tau[k]) * std::cos(11.0 * s.tau[k]);
    FrequencyReport rep = extract_frequencies(s, 0.01);
    REQUIRE(rep.peaks.size() >= 2);
    auto low = band_peak_frequency(rep, 1.5, 2.5);
    auto high = band_peak_frequency(rep, 10.0, 12.0);
    REQUIRE(low.has_value());
    REQUIRE(high.has_value());
    REQUIRE(*low == Approx(2.0).epsilon(0.03));
    REQUIRE(*high == Approx(11.0).epsilon(0.03));
}

TEST_CASE("polariton phase redefinitions leave g2 unchanged") {
    EITParams p;
    auto [e, sys] = derive_eit_effective(p, 0.5);
    CorrelationSeries base = g2_conditional(sys, 15.0, 256);

    // multiply basis state |phi_+> by -1: conjugate every operator by U
    Matrix U = Matrix::Identity(4, 4);
    U(3, 3) = -1.0;
    OpenSystem flipped = sys;
    flipped.hamiltonian.mat = U * sys.hamiltonian.mat * U.adjoint();
    flipped.field_op.mat = U * sys.field_op.mat * U.adjoint();
    for (auto& c : flipped.collapse_ops) c.mat = U * c.mat * U.adjoint();
    CorrelationSeries flip = g2_conditional(flipped, 15.0, 256);

    for (size_t k = 0; k < base.g2.size(); ++k)
        REQUIRE(std::abs(base.g2[k] - flip.g2[k]) < 1e-10);

    // a complex phase works just as well
    U(3, 3) = std::polar(1.0, 0.7);
    OpenSystem rotated = sys;
    rotated.hamiltonian.mat = U * sys.hamiltonian.mat * U.adjoint();
    rotated.field_op.mat = U * sys.field_op.mat * U.adjoint();
    for (auto& c : rotated.collapse_ops) c.mat = U * c.mat * U.adjoint();
    CorrelationSeries rot = g2_conditional(rotated, 15.0, 256);
    for (size_t k = 0; k < base.g2.size(); ++k)
        REQUIRE(std::abs(base.g2[k] - rot.g2[k]) < 1e-10);
}

TEST_CASE("series compared with itself reports zero differences") {
    CorrelationSeries s = synthetic(3.0, 0.3, 20.0, 512);
    SeriesComparison cmp = compare_series(s, s, 0.01);
    REQUIRE(cmp.max_abs_diff == 0.0);
    REQUIRE(cmp.rms_diff == 0.0);
    REQUIRE(cmp.g2_zero_diff == 0.0);
    for (const auto& [fa, fb] : cmp.peak_matches) REQUIRE(fa == fb);
}

TEST_CASE("comparison rejects disjoint grids") {
    CorrelationSeries a = synthetic(3.0, 0.3, 5.0, 128);
    CorrelationSeries b = synthetic(3.0, 0.3, 5.0, 128);
    for (auto& t : b.tau) t += 10.0;
    REQUIRE_THROWS_AS(compare_series(a, b), invalid_input);
}

TEST_CASE("first crossing interpolates between grid points") {
    CorrelationSeries s;
    s.tau = {0.0, 1.0, 2.0, 3.0};
    s.g2 = {0.0, 0.2, 0.8, 1.2};
    s.stderr_ = {0, 0, 0, 0};
    auto t = first_crossing(s, 0.5);
    REQUIRE(t.has_value());
    REQUIRE(*t == Approx(1.5).margin(1e-12));
    REQUIRE_FALSE(first_crossing(s, 2.0).has_value());
}
