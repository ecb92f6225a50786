// correlations.hpp — second-order field correlations g2(tau) by a
// quantum-regression (deterministic) route and an emission-jump-pair
// (stochastic) route, plus modulation-frequency extraction.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cqed/dynamics.hpp"

namespace cqed {

enum class CorrelationMethod { ConditionalDeterministic, JumpPairStochastic };

inline const char* to_string(CorrelationMethod m) {
    return m == CorrelationMethod::ConditionalDeterministic ? "conditional-deterministic"
                                                            : "jump-pair-stochastic";
}

struct CorrelationSeries {
    std::vector<double> tau;      // starts at 0, strictly increasing (units 1/kappa)
    std::vector<double> g2;       // dimensionless
    std::vector<double> stderr_;  // zero for the deterministic method
    std::vector<long> pair_counts;  // per-bin counts (stochastic method only)
    CorrelationMethod method = CorrelationMethod::ConditionalDeterministic;
    std::string model_label;
    std::string params_echo;
    std::uint64_t seed = 0;
};

struct SpectralPeak {
    double frequency = 0;  // units kappa
    double amplitude = 0;  // peak prominence in g2 units
    double width = 0;      // full width at half prominence
};

struct FrequencyReport {
    std::vector<SpectralPeak> peaks;  // sorted by amplitude, descending
    bool dc_removed = true;
    double amplitude_floor = 0;
};

// ---------------------------------------------------------------------------
// Conditional (quantum regression) method
// ---------------------------------------------------------------------------

// g2(tau) = Tr[ f^dag f  e^{L tau} ( f rho_ss f^dag ) ] / nbar^2 on a uniform
// tau grid, with nbar = Tr[f^dag f rho_ss].
inline CorrelationSeries g2_conditional(const OpenSystem& sys, double tau_max, int n_tau) {
    require(tau_max > 0, "g2_conditional: tau_max must be > 0");
    require(n_tau >= 2, "g2_conditional: need at least two grid points");
    LindbladGenerator gen = liouvillian(sys);
    DensityMatrix rho = steady_state(gen);
    const Matrix& f = sys.field_op.mat;
    const Matrix fdf = f.adjoint() * f;
    const double nbar = (fdf * rho.mat).trace().real();
    if (nbar <= 1e-12)
        throw numeric_failure("g2_conditional: zero photon flux in steady state of '" +
                              sys.label + "' (nbar = " + std::to_string(nbar) + ")");

    const int d = sys.space.dim();
    const double dtau = tau_max / (n_tau - 1);
    const Matrix E = make_propagator(gen, dtau).step;

    CorrelationSeries out;
    out.method = CorrelationMethod::ConditionalDeterministic;
    out.model_label = sys.label;
    out.tau.reserve(n_tau);
    out.g2.reserve(n_tau);
    Vector x = vec((f * rho.mat * f.adjoint()).eval());
    for (int k = 0; k < n_tau; ++k) {
        out.tau.push_back(k * dtau);
        out.g2.push_back((fdf * unvec(x, d)).trace().real() / (nbar * nbar));
        if (k + 1 < n_tau) x = E * x;
    }
    out.stderr_.assign(n_tau, 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Jump-pair (trajectory) method
// ---------------------------------------------------------------------------

// Index of the collapse channel proportional to the field operator, if any.
inline std::optional<int> emission_channel(const OpenSystem& sys) {
    const Matrix& f = sys.field_op.mat;
    const double fn = f.norm();
    for (size_t k = 0; k < sys.collapse_ops.size(); ++k) {
        const Matrix& c = sys.collapse_ops[k].mat;
        const Complex lambda = (f.adjoint() * c).trace() / (fn * fn);
        if (std::abs(lambda) > 0 && (c - lambda * f).norm() <= 1e-10 * c.norm())
            return int(k);
    }
    return std::nullopt;
}

// Rewrites the collapse set by a unitary channel mixing so that channel 0 is
// proportional to the field operator. The Lindblad generator is unchanged;
// only the unraveling (which gedanken detector clicks) is reorganized. Fails
// if the field operator is not in the span of the collapse operators.
inline OpenSystem emission_unraveling(const OpenSystem& sys) {
    if (auto k = emission_channel(sys)) {
        OpenSystem out = sys;
        std::swap(out.collapse_ops[0], out.collapse_ops[size_t(*k)]);
        return out;
    }
    const size_t K = sys.collapse_ops.size();
    require(K >= 1, "emission_unraveling: no collapse channels");
    const int d = sys.space.dim();
    Matrix B(d * d, K);
    for (size_t k = 0; k < K; ++k) B.col(k) = vec(sys.collapse_ops[k].mat);
    const Vector fv = vec(sys.field_op.mat);
    const Vector beta = B.completeOrthogonalDecomposition().solve(fv);
    if ((B * beta - fv).norm() > 1e-10 * fv.norm())
        throw numeric_failure("emission_unraveling: field operator of '" + sys.label +
                              "' is not a combination of the collapse channels");

    // unitary with first row beta/||beta||, completed by Gram-Schmidt
    Matrix U = Matrix::Zero(K, K);
    U.row(0) = beta.transpose() / beta.norm();
    size_t filled = 1;
    for (size_t e = 0; e < K && filled < K; ++e) {
        Vector v = Vector::Zero(K);
        v(e) = 1.0;
        for (size_t r = 0; r < filled; ++r) v -= U.row(r).dot(v) * U.row(r).adjoint();
        const double n = v.norm();
        if (n > 1e-8) U.row(filled++) = v.transpose() / n;
    }
    require(filled == K, "emission_unraveling: channel basis completion failed");

    OpenSystem out = sys;
    out.collapse_ops.clear();
    for (size_t j = 0; j < K; ++j) {
        Matrix cj = Matrix::Zero(d, d);
        for (size_t k = 0; k < K; ++k) cj += U(j, k) * sys.collapse_ops[k].mat;
        out.collapse_ops.emplace_back(sys.space, std::move(cj));
    }
    return out;
}

// Histogram of emission-jump pair delays, normalized by the uncorrelated rate
// (steady flux)^2 * bin width * observed time. Bins are [tau_k, tau_k + width)
// with tau_k = k * width. Trajectories start from the model ground state and
// the first `warmup` time units are discarded.
inline CorrelationSeries g2_from_jumps(const OpenSystem& sys_in, const TrajectoryConfig& cfg,
                                       double tau_max, int n_bins, double warmup = 10.0,
                                       unsigned n_threads = 0) {
    require(tau_max > 0 && n_bins >= 2, "g2_from_jumps: bad tau grid");
    require(warmup >= 0 && warmup < cfg.t_max, "g2_from_jumps: warmup must fit inside t_max");
    OpenSystem sys = emission_unraveling(sys_in);

    TrajectoryConfig tcfg = cfg;
    tcfg.record_stride = 0;  // jump times only
    detail::McwfEngine engine(sys, tcfg);
    if (n_threads == 0) n_threads = std::thread::hardware_concurrency();

    Vector psi0 = Vector::Zero(sys.space.dim());
    psi0(0) = 1.0;

    const double width = tau_max / n_bins;
    const double t_obs = tcfg.t_max - warmup;
    std::vector<std::vector<long>> counts(tcfg.n_traj, std::vector<long>(n_bins, 0));
    std::vector<long> jumps_per_traj(tcfg.n_traj, 0);

    detail::parallel_trajectories(tcfg.n_traj, n_threads, [&](int i) {
        std::vector<double> emissions;
        engine.run(
            psi0, tcfg, std::uint64_t(i), [](double, const Vector&) {},
            [&](double t, int ch) {
                if (ch == 0 && t >= warmup) emissions.push_back(t);
            });
        jumps_per_traj[i] = long(emissions.size());
        auto& cnt = counts[i];
        for (size_t a = 0; a < emissions.size(); ++a)
            for (size_t b = a + 1; b < emissions.size(); ++b) {
                const double dt = emissions[b] - emissions[a];
                if (dt >= tau_max) break;
                cnt[size_t(dt / width)]++;
            }
    });

    long total_jumps = std::accumulate(jumps_per_traj.begin(), jumps_per_traj.end(), 0L);
    if (total_jumps == 0)
        throw numeric_failure("g2_from_jumps: no emission jumps recorded for '" + sys.label +
                              "' in t_max = " + std::to_string(tcfg.t_max) +
                              " (observed flux 0); increase t_max or n_traj");
    const double flux = double(total_jumps) / (double(tcfg.n_traj) * t_obs);

    CorrelationSeries out;
    out.method = CorrelationMethod::JumpPairStochastic;
    out.model_label = sys.label;
    out.seed = tcfg.seed;
    long total_pairs = 0;
    const double nt = double(tcfg.n_traj);
    for (int b = 0; b < n_bins; ++b) {
        // pair counts within one trajectory share jumps, so the bin variance is
        // estimated across the independent trajectories instead of as Poisson
        double sum = 0, sumsq = 0;
        for (const auto& c : counts) {
            sum += double(c[b]);
            sumsq += double(c[b]) * double(c[b]);
        }
        const long n = std::lround(sum);
        total_pairs += n;
        const double var_traj = std::max(0.0, sumsq / nt - (sum / nt) * (sum / nt));
        const double sig_total = std::sqrt(std::max(nt * var_traj, 1.0));

        const double center = (b + 0.5) * width;
        const double expected = flux * flux * width * nt * std::max(t_obs - center, 1e-12);
        const double g = sum / expected;
        const double sig_count = sig_total / expected;
        const double sig_flux = 2.0 * g / std::sqrt(double(total_jumps));
        out.tau.push_back(b * width);
        out.g2.push_back(g);
        out.stderr_.push_back(std::hypot(sig_count, sig_flux));
        out.pair_counts.push_back(n);
    }
    if (total_pairs == 0)
        throw numeric_failure("g2_from_jumps: under-sampled run for '" + sys.label +
                              "': observed flux " + std::to_string(flux) +
                              " produced no pairs within tau_max");
    return out;
}

// ---------------------------------------------------------------------------
// Frequency extraction
// ---------------------------------------------------------------------------

// Subtract the asymptotic mean (tail average), apply a decaying Hann window,
// evaluate the one-sided transform magnitude on an oversampled uniform
// frequency grid, and report parabolic-interpolated local maxima whose
// prominence exceeds the amplitude floor. The transform is normalized so a
// pure cosine of amplitude A reports a peak amplitude close to A.
inline FrequencyReport extract_frequencies(const CorrelationSeries& series,
                                           double amplitude_floor = 0.005, int oversample = 4) {
    const size_t n = series.tau.size();
    require(n >= 64, "extract_frequencies: need at least 64 grid points");
    require(amplitude_floor > 0 && oversample >= 1, "extract_frequencies: bad options");
    const double T = series.tau.back();
    const double dt = series.tau[1] - series.tau[0];

    const size_t ntail = std::max<size_t>(4, n / 10);
    double base = 0;
    for (size_t k = n - ntail; k < n; ++k) base += series.g2[k];
    base /= double(ntail);

    std::vector<double> wy(n);
    double wsum = 0;
    for (size_t k = 0; k < n; ++k) {
        const double w = 0.5 * (1.0 + std::cos(M_PI * series.tau[k] / T));
        wy[k] = w * (series.g2[k] - base);
        wsum += w;
    }

    const size_t nfreq = n * size_t(oversample);
    const double om_max = M_PI / dt;  // Nyquist of the tau grid
    const double dom = om_max / double(nfreq - 1);
    std::vector<double> S(nfreq);
    for (size_t q = 0; q < nfreq; ++q) {
        const double om = q * dom;
        double re = 0, im = 0;
        for (size_t k = 0; k < n; ++k) {
            re += wy[k] * std::cos(om * series.tau[k]);
            im -= wy[k] * std::sin(om * series.tau[k]);
        }
        S[q] = std::hypot(re, im) / (0.5 * wsum);
    }

    FrequencyReport rep;
    rep.amplitude_floor = amplitude_floor;
    for (size_t k = 1; k + 1 < nfreq; ++k) {
        if (!(S[k] > S[k - 1] && S[k] >= S[k + 1])) continue;
        // prominence: drop to the higher of the two flanking valleys
        double lmin = S[k], rmin = S[k];
        for (size_t j = k; j > 0 && S[j - 1] <= S[k]; --j) lmin = std::min(lmin, S[j - 1]);
        for (size_t j = k; j + 1 < nfreq && S[j + 1] <= S[k]; ++j) rmin = std::min(rmin, S[j + 1]);
        const double prom = S[k] - std::max(lmin, rmin);
        if (prom < amplitude_floor) continue;

        const double y0 = S[k - 1], y1 = S[k], y2 = S[k + 1];
        const double den = y0 - 2 * y1 + y2;
        const double shift = den != 0 ? 0.5 * (y0 - y2) / den : 0.0;

        const double half = S[k] - 0.5 * prom;
        size_t l = k, r = k;
        while (l > 0 && S[l] > half) --l;
        while (r + 1 < nfreq && S[r] > half) ++r;

        rep.peaks.push_back({(double(k) + shift) * dom, prom, double(r - l) * dom});
    }
    std::sort(rep.peaks.begin(), rep.peaks.end(),
              [](const SpectralPeak& a, const SpectralPeak& b) { return a.amplitude > b.amplitude; });
    return rep;
}

// Amplitude-weighted mean frequency of the peaks inside [lo, hi]; empty if
// none. A modulation that is Rabi-split into a doublet is summarized by its
// centroid.
inline std::optional<double> band_peak_frequency(const FrequencyReport& rep, double lo,
                                                 double hi) {
    double wsum = 0, fsum = 0;
    for (const auto& p : rep.peaks)
        if (p.frequency >= lo && p.frequency <= hi) {
            wsum += p.amplitude;
            fsum += p.amplitude * p.frequency;
        }
    if (wsum == 0) return std::nullopt;
    return fsum / wsum;
}

// ---------------------------------------------------------------------------
// Series utilities
// ---------------------------------------------------------------------------

inline double interp_series(const CorrelationSeries& s, double tau) {
    const auto& t = s.tau;
    auto it = std::upper_bound(t.begin(), t.end(), tau);
    if (it == t.begin()) return s.g2.front();
    if (it == t.end()) return s.g2.back();
    const size_t j = size_t(it - t.begin());
    const double w = (tau - t[j - 1]) / (t[j] - t[j - 1]);
    return (1 - w) * s.g2[j - 1] + w * s.g2[j];
}

// Mean of a densely sampled series over [lo, hi) (for bin-wise comparison
// against histogram estimates).
inline double series_bin_mean(const CorrelationSeries& s, double lo, double hi) {
    double acc = 0;
    int cnt = 0;
    for (size_t k = 0; k < s.tau.size(); ++k)
        if (s.tau[k] >= lo && s.tau[k] < hi) {
            acc += s.g2[k];
            ++cnt;
        }
    if (cnt == 0) return interp_series(s, 0.5 * (lo + hi));
    return acc / cnt;
}

// First tau at which g2 crosses `level` from below (linear interpolation).
inline std::optional<double> first_crossing(const CorrelationSeries& s, double level) {
    for (size_t k = 0; k < s.tau.size(); ++k) {
        if (s.g2[k] >= level) {
            if (k == 0) return s.tau[0];
            const double y0 = s.g2[k - 1], y1 = s.g2[k];
            return s.tau[k - 1] + (level - y0) * (s.tau[k] - s.tau[k - 1]) / (y1 - y0);
        }
    }
    return std::nullopt;
}

struct SeriesComparison {
    double max_abs_diff = 0;
    double rms_diff = 0;
    double g2_zero_diff = 0;
    // peak frequencies of a matched to the nearest peak of b: (f_a, f_b)
    std::vector<std::pair<double, double>> peak_matches;
};

inline SeriesComparison compare_series(const CorrelationSeries& a, const CorrelationSeries& b,
                                       double peak_floor = 0.005) {
    const double lo = std::max(a.tau.front(), b.tau.front());
    const double hi = std::min(a.tau.back(), b.tau.back());
    require(lo < hi, "compare_series: tau ranges do not overlap");

    SeriesComparison cmp;
    double acc = 0;
    int cnt = 0;
    for (size_t k = 0; k < a.tau.size(); ++k) {
        const double t = a.tau[k];
        if (t < lo || t > hi) continue;
        const double d = std::abs(a.g2[k] - interp_series(b, t));
        cmp.max_abs_diff = std::max(cmp.max_abs_diff, d);
        acc += d * d;
        ++cnt;
    }
    cmp.rms_diff = cnt ? std::sqrt(acc / cnt) : 0.0;
    cmp.g2_zero_diff = std::abs(a.g2.front() - b.g2.front());

    if (a.tau.size() >= 64 && b.tau.size() >= 64) {
        FrequencyReport fa = extract_frequencies(a, peak_floor);
        FrequencyReport fb = extract_frequencies(b, peak_floor);
        for (const auto& pa : fa.peaks) {
            double best = -1, bd = std::numeric_limits<double>::infinity();
            for (const auto& pb : fb.peaks) {
                const double d = std::abs(pa.frequency - pb.frequency);
                if (d < bd) {
                    bd = d;
                    best = pb.frequency;
                }
            }
            if (best >= 0) cmp.peak_matches.emplace_back(pa.frequency, best);
        }
    }
    return cmp;
}

}  // namespace cqed
