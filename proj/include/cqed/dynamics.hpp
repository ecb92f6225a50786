// dynamics.hpp — deterministic Lindblad evolution / steady states (the oracle)
// and stochastic Monte-Carlo wave-function trajectories (jump unraveling).

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "cqed/models.hpp"

namespace cqed {

// ---------------------------------------------------------------------------
// Deterministic path
// ---------------------------------------------------------------------------

// Lindblad generator as a dim^2 x dim^2 supermatrix in the column-stacking
// convention: vec(rho) stacks columns, vec(A rho B) = (B^T kron A) vec(rho).
struct LindbladGenerator {
    HilbertSpace space;
    Matrix supermatrix;
};

namespace detail {
inline Matrix kron_dense(const Matrix& A, const Matrix& B) {
    Matrix m(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            m.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return m;
}
}  // namespace detail

// L(rho) = -i [H, rho] + sum_k ( C_k rho C_k^dag - 1/2 {C_k^dag C_k, rho} ).
inline LindbladGenerator liouvillian(const OpenSystem& sys) {
    sys.check_invariants();
    const int d = sys.space.dim();
    const Matrix id = Matrix::Identity(d, d);
    const Complex I(0, 1);
    Matrix L = -I * (detail::kron_dense(id, sys.hamiltonian.mat) -
                     detail::kron_dense(sys.hamiltonian.mat.transpose(), id));
    for (const auto& c : sys.collapse_ops) {
        const Matrix cdc = c.mat.adjoint() * c.mat;
        L += detail::kron_dense(c.mat.conjugate(), c.mat) -
             0.5 * detail::kron_dense(id, cdc) - 0.5 * detail::kron_dense(cdc.transpose(), id);
    }
    return {sys.space, std::move(L)};
}

inline Vector vec(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());  // Eigen is column-major
}

inline Matrix unvec(const Vector& v, int d) {
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

inline DensityMatrix apply_generator(const LindbladGenerator& gen, const DensityMatrix& rho) {
    check_same_space(gen.space, rho.space, "apply_generator");
    const int d = gen.space.dim();
    return {gen.space, unvec(gen.supermatrix * vec(rho.mat), d)};
}

// Stationary density matrix from the kernel of the supermatrix. A second
// near-zero singular value (below 1e-10 of the largest) means the steady state
// is not unique and is reported as a numeric failure.
inline DensityMatrix steady_state(const LindbladGenerator& gen) {
    const int d = gen.space.dim();
    Eigen::BDCSVD<Matrix> svd(gen.supermatrix, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double largest = sv(0);
    if (sv.size() >= 2 && sv(sv.size() - 2) < 1e-10 * largest)
        throw numeric_failure("steady_state: degenerate Liouvillian kernel (sigma_1 = " +
                              std::to_string(sv(sv.size() - 2) / largest) + " of largest)");
    Matrix rho = unvec(svd.matrixV().col(sv.size() - 1), d);
    // rotate the arbitrary global phase so the trace is real positive
    const Complex tr = rho.trace();
    rho *= std::polar(1.0, -std::arg(tr));
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();

    const double residual = (gen.supermatrix * vec(rho)).norm();
    const double scale = gen.supermatrix.norm();
    if (residual > 1e-8 * scale)
        throw numeric_failure("steady_state: kernel residual " + std::to_string(residual) +
                              " exceeds tolerance");
    return {gen.space, std::move(rho)};
}

// rho(t) = exp(L t) rho0 via scaling-and-squaring matrix exponential.
inline DensityMatrix evolve_density(const DensityMatrix& rho0, const LindbladGenerator& gen,
                                    double t) {
    require(t >= 0, "evolve_density: t must be >= 0");
    check_same_space(gen.space, rho0.space, "evolve_density");
    const int d = gen.space.dim();
    const Matrix E = (gen.supermatrix * t).exp();
    return {gen.space, unvec(E * vec(rho0.mat), d)};
}

// Fixed-step propagator for repeated stepping (correlation grids).
struct LindbladPropagator {
    HilbertSpace space;
    Matrix step;  // exp(L dt)
};

inline LindbladPropagator make_propagator(const LindbladGenerator& gen, double dt) {
    require(dt > 0, "make_propagator: dt must be > 0");
    return {gen.space, (gen.supermatrix * dt).exp()};
}

// Slowest decay rate of the generator (spectral gap): the smallest nonzero
// |Re lambda| over the Liouvillian spectrum. Used to size correlation grids.
inline double spectral_gap(const LindbladGenerator& gen) {
    Eigen::ComplexEigenSolver<Matrix> es(gen.supermatrix, /*computeEigenvectors=*/false);
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double re = es.eigenvalues()(k).real();
        if (re < -1e-9) gap = std::min(gap, -re);
    }
    if (!std::isfinite(gap))
        throw numeric_failure("spectral_gap: no decaying eigenvalues found");
    return gap;
}

// ---------------------------------------------------------------------------
// Stochastic path
// ---------------------------------------------------------------------------

enum class JumpMethod { NormThreshold, FirstOrderProbability };

struct TrajectoryConfig {
    double dt = 1e-3;       // propagation step (also the recording resolution)
    double t_max = 100.0;   // trajectory horizon
    int n_traj = 1;         // ensemble size
    std::uint64_t seed = 1; // base seed; trajectory i derives its own stream
    JumpMethod jump_method = JumpMethod::FirstOrderProbability;
    int record_stride = 1;  // record every k-th step; 0 = jumps only

    void validate() const {
        require(dt > 0, "TrajectoryConfig: dt must be > 0");
        require(t_max > 0, "TrajectoryConfig: t_max must be > 0");
        require(n_traj >= 1, "TrajectoryConfig: n_traj must be >= 1");
    }
};

struct JumpEvent {
    double time = 0;
    int channel = 0;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<StateVector> states;  // normalized snapshots on the recording grid
    std::vector<JumpEvent> jumps;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Platform-independent uniform double in [0, 1) from the raw engine output;
// std::uniform_real_distribution is not bit-stable across implementations.
class UniformStream {
public:
    UniformStream(std::uint64_t seed, std::uint64_t index)
        : eng_(splitmix64(seed ^ splitmix64(index + 0x1234567ull))) {}
    double next() { return double(eng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 eng_;
};

// One classical RK4 step of dpsi/dt = -i H_nh psi (no renormalization).
inline void rk4_step(const Matrix& Hnh, Vector& psi, double dt, Vector& k1, Vector& k2,
                     Vector& k3, Vector& k4) {
    const Complex mi(0, -1);
    k1 = mi * (Hnh * psi);
    k2 = mi * (Hnh * (psi + 0.5 * dt * k1));
    k3 = mi * (Hnh * (psi + 0.5 * dt * k2));
    k4 = mi * (Hnh * (psi + dt * k3));
    psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct McwfEngine {
    Matrix Hnh;
    std::vector<Matrix> C;     // collapse operators
    std::vector<Matrix> CdC;
    double dt_sub = 0;         // refined internal step
    int substeps = 1;          // per recording step
    double max_rate = 0;

    McwfEngine(const OpenSystem& sys, const TrajectoryConfig& cfg) {
        cfg.validate();
        Hnh = nonhermitian_hamiltonian(sys);
        for (const auto& c : sys.collapse_ops) {
            C.push_back(c.mat);
            CdC.push_back(c.mat.adjoint() * c.mat);
        }
        max_rate = 0;
        for (const auto& m : CdC) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(m);
            max_rate = std::max(max_rate, es.eigenvalues().maxCoeff());
        }
        if (cfg.dt * max_rate > 0.05)
            throw invalid_input("TrajectoryConfig: dt too large for the collapse rates "
                                "(dt * max_rate = " +
                                std::to_string(cfg.dt * max_rate) + " > 0.05)");
        // a-priori refinement resolves the fastest Hamiltonian scale; the
        // 1%-per-decision jump-probability cap is enforced dynamically inside
        // the stepper from the actual state, not from the worst-case rate
        const double h_scale = Hnh.cwiseAbs().rowwise().sum().maxCoeff();
        substeps = 1;
        while ((cfg.dt / substeps) * h_scale > 0.35) substeps *= 2;
        dt_sub = cfg.dt / substeps;
    }

    // Runs one trajectory; on_record(time, psi_normalized) fires on the
    // recording grid (if record_stride > 0), on_jump(time, channel) at jumps.
    template <typename RecordFn, typename JumpFn>
    void run(const Vector& psi0, const TrajectoryConfig& cfg, std::uint64_t traj_index,
             RecordFn&& on_record, JumpFn&& on_jump) const {
        UniformStream rng(cfg.seed, traj_index);
        const int nsteps = int(std::llround(cfg.t_max / cfg.dt));
        Vector psi = psi0, k1, k2, k3, k4;
        std::vector<double> p(C.size());

        if (cfg.record_stride > 0) on_record(0.0, psi);

        if (cfg.jump_method == JumpMethod::FirstOrderProbability) {
            for (int s = 0; s < nsteps; ++s) {
                for (int sub = 0; sub < substeps; ++sub) {
                    double t = s * cfg.dt + sub * dt_sub;
                    // split the substep so every jump decision sees p <= 0.01
                    double remaining = dt_sub;
                    for (int guard = 0; remaining > 1e-15 && guard < 1024; ++guard) {
                        double rate = 0;
                        for (size_t k = 0; k < C.size(); ++k) {
                            p[k] = std::real(psi.dot(CdC[k] * psi));
                            rate += p[k];
                        }
                        double h = remaining;
                        if (h * rate > 0.01) h = 0.01 / rate;
                        const double ptot = h * rate;
                        const double r = rng.next();
                        if (r < ptot) {
                            size_t ch = pick_channel(p, rate, rng.next());
                            psi = (C[ch] * psi).eval();
                            psi /= psi.norm();
                            on_jump(t, int(ch));
                        } else {
                            rk4_step(Hnh, psi, h, k1, k2, k3, k4);
                            psi /= psi.norm();
                        }
                        t += h;
                        remaining -= h;
                    }
                }
                maybe_record(cfg, s + 1, psi, on_record);
            }
        } else {  // norm threshold: propagate unnormalized until ||psi||^2 < r
            double threshold = rng.next();
            for (int s = 0; s < nsteps; ++s) {
                for (int sub = 0; sub < substeps; ++sub) {
                    const double t = s * cfg.dt + sub * dt_sub;
                    rk4_step(Hnh, psi, dt_sub, k1, k2, k3, k4);
                    if (psi.squaredNorm() < threshold) {
                        double rate = 0;
                        for (size_t k = 0; k < C.size(); ++k) {
                            p[k] = std::real(psi.dot(CdC[k] * psi));
                            rate += p[k];
                        }
                        size_t ch = pick_channel(p, rate, rng.next());
                        psi = (C[ch] * psi).eval();
                        psi /= psi.norm();
                        on_jump(t + dt_sub, int(ch));
                        threshold = rng.next();
                    }
                }
                maybe_record(cfg, s + 1, psi, on_record);
            }
        }
    }

private:
    static size_t pick_channel(const std::vector<double>& p, double ptot, double u) {
        double acc = 0;
        for (size_t k = 0; k < p.size(); ++k) {
            acc += p[k] / ptot;
            if (u < acc) return k;
        }
        return p.size() - 1;
    }

    template <typename RecordFn>
    static void maybe_record(const TrajectoryConfig& cfg, int step, const Vector& psi,
                             RecordFn&& on_record) {
        if (cfg.record_stride > 0 && step % cfg.record_stride == 0)
            on_record(step * cfg.dt, psi.normalized());
    }
};

// Deterministic parallel-for over trajectory indices: results land in
// pre-assigned slots, so the outcome is identical for any worker count.
inline void parallel_trajectories(int n_traj, unsigned n_threads,
                                  const std::function<void(int)>& body) {
    if (n_threads <= 1 || n_traj <= 1) {
        for (int i = 0; i < n_traj; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const unsigned workers = std::min<unsigned>(n_threads, unsigned(n_traj));
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n_traj; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

// Monte-Carlo wave-function ensemble: propagate |psi> with H_nh between jumps,
// jump with probability dt <C_k^dag C_k> (or by norm threshold), collapse to
// C_k psi / ||C_k psi||. Trajectory i uses an independent stream derived from
// (seed, i), so results do not depend on scheduling or worker count.
inline std::vector<TrajectoryRecord> mcwf_ensemble(const OpenSystem& sys, const StateVector& psi0,
                                                   const TrajectoryConfig& cfg,
                                                   unsigned n_threads = 0) {
    check_same_space(sys.space, psi0.space, "mcwf_ensemble");
    require(std::abs(psi0.norm() - 1.0) <= 1e-10, "mcwf_ensemble: psi0 must be normalized");
    require(cfg.record_stride >= 1, "mcwf_ensemble: record_stride must be >= 1");
    detail::McwfEngine engine(sys, cfg);
    if (n_threads == 0) n_threads = std::thread::hardware_concurrency();

    std::vector<TrajectoryRecord> out(cfg.n_traj);
    detail::parallel_trajectories(cfg.n_traj, n_threads, [&](int i) {
        TrajectoryRecord rec;
        engine.run(
            psi0.amps, cfg, std::uint64_t(i),
            [&](double t, const Vector& psi) {
                rec.times.push_back(t);
                rec.states.emplace_back(sys.space, psi);
            },
            [&](double t, int ch) { rec.jumps.push_back({t, ch}); });
        out[i] = std::move(rec);
    });
    return out;
}

// Ensemble mean and standard error of <O>(t) over a trajectory ensemble.
struct EnsembleObservable {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> stderr_;
};

inline EnsembleObservable ensemble_expectation(const std::vector<TrajectoryRecord>& ens,
                                               const Operator& op) {
    require(!ens.empty() && !ens[0].times.empty(), "ensemble_expectation: empty ensemble");
    const size_t nt = ens[0].times.size();
    EnsembleObservable out;
    out.times = ens[0].times;
    out.mean.assign(nt, 0.0);
    out.stderr_.assign(nt, 0.0);
    std::vector<double> sumsq(nt, 0.0);
    for (const auto& rec : ens) {
        require(rec.times.size() == nt, "ensemble_expectation: ragged ensemble");
        for (size_t k = 0; k < nt; ++k) {
            const double v = std::real(expectation(op, rec.states[k]));
            out.mean[k] += v;
            sumsq[k] += v * v;
        }
    }
    const double n = double(ens.size());
    for (size_t k = 0; k < nt; ++k) {
        out.mean[k] /= n;
        const double var = std::max(0.0, sumsq[k] / n - out.mean[k] * out.mean[k]);
        out.stderr_[k] = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    }
    return out;
}

}  // namespace cqed
