// models.hpp — driven Jaynes-Cummings and EIT-Kerr systems, exact and
// effective two-manifold (polariton) variants, with derived parameters.
//
// Conventions: hbar = 1, all rates and energies are angular frequencies in
// units of the cavity decay kappa. Hamiltonians live in the frame rotating at
// the drive laser; dissipation is carried by collapse operators only.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cqed/hilbert.hpp"

namespace cqed {

struct JCParams {
    double g = 6.0;       // atom-cavity coupling
    double theta = 6.0;   // drive detuning theta = omega_L - omega_cav
    double pump = 0.1;    // drive amplitude E_p
    double kappa = 1.0;   // cavity decay (the unit)
    double gamma = 0.1;   // atomic spontaneous emission
    int n_max = 4;        // cavity photon truncation

    void validate(bool exact_model = true) const {
        require(g > 0, "JCParams: g must be > 0");
        require(kappa > 0, "JCParams: kappa must be > 0");
        require(gamma >= 0, "JCParams: gamma must be >= 0");
        require(pump >= 0, "JCParams: pump must be >= 0");
        if (exact_model) require(n_max >= 2, "JCParams: n_max must be >= 2 for exact runs");
    }
};

struct EITParams {
    double g1 = 6.0, g2 = 6.0;  // cavity couplings 1<->3 and 2<->4
    double omega_c = 6.0;       // coupling-laser Rabi frequency
    double delta = 0.2;         // level-3 detuning
    double Delta = 0.0;         // level-4 detuning
    double pump = 0.7;          // drive amplitude E_p
    double kappa = 1.0;
    double gamma1 = 0.1, gamma2 = 0.1, gamma3 = 0.1;  // decay channels 3->1, 3->2, 4->2
    int n_max = 4;

    void validate() const {
        require(g1 > 0 && g2 > 0 && omega_c > 0, "EITParams: g1, g2, omega_c must be > 0");
        require(gamma1 >= 0 && gamma2 >= 0 && gamma3 >= 0, "EITParams: decay rates must be >= 0");
        require(kappa > 0, "EITParams: kappa must be > 0");
        require(pump >= 0, "EITParams: pump must be >= 0");
        require(n_max >= 2, "EITParams: n_max must be >= 2");
    }
};

// Derived two-manifold EIT quantities. The photon-amplitude coefficients c_j
// and the drive Rabi frequencies obey Omega_j = 2*pump*c_j in the same gauge
// (c_plus/c_minus negative, c0 positive).
struct EffectiveEITParams {
    double eps_plus = 0, eps_minus = 0;       // bright-polariton energies
    double omega_plus = 0, omega_minus = 0;   // drive couplings to |phi_+->
    double omega_r = 0;                       // drive coupling to the dark polariton
    double gamma0 = 0;                        // dark-polariton decay rate
    double gamma1_plus = 0, gamma1_minus = 0; // bright-polariton decay rates
    double c0 = 0, c_plus = 0, c_minus = 0;   // photon amplitudes of |phi_0>, |phi_+->
};

// Hamiltonian + collapse channels + the operator whose g2 is measured.
// excitation_op is set only for the exact models (it grades the manifold
// structure); effective models leave it empty. The builders stash their
// parameter record so downstream analysis can echo and cross-check it.
struct OpenSystem {
    HilbertSpace space;
    Operator hamiltonian;
    std::vector<Operator> collapse_ops;
    Operator field_op;
    std::string label;
    std::optional<Operator> excitation_op;
    std::optional<JCParams> jc_params;
    std::optional<EITParams> eit_params;

    void check_invariants() const {
        require(hamiltonian.is_hermitian(1e-12),
                "OpenSystem '" + label + "': Hamiltonian must be Hermitian");
        for (const auto& c : collapse_ops) check_same_space(space, c.space, "OpenSystem collapse op");
        check_same_space(space, field_op.space, "OpenSystem field op");
    }
};

// H - (i/2) sum_k C_k^dag C_k, the non-Hermitian Hamiltonian that generates
// the no-jump evolution.
inline Matrix nonhermitian_hamiltonian(const OpenSystem& sys) {
    Matrix h = sys.hamiltonian.mat;
    for (const auto& c : sys.collapse_ops)
        h -= Complex(0, 0.5) * (c.mat.adjoint() * c.mat);
    return h;
}

// ---------------------------------------------------------------------------
// Exact models
// ---------------------------------------------------------------------------

// Driven two-level atom in a cavity:
//   H = theta (sigma_z/2 + a^dag a) + i g (a^dag sigma_- - a sigma_+) + i E_p (a - a^dag)
// collapse ops sqrt(kappa) a and sqrt(gamma) sigma_-. With this sign of theta,
// driving at theta = g addresses the vacuum Rabi resonance whose second
// excitation step is detuned by (2 - sqrt(2)) g.
inline OpenSystem build_jc(const JCParams& p) {
    p.validate();
    const int L = 2;  // levels: 1 = ground (-), 2 = excited (+)
    Operator a_c = fock_annihilation(p.n_max);
    Operator id_c = identity(a_c.space);
    Operator sm_a = atomic_transition(L, 1, 2);
    Operator sp_a = atomic_transition(L, 2, 1);
    Operator sz_a = atomic_transition(L, 2, 2) - atomic_transition(L, 1, 1);
    Operator id_a = identity(sm_a.space);

    Operator a = tensor(a_c, id_a);
    Operator sm = tensor(id_c, sm_a);
    Operator sp = tensor(id_c, sp_a);
    Operator sz = tensor(id_c, sz_a);
    Operator n_ph = a.adjoint() * a;

    const Complex I(0, 1);
    Operator H = p.theta * (0.5 * sz + n_ph) + I * p.g * (a.adjoint() * sm - a * sp) +
                 I * p.pump * (a - a.adjoint());

    Operator excit = n_ph + tensor(id_c, atomic_transition(L, 2, 2));

    OpenSystem sys{a.space,
                   H,
                   {std::sqrt(p.kappa) * a, std::sqrt(p.gamma) * sm},
                   a,
                   "jc-exact",
                   excit,
                   p,
                   std::nullopt};
    sys.check_invariants();
    return sys;
}

// Driven four-level EIT-Kerr atom in a cavity:
//   H = delta s33 + Delta s44
//       + i [ g1 (a^dag s13 - s31 a) + Omega_c (s23 - s32) + g2 (a^dag s24 - s42 a) ]
//       + i E_p (a - a^dag)
// collapse ops sqrt(kappa) a, sqrt(gamma1) s13, sqrt(gamma2) s23, sqrt(gamma3) s24
// (level 3 decays to 1 and 2, level 4 to 2).
inline OpenSystem build_eit(const EITParams& p) {
    p.validate();
    const int L = 4;
    Operator a_c = fock_annihilation(p.n_max);
    Operator id_c = identity(a_c.space);
    auto sig = [&](int i, int j) { return tensor(id_c, atomic_transition(L, i, j)); };
    Operator a = tensor(a_c, identity(atomic_transition(L, 1, 1).space));

    const Complex I(0, 1);
    Operator H = p.delta * sig(3, 3) + p.Delta * sig(4, 4) +
                 I * p.g1 * (a.adjoint() * sig(1, 3) - sig(3, 1) * a) +
                 I * p.omega_c * (sig(2, 3) - sig(3, 2)) +
                 I * p.g2 * (a.adjoint() * sig(2, 4) - sig(4, 2) * a) +
                 I * p.pump * (a - a.adjoint());

    // Excitation grading: photons + level weights (0,1,1,2). Level 2 is one
    // Raman quantum below level 3; level 4 sits two excitations up.
    Operator excit = a.adjoint() * a + sig(2, 2) + sig(3, 3) + 2.0 * sig(4, 4);

    OpenSystem sys{a.space,
                   H,
                   {std::sqrt(p.kappa) * a, std::sqrt(p.gamma1) * sig(1, 3),
                    std::sqrt(p.gamma2) * sig(2, 3), std::sqrt(p.gamma3) * sig(2, 4)},
                   a,
                   "eit-exact",
                   excit,
                   std::nullopt,
                   p};
    sys.check_invariants();
    return sys;
}

// ---------------------------------------------------------------------------
// Effective two-manifold models
// ---------------------------------------------------------------------------

// Two-manifold Jaynes-Cummings model on {|G>, |e_->, |e_+>} with q_j = |G><e_j|:
//   H = 2 theta q_+^dag q_+ + i (E_p / sqrt 2) (q_- - q_-^dag + q_+ - q_+^dag)
// and per-polariton collapse rate decay_scale * (gamma + kappa). decay_scale = 1
// keeps the face-value rate; 0.5 gives the rate obtained by substituting the
// polariton operators into the exact dissipator and dropping cross terms.
// The measured field is a_eff = (q_+ + q_-) / sqrt 2 (drive-coefficient gauge).
inline OpenSystem build_jc_effective(const JCParams& p, double decay_scale = 1.0) {
    p.validate(/*exact_model=*/false);
    require(decay_scale > 0, "build_jc_effective: decay_scale must be > 0");
    HilbertSpace s({{"polariton", 3}});  // 0 = G, 1 = e_-, 2 = e_+
    Matrix qm = Matrix::Zero(3, 3), qp = Matrix::Zero(3, 3);
    qm(0, 1) = 1.0;
    qp(0, 2) = 1.0;
    const Complex I(0, 1);
    Matrix H = 2.0 * p.theta * (qp.adjoint() * qp) +
               I * (p.pump / std::sqrt(2.0)) * (qm - qm.adjoint() + qp - qp.adjoint());
    const double rate = decay_scale * (p.gamma + p.kappa);
    Matrix f = (qp + qm) / std::sqrt(2.0);

    OpenSystem sys{s,
                   Operator{s, H},
                   {Operator{s, std::sqrt(rate) * qm}, Operator{s, std::sqrt(rate) * qp}},
                   Operator{s, f},
                   "jc-effective",
                   std::nullopt,
                   p,
                   std::nullopt};
    sys.check_invariants();
    return sys;
}

inline EffectiveEITParams derive_eit_parameters(const EITParams& p) {
    p.validate();
    EffectiveEITParams e;
    const double r = p.g1 / p.omega_c;
    const double root = std::sqrt(0.25 * p.delta * p.delta + p.omega_c * p.omega_c + p.g1 * p.g1);
    e.eps_plus = 0.5 * p.delta + root;
    e.eps_minus = 0.5 * p.delta - root;
    const double np = std::sqrt(1.0 + std::pow(e.eps_plus / p.omega_c, 2) + r * r);
    const double nm = std::sqrt(1.0 + std::pow(e.eps_minus / p.omega_c, 2) + r * r);
    e.c0 = 1.0 / std::sqrt(1.0 + r * r);
    e.c_plus = -r / np;
    e.c_minus = -r / nm;
    e.omega_r = 2.0 * p.pump * e.c0;
    e.omega_plus = 2.0 * p.pump * e.c_plus;
    e.omega_minus = 2.0 * p.pump * e.c_minus;
    const double g12 = p.gamma1 + p.gamma2;
    const double den_p = p.g1 * p.g1 + p.omega_c * p.omega_c + e.eps_plus * e.eps_plus;
    const double den_m = p.g1 * p.g1 + p.omega_c * p.omega_c + e.eps_minus * e.eps_minus;
    e.gamma0 = p.kappa / (1.0 + r * r);
    e.gamma1_plus = (p.kappa * p.g1 * p.g1 + g12 * e.eps_plus * e.eps_plus) / den_p;
    e.gamma1_minus = (p.kappa * p.g1 * p.g1 + g12 * e.eps_minus * e.eps_minus) / den_m;
    return e;
}

// Two-manifold EIT model on {|G>, |phi_0>, |phi_->, |phi_+>} with p_j = |G><phi_j|:
//   H = eps_- p_-^dag p_- + eps_+ p_+^dag p_+
//       + i (Omega_-/2)(p_- - p_-^dag) + i (Omega_+/2)(p_+ - p_+^dag)
//       + i (Omega_R/2)(p_0 - p_0^dag)
// collapse rates decay_scale * 2 Gamma_j per polariton (see build_jc_effective
// for the decay_scale convention); field a_eff = c0 p_0 + c+ p_+ + c- p_-.
inline std::pair<EffectiveEITParams, OpenSystem> derive_eit_effective(const EITParams& p,
                                                                      double decay_scale = 1.0) {
    require(decay_scale > 0, "derive_eit_effective: decay_scale must be > 0");
    EffectiveEITParams e = derive_eit_parameters(p);
    HilbertSpace s({{"polariton", 4}});  // 0 = G, 1 = phi_0, 2 = phi_-, 3 = phi_+
    Matrix p0 = Matrix::Zero(4, 4), pm = Matrix::Zero(4, 4), pp = Matrix::Zero(4, 4);
    p0(0, 1) = 1.0;
    pm(0, 2) = 1.0;
    pp(0, 3) = 1.0;
    const Complex I(0, 1);
    Matrix H = e.eps_minus * (pm.adjoint() * pm) + e.eps_plus * (pp.adjoint() * pp) +
               I * (e.omega_minus / 2.0) * (pm - pm.adjoint()) +
               I * (e.omega_plus / 2.0) * (pp - pp.adjoint()) +
               I * (e.omega_r / 2.0) * (p0 - p0.adjoint());
    Matrix f = e.c0 * p0 + e.c_plus * pp + e.c_minus * pm;

    OpenSystem sys{s,
                   Operator{s, H},
                   {Operator{s, std::sqrt(decay_scale * 2.0 * e.gamma0) * p0},
                    Operator{s, std::sqrt(decay_scale * 2.0 * e.gamma1_minus) * pm},
                    Operator{s, std::sqrt(decay_scale * 2.0 * e.gamma1_plus) * pp}},
                   Operator{s, f},
                   "eit-effective",
                   std::nullopt,
                   std::nullopt,
                   p};
    sys.check_invariants();
    return {e, sys};
}

// ---------------------------------------------------------------------------
// Manifold analysis
// ---------------------------------------------------------------------------

struct ManifoldSpectrum {
    int n = 0;
    std::vector<double> energies;       // ascending
    std::vector<StateVector> states;    // matching eigenvectors on the full space
    std::optional<double> second_photon_detuning;  // offset of the nearest n=2 level
                                                   // from two-drive-photon resonance (JC)
};

// Analytic first-manifold EIT dressed states, expressed in the same field-phase
// gauge as build_eit (photon component of the dark state positive). Returns
// energies {0, eps_-, eps_+} with matching states {phi_0, phi_-, phi_+}.
inline std::pair<std::vector<double>, std::vector<StateVector>> eit_first_manifold_states(
    const EITParams& p) {
    EffectiveEITParams e = derive_eit_parameters(p);
    HilbertSpace s({{"cavity", p.n_max + 1}, {"atom", 4}});
    const double r = p.g1 / p.omega_c;
    const Complex I(0, 1);

    auto ket = [&](int photons, int level) { return basis_state(s, {photons, level - 1}); };
    auto mk = [&](Complex a11, Complex a02, Complex a03) {
        Vector v = a11 * ket(1, 1).amps + a02 * ket(0, 2).amps + a03 * ket(0, 3).amps;
        return StateVector{s, v / v.norm()};
    };

    std::vector<double> energies{0.0, e.eps_minus, e.eps_plus};
    std::vector<StateVector> states{
        mk(1.0, -r, 0.0),
        mk(r, 1.0, -I * (e.eps_minus / p.omega_c)),
        mk(r, 1.0, -I * (e.eps_plus / p.omega_c)),
    };
    return {energies, states};
}

// Diagonalize the undriven Hamiltonian restricted to the n-excitation
// subspace. The drive only connects neighbouring manifolds, so projecting the
// full H onto the fixed-n block removes it exactly.
inline ManifoldSpectrum manifold_spectrum(const OpenSystem& sys, int n) {
    require(sys.excitation_op.has_value(),
            "manifold_spectrum: only exact models carry an excitation grading ('" + sys.label +
                "' is an effective model)");
    const int n_max = sys.jc_params ? sys.jc_params->n_max : sys.eit_params->n_max;
    require(n >= 0 && n <= n_max, "manifold_spectrum: n=" + std::to_string(n) +
                                      " exceeds the photon truncation n_max=" +
                                      std::to_string(n_max));
    const Matrix& N = sys.excitation_op->mat;
    const int dim = sys.space.dim();

    std::vector<int> idx;
    for (int k = 0; k < dim; ++k)
        if (int(std::lround(N(k, k).real())) == n) idx.push_back(k);
    require(!idx.empty(), "manifold_spectrum: empty manifold n=" + std::to_string(n));

    auto block_of = [&](const std::vector<int>& rows) {
        Matrix b(rows.size(), rows.size());
        for (size_t i = 0; i < rows.size(); ++i)
            for (size_t j = 0; j < rows.size(); ++j)
                b(i, j) = sys.hamiltonian.mat(rows[i], rows[j]);
        return b;
    };

    Eigen::SelfAdjointEigenSolver<Matrix> es(block_of(idx));
    ManifoldSpectrum out;
    out.n = n;
    for (int k = 0; k < int(idx.size()); ++k) {
        out.energies.push_back(es.eigenvalues()(k));
        Vector full = Vector::Zero(dim);
        for (size_t i = 0; i < idx.size(); ++i) full(idx[i]) = es.eigenvectors()(i, k);
        out.states.emplace_back(sys.space, std::move(full));
    }

    if (sys.label == "jc-exact" && n == 2) {
        // In the drive rotating frame an m-photon resonance sits at the ground
        // energy, so the blockade offset is the gap to the nearest n=2 level.
        std::vector<int> g_idx;
        for (int k = 0; k < dim; ++k)
            if (int(std::lround(N(k, k).real())) == 0) g_idx.push_back(k);
        const double e_ground = block_of(g_idx)(0, 0).real();
        double best = std::numeric_limits<double>::infinity();
        for (double e2 : out.energies) best = std::min(best, std::abs(e2 - e_ground));
        out.second_photon_detuning = best;
    }

    if (sys.label == "eit-exact" && n == 1) {
        // Cross-check the numeric eigenvectors against the analytic dressed
        // states {phi_0, phi_-, phi_+}, pairing by energy.
        auto [energies, states] = eit_first_manifold_states(*sys.eit_params);
        for (size_t k = 0; k < energies.size(); ++k) {
            size_t best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (size_t j = 0; j < out.energies.size(); ++j) {
                double d = std::abs(out.energies[j] - energies[k]);
                if (d < bd) { bd = d; best = j; }
            }
            const double fid = std::norm(states[k].amps.dot(out.states[best].amps));
            if (fid < 1.0 - 1e-8)
                throw numeric_failure(
                    "manifold_spectrum: n=1 dressed-state fidelity check failed (fidelity=" +
                    std::to_string(fid) + ")");
        }
    }
    return out;
}

}  // namespace cqed
