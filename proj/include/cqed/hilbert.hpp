// hilbert.hpp — dense complex operator/state algebra on small tensor-product spaces

#pragma once

#include <complex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cqed {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Error taxonomy: invalid_input covers bad parameters/config, numeric_failure
// covers runtime numerical conditions (degenerate kernels, zero flux, ...).
class invalid_input : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
class numeric_failure : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw invalid_input(msg);
}

struct HilbertFactor {
    std::string label;
    int dim = 0;
    bool operator==(const HilbertFactor&) const = default;
};

// Ordered list of factors, e.g. {("cavity", n_max+1), ("atom", L)}. The cavity
// factor always comes first in composite spaces; basis kets read |photons, level>.
class HilbertSpace {
public:
    HilbertSpace() = default;
    explicit HilbertSpace(std::vector<HilbertFactor> factors)
        : factors_(std::move(factors)) {
        dim_ = 1;
        for (const auto& f : factors_) {
            require(f.dim >= 2, "HilbertSpace: every factor needs dim >= 2 (got " +
                                    std::to_string(f.dim) + " for '" + f.label + "')");
            dim_ *= f.dim;
        }
        require(!factors_.empty(), "HilbertSpace: no factors");
    }

    int dim() const { return dim_; }
    const std::vector<HilbertFactor>& factors() const { return factors_; }

    bool operator==(const HilbertSpace& o) const { return factors_ == o.factors_; }
    bool operator!=(const HilbertSpace& o) const { return !(*this == o); }

    std::string to_string() const {
        std::ostringstream os;
        for (size_t i = 0; i < factors_.size(); ++i)
            os << (i ? " x " : "") << factors_[i].label << "(" << factors_[i].dim << ")";
        return os.str();
    }

    // Flat index of |i0, i1, ...> with the leftmost factor slowest.
    int index(const std::vector<int>& per_factor) const {
        require(per_factor.size() == factors_.size(), "HilbertSpace::index: arity mismatch");
        int idx = 0;
        for (size_t k = 0; k < factors_.size(); ++k) {
            require(per_factor[k] >= 0 && per_factor[k] < factors_[k].dim,
                    "HilbertSpace::index: component out of range");
            idx = idx * factors_[k].dim + per_factor[k];
        }
        return idx;
    }

private:
    std::vector<HilbertFactor> factors_;
    int dim_ = 0;
};

inline void check_same_space(const HilbertSpace& a, const HilbertSpace& b,
                             const char* what) {
    if (a != b)
        throw invalid_input(std::string(what) + ": space mismatch (" + a.to_string() +
                            " vs " + b.to_string() + ")");
}

struct Operator {
    HilbertSpace space;
    Matrix mat;

    Operator() = default;
    Operator(HilbertSpace s, Matrix m) : space(std::move(s)), mat(std::move(m)) {
        require(mat.rows() == space.dim() && mat.cols() == space.dim(),
                "Operator: matrix shape does not match space dimension");
    }

    Operator adjoint() const { return {space, mat.adjoint()}; }
    bool is_hermitian(double tol = 1e-12) const {
        return (mat - mat.adjoint()).cwiseAbs().maxCoeff() <= tol;
    }

    Operator operator*(const Operator& o) const {
        check_same_space(space, o.space, "Operator*Operator");
        return {space, mat * o.mat};
    }
    Operator operator+(const Operator& o) const {
        check_same_space(space, o.space, "Operator+Operator");
        return {space, mat + o.mat};
    }
    Operator operator-(const Operator& o) const {
        check_same_space(space, o.space, "Operator-Operator");
        return {space, mat - o.mat};
    }
    friend Operator operator*(Complex c, const Operator& o) { return {o.space, c * o.mat}; }
    friend Operator operator*(double c, const Operator& o) { return {o.space, c * o.mat}; }
};

struct StateVector {
    HilbertSpace space;
    Vector amps;

    StateVector() = default;
    StateVector(HilbertSpace s, Vector a) : space(std::move(s)), amps(std::move(a)) {
        require(amps.size() == space.dim(), "StateVector: length does not match space");
    }

    double norm() const { return amps.norm(); }
    StateVector normalized() const { return {space, amps / amps.norm()}; }
};

struct DensityMatrix {
    HilbertSpace space;
    Matrix mat;

    DensityMatrix() = default;
    DensityMatrix(HilbertSpace s, Matrix m) : space(std::move(s)), mat(std::move(m)) {
        require(mat.rows() == space.dim() && mat.cols() == space.dim(),
                "DensityMatrix: shape does not match space");
    }

    Complex trace() const { return mat.trace(); }
    double hermiticity_defect() const { return (mat - mat.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (mat + mat.adjoint()));
        return es.eigenvalues().minCoeff();
    }
};

inline Operator identity(const HilbertSpace& s) {
    return {s, Matrix::Identity(s.dim(), s.dim())};
}

// Annihilation operator on a cavity mode truncated at n_max photons:
// <n-1|a|n> = sqrt(n).
inline Operator fock_annihilation(int n_max) {
    require(n_max >= 1, "fock_annihilation: n_max must be >= 1");
    HilbertSpace s({{"cavity", n_max + 1}});
    Matrix a = Matrix::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(double(n));
    return {s, std::move(a)};
}

inline Operator fock_number(int n_max) {
    Operator a = fock_annihilation(n_max);
    return {a.space, a.mat.adjoint() * a.mat};
}

// Atomic pseudospin operator |i><j| on an L-level atom, 1-based level labels.
inline Operator atomic_transition(int L, int i, int j) {
    require(L >= 2, "atomic_transition: need at least two levels");
    require(i >= 1 && i <= L && j >= 1 && j <= L,
            "atomic_transition: level index out of range (L=" + std::to_string(L) + ")");
    HilbertSpace s({{"atom", L}});
    Matrix m = Matrix::Zero(L, L);
    m(i - 1, j - 1) = 1.0;
    return {s, std::move(m)};
}

// Kronecker product on the concatenated space; factor order (left, right) is
// preserved, so tensor(cavity_op, atom_op) indexes as |photons, level>.
inline Operator tensor(const Operator& A, const Operator& B) {
    std::vector<HilbertFactor> f = A.space.factors();
    for (const auto& g : B.space.factors()) f.push_back(g);
    HilbertSpace s(std::move(f));
    const int ra = int(A.mat.rows()), ca = int(A.mat.cols());
    const int rb = int(B.mat.rows()), cb = int(B.mat.cols());
    Matrix m(ra * rb, ca * cb);
    for (int i = 0; i < ra; ++i)
        for (int j = 0; j < ca; ++j) m.block(i * rb, j * cb, rb, cb) = A.mat(i, j) * B.mat;
    return {s, std::move(m)};
}

inline StateVector basis_state(const HilbertSpace& s, const std::vector<int>& per_factor) {
    Vector v = Vector::Zero(s.dim());
    v(s.index(per_factor)) = 1.0;
    return {s, std::move(v)};
}

inline Complex expectation(const Operator& op, const StateVector& psi) {
    check_same_space(op.space, psi.space, "expectation");
    return psi.amps.dot(op.mat * psi.amps);  // Eigen dot conjugates the left argument
}

inline Complex expectation(const Operator& op, const DensityMatrix& rho) {
    check_same_space(op.space, rho.space, "expectation");
    return (op.mat * rho.mat).trace();
}

}  // namespace cqed
