#pragma once

// Dense complex linear algebra on small labeled tensor-product spaces.
//
// Basis ordering: the leftmost subsystem is the most significant digit of the
// computational-basis index, so on two qubits |xy> sits at index 2x + y.
// Units: hbar = 1 throughout.

#include <complex>
#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qfuel/rng.hpp"

namespace qfuel::hilbert {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Dims = std::vector<int>;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr std::size_t kMaxDimension = 64;

// Product of subsystem dimensions; throws DimensionError on an empty list,
// a subsystem smaller than 2, or a total above kMaxDimension.
std::size_t total_dimension(const Dims& dims);

class StateVector {
  public:
    // Amplitudes must already be normalized (within kNormTolerance).
    StateVector(Dims dims, Vector amps);

    static StateVector normalized(Dims dims, Vector amps);
    static StateVector basis(Dims dims, std::size_t index);
    // Basis state from per-subsystem levels, e.g. ({2,2}, {1,0}) is |10>.
    static StateVector basis_levels(Dims dims, const std::vector<int>& levels);

    const Dims& dims() const { return dims_; }
    const Vector& amps() const { return amps_; }
    std::size_t dimension() const { return static_cast<std::size_t>(amps_.size()); }
    Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }
    double probability(std::size_t i) const { return std::norm((*this)[i]); }
    double norm() const { return amps_.norm(); }

  private:
    Dims dims_;
    Vector amps_;
};

class DensityMatrix {
  public:
    // Validates hermiticity, unit trace and positivity (eigenvalues >= -1e-10).
    DensityMatrix(Dims dims, Matrix mat);

    static DensityMatrix pure(const StateVector& psi);
    // Convex combination sum_k w_k |psi_k><psi_k|; weights must sum to one.
    static DensityMatrix mixture(const std::vector<double>& weights,
                                 const std::vector<StateVector>& states);

    const Dims& dims() const { return dims_; }
    const Matrix& mat() const { return mat_; }
    std::size_t dimension() const { return static_cast<std::size_t>(mat_.rows()); }
    Complex operator()(std::size_t i, std::size_t j) const {
        return mat_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    Eigen::VectorXd eigenvalues() const;

  private:
    Dims dims_;
    Matrix mat_;
};

class Operator {
  public:
    Operator(Dims dims, Matrix mat);

    static Operator identity(const Dims& dims);
    static Operator zero(const Dims& dims);
    static Operator projector(const StateVector& psi);

    const Dims& dims() const { return dims_; }
    const Matrix& mat() const { return mat_; }
    std::size_t dimension() const { return static_cast<std::size_t>(mat_.rows()); }
    bool hermitian() const { return hermitian_; }

    Operator adjoint() const;
    StateVector apply(const StateVector& psi) const;  // renormalizes the image

    friend Operator operator+(const Operator& a, const Operator& b);
    friend Operator operator-(const Operator& a, const Operator& b);
    friend Operator operator*(const Operator& a, const Operator& b);
    friend Operator operator*(Complex s, const Operator& a);

  private:
    Dims dims_;
    Matrix mat_;
    bool hermitian_ = false;
};

// Single-qubit building blocks, 2x2 in the {|0>, |1>} basis.
Matrix lowering();  // sigma = |0><1|
Matrix raising();   // sigma^dagger
Matrix number();    // sigma^dagger sigma = |1><1|
Matrix pauli_x();

// Lifts a local operator on subsystem `site` to the full space (identity elsewhere).
Operator embed(const Matrix& local, int site, const Dims& dims);

StateVector tensor(const StateVector& a, const StateVector& b);
Operator tensor(const Operator& a, const Operator& b);

using HilbertObject = std::variant<StateVector, Operator>;
// Runtime-typed Kronecker product; throws KindMismatchError on mixed kinds.
HilbertObject tensor(const HilbertObject& a, const HilbertObject& b);

// exp(-iHt) through a cached Hermitian eigendecomposition, so one
// decomposition serves any number of evolution times.
class Propagator {
  public:
    explicit Propagator(const Operator& hamiltonian);

    StateVector evolve(const StateVector& psi, double t) const;
    Matrix unitary(double t) const;
    const Eigen::VectorXd& energies() const { return energies_; }
    const Dims& dims() const { return dims_; }

  private:
    Dims dims_;
    Eigen::VectorXd energies_;
    Matrix eigenvectors_;
};

StateVector evolve_exact(const Operator& hamiltonian, const StateVector& psi, double t);

Complex inner(const StateVector& bra, const StateVector& ket);
// |<a|b>|^2; insensitive to global phase.
double fidelity(const StateVector& a, const StateVector& b);

double expval(const StateVector& psi, const Operator& op);
double expval(const DensityMatrix& rho, const Operator& op);

// Reduced state on the subsystems listed in `keep` (taken in ascending order).
DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<int> keep);

// Von Neumann entropy in bits.
double vn_entropy(const DensityMatrix& rho);

// S(A) + S(B) - S(AB) in bits, with A the subsystems in `part_a`.
double mutual_information(const DensityMatrix& rho, const std::vector<int>& part_a);

struct MeasurementOutcome {
    std::size_t index;
    StateVector state;
    double probability;
};

// Complete set of orthogonal projectors, validated once at construction.
class ProjectiveMeasurement {
  public:
    explicit ProjectiveMeasurement(std::vector<Operator> projectors);

    std::size_t size() const { return projectors_.size(); }
    const Operator& projector(std::size_t k) const { return projectors_[k]; }

    std::vector<double> probabilities(const StateVector& psi) const;
    MeasurementOutcome measure(const StateVector& psi, TrajectoryRng& rng) const;
    // Outcome-averaged post-measurement state sum_k P_k rho P_k.
    DensityMatrix unselective(const DensityMatrix& rho) const;

  private:
    std::vector<Operator> projectors_;
};

MeasurementOutcome measure_projective(const StateVector& psi,
                                      const std::vector<Operator>& projectors,
                                      TrajectoryRng& rng);

// Projectors onto each level of one subsystem, |k><k| lifted to the full space.
std::vector<Operator> level_projectors(const Dims& dims, int site);

}  // namespace qfuel::hilbert
