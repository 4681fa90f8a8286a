#include "qfuel/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "qfuel/errors.hpp"

namespace qfuel::hilbert {

namespace {

std::string dims_to_string(const Dims& dims) {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
    os << '}';
    return os.str();
}

void require_same_dims(const Dims& a, const Dims& b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": dims " + dims_to_string(a) +
                             " vs " + dims_to_string(b));
    }
}

double hermitian_defect(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

Dims concat(const Dims& a, const Dims& b) {
    Dims out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

// Mixed-radix digits of a flat index, most significant subsystem first.
void decompose(std::size_t index, const Dims& dims, std::vector<int>& digits) {
    for (std::size_t s = dims.size(); s-- > 0;) {
        digits[s] = static_cast<int>(index % static_cast<std::size_t>(dims[s]));
        index /= static_cast<std::size_t>(dims[s]);
    }
}

}  // namespace

std::size_t total_dimension(const Dims& dims) {
    if (dims.empty()) throw DimensionError("empty subsystem list");
    std::size_t total = 1;
    for (int d : dims) {
        if (d < 2) throw DimensionError("subsystem dimension must be >= 2, got " + std::to_string(d));
        total *= static_cast<std::size_t>(d);
        if (total > kMaxDimension) {
            throw DimensionError("total dimension exceeds " + std::to_string(kMaxDimension) +
                                 " for dims " + dims_to_string(dims));
        }
    }
    return total;
}

// ---------------------------------------------------------------- StateVector

StateVector::StateVector(Dims dims, Vector amps) : dims_(std::move(dims)), amps_(std::move(amps)) {
    const std::size_t n = total_dimension(dims_);
    if (static_cast<std::size_t>(amps_.size()) != n) {
        throw DimensionError("state of length " + std::to_string(amps_.size()) +
                             " on dims " + dims_to_string(dims_));
    }
    const double norm2 = amps_.squaredNorm();
    if (!(std::abs(norm2 - 1.0) <= kNormTolerance)) {
        throw NormError("state norm^2 = " + std::to_string(norm2) + ", expected 1");
    }
}

StateVector StateVector::normalized(Dims dims, Vector amps) {
    const double n = amps.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NormError("cannot normalize a zero or non-finite vector");
    return StateVector(std::move(dims), amps / n);
}

StateVector StateVector::basis(Dims dims, std::size_t index) {
    const std::size_t n = total_dimension(dims);
    if (index >= n) throw ArgumentError("basis index " + std::to_string(index) + " out of range");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(dims), std::move(v));
}

StateVector StateVector::basis_levels(Dims dims, const std::vector<int>& levels) {
    if (levels.size() != dims.size()) throw DimensionError("one level per subsystem required");
    std::size_t index = 0;
    for (std::size_t s = 0; s < dims.size(); ++s) {
        if (levels[s] < 0 || levels[s] >= dims[s]) throw ArgumentError("level out of range");
        index = index * static_cast<std::size_t>(dims[s]) + static_cast<std::size_t>(levels[s]);
    }
    return basis(std::move(dims), index);
}

// -------------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(Dims dims, Matrix mat) : dims_(std::move(dims)), mat_(std::move(mat)) {
    const auto n = static_cast<Eigen::Index>(total_dimension(dims_));
    if (mat_.rows() != n || mat_.cols() != n) throw DimensionError("density matrix size mismatch");
    if (hermitian_defect(mat_) >= kHermitianTolerance) throw HermiticityError("density matrix not Hermitian");
    const Complex tr = mat_.trace();
    if (std::abs(tr - 1.0) > kNormTolerance) throw NormError("density matrix trace != 1");
    if (eigenvalues().minCoeff() < -kNormTolerance) throw NormError("density matrix not positive");
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
    return DensityMatrix(psi.dims(), psi.amps() * psi.amps().adjoint());
}

DensityMatrix DensityMatrix::mixture(const std::vector<double>& weights,
                                     const std::vector<StateVector>& states) {
    if (weights.empty() || weights.size() != states.size()) {
        throw ArgumentError("mixture needs one weight per state");
    }
    Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(states[0].dimension()),
                              static_cast<Eigen::Index>(states[0].dimension()));
    for (std::size_t k = 0; k < states.size(); ++k) {
        require_same_dims(states[0].dims(), states[k].dims(), "mixture");
        if (weights[k] < 0.0) throw ArgumentError("negative mixture weight");
        acc += weights[k] * (states[k].amps() * states[k].amps().adjoint());
    }
    return DensityMatrix(states[0].dims(), std::move(acc));
}

Eigen::VectorXd DensityMatrix::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

// ------------------------------------------------------------------- Operator

Operator::Operator(Dims dims, Matrix mat) : dims_(std::move(dims)), mat_(std::move(mat)) {
    const auto n = static_cast<Eigen::Index>(total_dimension(dims_));
    if (mat_.rows() != n || mat_.cols() != n) {
        throw DimensionError("operator of size " + std::to_string(mat_.rows()) + "x" +
                             std::to_string(mat_.cols()) + " on dims " + dims_to_string(dims_));
    }
    hermitian_ = hermitian_defect(mat_) < kHermitianTolerance;
}

Operator Operator::identity(const Dims& dims) {
    const auto n = static_cast<Eigen::Index>(total_dimension(dims));
    return Operator(dims, Matrix::Identity(n, n));
}

Operator Operator::zero(const Dims& dims) {
    const auto n = static_cast<Eigen::Index>(total_dimension(dims));
    return Operator(dims, Matrix::Zero(n, n));
}

Operator Operator::projector(const StateVector& psi) {
    return Operator(psi.dims(), psi.amps() * psi.amps().adjoint());
}

Operator Operator::adjoint() const { return Operator(dims_, mat_.adjoint()); }

StateVector Operator::apply(const StateVector& psi) const {
    require_same_dims(dims_, psi.dims(), "Operator::apply");
    return StateVector::normalized(dims_, mat_ * psi.amps());
}

Operator operator+(const Operator& a, const Operator& b) {
    require_same_dims(a.dims_, b.dims_, "operator+");
    return Operator(a.dims_, a.mat_ + b.mat_);
}

Operator operator-(const Operator& a, const Operator& b) {
    require_same_dims(a.dims_, b.dims_, "operator-");
    return Operator(a.dims_, a.mat_ - b.mat_);
}

Operator operator*(const Operator& a, const Operator& b) {
    require_same_dims(a.dims_, b.dims_, "operator*");
    return Operator(a.dims_, a.mat_ * b.mat_);
}

Operator operator*(Complex s, const Operator& a) { return Operator(a.dims_, s * a.mat_); }

Matrix lowering() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
}

Matrix raising() { return lowering().adjoint(); }

Matrix number() {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 1) = 1.0;
    return m;
}

Matrix pauli_x() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

}  // namespace

Operator embed(const Matrix& local, int site, const Dims& dims) {
    total_dimension(dims);
    if (site < 0 || static_cast<std::size_t>(site) >= dims.size()) throw ArgumentError("site out of range");
    if (local.rows() != dims[static_cast<std::size_t>(site)] || local.cols() != local.rows()) {
        throw DimensionError("local operator does not match subsystem " + std::to_string(site));
    }
    Matrix out = Matrix::Identity(1, 1);
    for (std::size_t s = 0; s < dims.size(); ++s) {
        out = kron(out, static_cast<int>(s) == site ? local : Matrix::Identity(dims[s], dims[s]));
    }
    return Operator(dims, std::move(out));
}

StateVector tensor(const StateVector& a, const StateVector& b) {
    Vector out(a.amps().size() * b.amps().size());
    for (Eigen::Index i = 0; i < a.amps().size(); ++i) {
        out.segment(i * b.amps().size(), b.amps().size()) = a.amps()(i) * b.amps();
    }
    return StateVector::normalized(concat(a.dims(), b.dims()), std::move(out));
}

Operator tensor(const Operator& a, const Operator& b) {
    return Operator(concat(a.dims(), b.dims()), kron(a.mat(), b.mat()));
}

HilbertObject tensor(const HilbertObject& a, const HilbertObject& b) {
    if (a.index() != b.index()) throw KindMismatchError("tensor of a state with an operator");
    if (const auto* sa = std::get_if<StateVector>(&a)) return tensor(*sa, std::get<StateVector>(b));
    return tensor(std::get<Operator>(a), std::get<Operator>(b));
}

// ----------------------------------------------------------------- Propagator

Propagator::Propagator(const Operator& hamiltonian) : dims_(hamiltonian.dims()) {
    if (!hamiltonian.hermitian()) throw ContractViolation("propagator needs a Hermitian generator");
    Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian.mat());
    if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
    energies_ = es.eigenvalues();
    eigenvectors_ = es.eigenvectors();
}

Matrix Propagator::unitary(double t) const {
    if (!(t >= 0.0)) throw ArgumentError("evolution time must be >= 0");
    Vector phases(energies_.size());
    for (Eigen::Index k = 0; k < energies_.size(); ++k) phases(k) = std::polar(1.0, -energies_(k) * t);
    return eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint();
}

StateVector Propagator::evolve(const StateVector& psi, double t) const {
    require_same_dims(dims_, psi.dims(), "evolve");
    if (!(t >= 0.0)) throw ArgumentError("evolution time must be >= 0");
    Vector coeffs = eigenvectors_.adjoint() * psi.amps();
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs(k) *= std::polar(1.0, -energies_(k) * t);
    return StateVector(dims_, eigenvectors_ * coeffs);
}

StateVector evolve_exact(const Operator& hamiltonian, const StateVector& psi, double t) {
    require_same_dims(hamiltonian.dims(), psi.dims(), "evolve_exact");
    return Propagator(hamiltonian).evolve(psi, t);
}

// ------------------------------------------------------------- Observables

Complex inner(const StateVector& bra, const StateVector& ket) {
    require_same_dims(bra.dims(), ket.dims(), "inner");
    return bra.amps().dot(ket.amps());
}

double fidelity(const StateVector& a, const StateVector& b) { return std::norm(inner(a, b)); }

namespace {

double real_checked(Complex value) {
    if (std::abs(value.imag()) > kHermitianTolerance) {
        throw HermiticityError("expectation value has imaginary part " + std::to_string(value.imag()));
    }
    return value.real();
}

}  // namespace

double expval(const StateVector& psi, const Operator& op) {
    require_same_dims(psi.dims(), op.dims(), "expval");
    return real_checked(psi.amps().dot(op.mat() * psi.amps()));
}

double expval(const DensityMatrix& rho, const Operator& op) {
    require_same_dims(rho.dims(), op.dims(), "expval");
    return real_checked((rho.mat() * op.mat()).trace());
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<int> keep) {
    if (keep.empty()) throw ArgumentError("partial_trace: keep set is empty");
    const Dims& dims = rho.dims();
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    std::vector<bool> kept(dims.size(), false);
    for (int s : keep) {
        if (s < 0 || static_cast<std::size_t>(s) >= dims.size()) throw ArgumentError("partial_trace: bad subsystem index");
        kept[static_cast<std::size_t>(s)] = true;
    }

    Dims reduced_dims;
    for (int s : keep) reduced_dims.push_back(dims[static_cast<std::size_t>(s)]);
    const auto m = static_cast<Eigen::Index>(total_dimension(reduced_dims));
    Matrix reduced = Matrix::Zero(m, m);

    const std::size_t n = rho.dimension();
    std::vector<int> di(dims.size()), dj(dims.size());
    for (std::size_t i = 0; i < n; ++i) {
        decompose(i, dims, di);
        for (std::size_t j = 0; j < n; ++j) {
            decompose(j, dims, dj);
            bool traced_match = true;
            Eigen::Index ri = 0, rj = 0;
            for (std::size_t s = 0; s < dims.size(); ++s) {
                if (kept[s]) {
                    ri = ri * dims[s] + di[s];
                    rj = rj * dims[s] + dj[s];
                } else if (di[s] != dj[s]) {
                    traced_match = false;
                    break;
                }
            }
            if (traced_match) reduced(ri, rj) += rho(i, j);
        }
    }
    return DensityMatrix(std::move(reduced_dims), std::move(reduced));
}

double vn_entropy(const DensityMatrix& rho) {
    double s = 0.0;
    for (double lambda : rho.eigenvalues()) {
        lambda = std::clamp(lambda, 0.0, 1.0);
        if (lambda < 1e-12) continue;
        s -= lambda * std::log2(lambda);
    }
    return s;
}

double mutual_information(const DensityMatrix& rho, const std::vector<int>& part_a) {
    std::vector<int> part_b;
    for (int s = 0; s < static_cast<int>(rho.dims().size()); ++s) {
        if (std::find(part_a.begin(), part_a.end(), s) == part_a.end()) part_b.push_back(s);
    }
    if (part_b.empty()) throw ArgumentError("mutual_information: complement is empty");
    return vn_entropy(partial_trace(rho, part_a)) + vn_entropy(partial_trace(rho, part_b)) - vn_entropy(rho);
}

// ----------------------------------------------------------- Measurement

ProjectiveMeasurement::ProjectiveMeasurement(std::vector<Operator> projectors)
    : projectors_(std::move(projectors)) {
    if (projectors_.empty()) throw CompletenessError("no projectors");
    const Dims& dims = projectors_.front().dims();
    Matrix sum = Matrix::Zero(projectors_.front().mat().rows(), projectors_.front().mat().cols());
    for (std::size_t j = 0; j < projectors_.size(); ++j) {
        require_same_dims(dims, projectors_[j].dims(), "projector set");
        sum += projectors_[j].mat();
        for (std::size_t k = 0; k < projectors_.size(); ++k) {
            const Matrix prod = projectors_[j].mat() * projectors_[k].mat();
            const Matrix expected = j == k ? projectors_[k].mat() : Matrix::Zero(prod.rows(), prod.cols());
            if ((prod - expected).cwiseAbs().maxCoeff() > kNormTolerance) {
                throw CompletenessError("projectors " + std::to_string(j) + "," + std::to_string(k) +
                                        " violate P_j P_k = delta_jk P_k");
            }
        }
    }
    if ((sum - Matrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff() > kNormTolerance) {
        throw CompletenessError("projectors do not sum to the identity");
    }
}

std::vector<double> ProjectiveMeasurement::probabilities(const StateVector& psi) const {
    std::vector<double> p;
    p.reserve(projectors_.size());
    for (const auto& proj : projectors_) p.push_back(std::max(0.0, expval(psi, proj)));
    return p;
}

MeasurementOutcome ProjectiveMeasurement::measure(const StateVector& psi, TrajectoryRng& rng) const {
    const std::vector<double> p = probabilities(psi);
    const double u = rng.uniform();
    double cumulative = 0.0;
    std::size_t chosen = p.size();
    std::size_t last_nonzero = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] <= 0.0) continue;
        last_nonzero = k;
        cumulative += p[k];
        if (u < cumulative) {
            chosen = k;
            break;
        }
    }
    // Rounding can leave the cumulative sum a hair below one.
    if (chosen == p.size()) chosen = last_nonzero;
    return {chosen, projectors_[chosen].apply(psi), p[chosen]};
}

DensityMatrix ProjectiveMeasurement::unselective(const DensityMatrix& rho) const {
    require_same_dims(projectors_.front().dims(), rho.dims(), "unselective");
    Matrix out = Matrix::Zero(rho.mat().rows(), rho.mat().cols());
    for (const auto& proj : projectors_) out += proj.mat() * rho.mat() * proj.mat();
    return DensityMatrix(rho.dims(), std::move(out));
}

MeasurementOutcome measure_projective(const StateVector& psi, const std::vector<Operator>& projectors,
                                      TrajectoryRng& rng) {
    return ProjectiveMeasurement(projectors).measure(psi, rng);
}

std::vector<Operator> level_projectors(const Dims& dims, int site) {
    if (site < 0 || static_cast<std::size_t>(site) >= dims.size()) throw ArgumentError("site out of range");
    const int d = dims[static_cast<std::size_t>(site)];
    std::vector<Operator> out;
    for (int k = 0; k < d; ++k) {
        Matrix local = Matrix::Zero(d, d);
        local(k, k) = 1.0;
        out.push_back(embed(local, site, dims));
    }
    return out;
}

}  // namespace qfuel::hilbert
