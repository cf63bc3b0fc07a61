//! Hilbert-space kinematics: states, Hamiltonian dynamics, projectors in
//! the Schrödinger and Heisenberg pictures, and decompositions of unity.
//!
//! Conventions: ħ = 1 throughout; the Heisenberg picture is taken with
//! respect to an arbitrary reference time stored in [`Dynamics`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{self, CMatrix, Tolerance, C_I};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpace {
    pub dim: usize,
}

impl HilbertSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("Hilbert space dimension must be ≥ 1".into()));
        }
        Ok(HilbertSpace { dim })
    }
}

/// A density operator ρ: Hermitian, positive, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    pub label: String,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix, label: impl Into<String>, tol: &Tolerance) -> Result<Self> {
        matrix::ensure_finite(&matrix)?;
        if !matrix::is_density(&matrix, tol) {
            return Err(Error::Domain(
                "matrix is not a valid density operator (Hermitian, PSD, trace 1)".into(),
            ));
        }
        Ok(DensityOperator {
            matrix,
            label: label.into(),
        })
    }

    /// Pure state |v⟩⟨v| from a state vector; normalizes on ingestion.
    pub fn pure(vector: &[Complex64], label: impl Into<String>) -> Result<Self> {
        let norm: f64 = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::Domain(
                "state vector must be nonzero and finite".into(),
            ));
        }
        let normalized: Vec<Complex64> = vector.iter().map(|z| z / norm).collect();
        Ok(DensityOperator {
            matrix: matrix::outer(&normalized),
            label: label.into(),
        })
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        let m = matrix::identity(dim).map(|z| z / dim as f64);
        DensityOperator {
            matrix: m,
            label: format!("I/{dim}"),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Hamiltonian dynamics with a reference time for the Heisenberg picture.
#[derive(Debug, Clone, PartialEq)]
pub struct Dynamics {
    hamiltonian: CMatrix,
    pub reference_time: f64,
}

impl Dynamics {
    pub fn new(hamiltonian: CMatrix, reference_time: f64, tol: &Tolerance) -> Result<Self> {
        matrix::ensure_finite(&hamiltonian)?;
        if !matrix::is_hermitian(&hamiltonian, tol) {
            return Err(Error::Domain("Hamiltonian must be Hermitian".into()));
        }
        if !reference_time.is_finite() {
            return Err(Error::Domain("reference time must be finite".into()));
        }
        Ok(Dynamics {
            hamiltonian,
            reference_time,
        })
    }

    /// Free dynamics H = 0 on a d-dimensional space.
    pub fn trivial(dim: usize, reference_time: f64) -> Self {
        Dynamics {
            hamiltonian: matrix::zeros(dim, dim),
            reference_time,
        }
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }
}

/// A projection operator with a human-readable label.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
    pub label: String,
}

impl Projector {
    pub fn new(matrix: CMatrix, label: impl Into<String>, tol: &Tolerance) -> Result<Self> {
        matrix::ensure_finite(&matrix)?;
        if !matrix::is_projector(&matrix, tol) {
            return Err(Error::Domain(
                "matrix is not a projector (idempotent and Hermitian within tolerance)".into(),
            ));
        }
        Ok(Projector {
            matrix,
            label: label.into(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Projector {
            matrix: matrix::identity(dim),
            label: "I".into(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// An exhaustive family of mutually orthogonal projectors at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionOfUnity {
    projectors: Vec<Projector>,
    pub time: f64,
}

/// One violated constraint of a decomposition of unity.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionViolation {
    pub constraint: String,
    pub residual: f64,
}

impl DecompositionOfUnity {
    pub fn new(projectors: Vec<Projector>, time: f64, tol: &Tolerance) -> Result<Self> {
        let d = DecompositionOfUnity { projectors, time };
        let report = d.validate(tol);
        if report.is_empty() {
            Ok(d)
        } else {
            let lines: Vec<String> = report
                .iter()
                .map(|v| format!("{} (residual {:.3e})", v.constraint, v.residual))
                .collect();
            Err(Error::Validation(lines.join("\n")))
        }
    }

    /// Lists every violated orthogonality / idempotency / completeness
    /// constraint with its residual norm. Empty iff valid.
    pub fn validate(&self, tol: &Tolerance) -> Vec<DecompositionViolation> {
        let mut out = Vec::new();
        if self.projectors.is_empty() {
            out.push(DecompositionViolation {
                constraint: "decomposition must contain at least one projector".into(),
                residual: f64::INFINITY,
            });
            return out;
        }
        let dim = self.projectors[0].dim();
        for (a, p) in self.projectors.iter().enumerate() {
            if p.dim() != dim {
                out.push(DecompositionViolation {
                    constraint: format!("member {a} has mismatched dimension"),
                    residual: f64::INFINITY,
                });
                return out;
            }
            let m = p.matrix();
            let idem = matrix::max_abs_diff(&(m * m), m);
            if idem > tol.abs_eps {
                out.push(DecompositionViolation {
                    constraint: format!("member {a} not idempotent"),
                    residual: idem,
                });
            }
            let herm = matrix::max_abs_diff(&m.adjoint(), m);
            if herm > tol.abs_eps {
                out.push(DecompositionViolation {
                    constraint: format!("member {a} not Hermitian"),
                    residual: herm,
                });
            }
            // zero projectors break labeling; coarse-graining handles
            // impossible branches instead
            if matrix::max_abs(m) <= tol.abs_eps {
                out.push(DecompositionViolation {
                    constraint: format!("member {a} is the zero projector"),
                    residual: matrix::max_abs(m),
                });
            }
        }
        for a in 0..self.projectors.len() {
            for b in (a + 1)..self.projectors.len() {
                let prod = self.projectors[a].matrix() * self.projectors[b].matrix();
                let res = matrix::max_abs(&prod);
                if res > tol.abs_eps {
                    out.push(DecompositionViolation {
                        constraint: format!("members {a} and {b} not orthogonal"),
                        residual: res,
                    });
                }
            }
        }
        let mut sum = matrix::zeros(dim, dim);
        for p in &self.projectors {
            sum += p.matrix();
        }
        let completeness = matrix::max_abs_diff(&sum, &matrix::identity(dim));
        if completeness > tol.abs_eps {
            out.push(DecompositionViolation {
                constraint: "members do not sum to the identity".into(),
                residual: completeness,
            });
        }
        out
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }
}

/// U(t_from → t_to) = exp(−iH(t_to − t_from)).
pub fn propagator(dyn_: &Dynamics, t_from: f64, t_to: f64) -> Result<CMatrix> {
    if !t_from.is_finite() || !t_to.is_finite() {
        return Err(Error::Domain("propagator times must be finite".into()));
    }
    let dt = t_to - t_from;
    if dt == 0.0 {
        return Ok(matrix::identity(dyn_.dim()));
    }
    matrix::hermitian_expm(dyn_.hamiltonian(), -C_I * Complex64::new(dt, 0.0))
}

/// Heisenberg-picture projector P(t) = U†(t, t_r) P U(t, t_r).
pub fn heisenberg_projector(dyn_: &Dynamics, p: &Projector, t: f64) -> Result<Projector> {
    let u = propagator(dyn_, dyn_.reference_time, t)?;
    let m = u.adjoint() * p.matrix() * u;
    Ok(Projector {
        matrix: m,
        label: format!("{}(t={t})", p.label),
    })
}

/// ρ = Σ w_i |φ_i⟩⟨φ_i| from simplex weights and unit vectors.
pub fn mixed_state(
    weights: &[f64],
    pure_vectors: &[Vec<Complex64>],
    tol: &Tolerance,
) -> Result<DensityOperator> {
    if weights.len() != pure_vectors.len() || weights.is_empty() {
        return Err(Error::Shape("one weight per state vector required".into()));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::Domain(
            "weights must be nonnegative and finite".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if !tol.close(total, 1.0) {
        return Err(Error::Domain(format!("weights must sum to 1, got {total}")));
    }
    let dim = pure_vectors[0].len();
    let mut rho = matrix::zeros(dim, dim);
    for (w, v) in weights.iter().zip(pure_vectors) {
        if v.len() != dim {
            return Err(Error::Shape(
                "state vectors must share one dimension".into(),
            ));
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !tol.close(norm, 1.0) {
            return Err(Error::Domain(format!(
                "state vector has norm {norm}, expected 1"
            )));
        }
        rho += matrix::outer(v).map(|z| z * *w);
    }
    DensityOperator::new(rho, "mixed", tol)
}

/// σ·n̂ for a 3-vector n̂.
pub fn sigma_dot(axis: [f64; 3]) -> CMatrix {
    matrix::pauli_x().map(|z| z * axis[0])
        + matrix::pauli_y().map(|z| z * axis[1])
        + matrix::pauli_z().map(|z| z * axis[2])
}

/// The qubit decomposition {(I + σ·n̂)/2, (I − σ·n̂)/2} at the given time.
pub fn spin_decomposition(
    axis: [f64; 3],
    time: f64,
    tol: &Tolerance,
) -> Result<DecompositionOfUnity> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !tol.close(norm, 1.0) {
        return Err(Error::Domain(format!(
            "spin axis must be a unit vector, norm {norm}"
        )));
    }
    let sd = sigma_dot(axis);
    let plus = (matrix::identity(2) + &sd).map(|z| z * 0.5);
    let minus = (matrix::identity(2) - &sd).map(|z| z * 0.5);
    let projectors = vec![
        Projector {
            matrix: plus,
            label: "+".into(),
        },
        Projector {
            matrix: minus,
            label: "-".into(),
        },
    ];
    DecompositionOfUnity::new(projectors, time, tol)
}

/// Qubit pure state aligned with a Bloch axis: the +1/2 eigenstate of σ·n̂,
/// i.e. ρ = (I + σ·n̂)/2.
pub fn bloch_state(axis: [f64; 3], tol: &Tolerance) -> Result<DensityOperator> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !tol.close(norm, 1.0) {
        return Err(Error::Domain(format!(
            "Bloch axis must be a unit vector, norm {norm}"
        )));
    }
    let m = (matrix::identity(2) + sigma_dot(axis)).map(|z| z * 0.5);
    DensityOperator::new(
        m,
        format!("bloch({},{},{})", axis[0], axis[1], axis[2]),
        tol,
    )
}
