//! Truncated Fock-space operator algebra.
//!
//! Everything here is dense: the largest Hilbert space any scenario touches is
//! a few hundred states, so plain complex matrices are both simpler and faster
//! than sparse formats.
//!
//! Atom basis convention: index 0 is `|g>`, index 1 is `|e>` and index 2 (when
//! present) the second excited level. With that ordering the bosonic lowering
//! operator restricted to two levels is exactly `sigma_-`.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Upper bound on the total dimension of a tensor-product space.
pub const MAX_TOTAL_DIM: usize = 1_000_000;

/// Ordered list of subsystem dimensions making up a tensor-product space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertSpec {
    dims: Vec<usize>,
    total: usize,
}

impl HilbertSpec {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::invalid("a Hilbert space needs at least one subsystem"));
        }
        let mut total: usize = 1;
        for &d in dims {
            if d < 2 {
                return Err(Error::invalid(format!("subsystem dimension {d} < 2")));
            }
            total = total.checked_mul(d).filter(|&t| t <= MAX_TOTAL_DIM).ok_or_else(|| {
                Error::invalid(format!("total dimension exceeds {MAX_TOTAL_DIM}"))
            })?;
        }
        Ok(Self { dims: dims.to_vec(), total })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    /// Flat index of a product basis state `|n_0, n_1, ...>` (first slot most significant).
    pub fn index_of(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found: levels.len(),
            });
        }
        let mut idx = 0;
        for (&n, &d) in levels.iter().zip(&self.dims) {
            if n >= d {
                return Err(Error::invalid(format!("level {n} out of range for dimension {d}")));
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }
}

/// Dense square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Operator(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Operator(DMatrix::identity(dim, dim))
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::invalid(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("operator has non-finite entries"));
        }
        Ok(Operator(m))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Operator(DMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Operator(self.0.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Operator(&self.0 * s)
    }

    pub fn kron(&self, other: &Operator) -> Self {
        Operator(self.0.kronecker(&other.0))
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        Operator(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        self.0.clone().singular_values().max()
    }

    /// `||A - A^dagger|| <= tol * max(||A||, 1)` in Frobenius norm.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let diff = (&self.0 - self.0.adjoint()).norm();
        diff <= tol * self.0.norm().max(1.0)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        self.0.diagonal().iter().copied().collect()
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: C64, other: &Operator) {
        self.0.zip_apply(&other.0, |a, b| *a += s * b);
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), psi.dim())?;
        Ok(StateVector(&self.0 * &psi.0))
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

/// Complex amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(DVector<C64>);

impl StateVector {
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        StateVector(DVector::from_vec(amps))
    }

    pub fn from_vector(v: DVector<C64>) -> Self {
        StateVector(v)
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::invalid(format!("basis index {index} >= dimension {dim}")));
        }
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(StateVector(v))
    }

    /// Tensor product of subsystem states, first factor most significant.
    pub fn product(factors: &[StateVector]) -> Result<Self> {
        let (first, rest) =
            factors.split_first().ok_or_else(|| Error::invalid("empty tensor product"))?;
        let mut out = first.0.clone();
        for f in rest {
            out = out.kronecker(&f.0);
        }
        Ok(StateVector(out))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::invalid("cannot normalize a zero or non-finite state"));
        }
        self.0 /= C64::new(n, 0.0);
        Ok(())
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.0.dotc(&other.0))
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Truncated bosonic lowering operator: `<n-1|a|n> = sqrt(n)`.
pub fn annihilation(levels: usize) -> Result<Operator> {
    if levels < 2 {
        return Err(Error::invalid(format!("levels must be >= 2, got {levels}")));
    }
    let mut m = DMatrix::zeros(levels, levels);
    for n in 1..levels {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(Operator(m))
}

pub fn number(levels: usize) -> Result<Operator> {
    let a = annihilation(levels)?;
    Ok(&a.dagger() * &a)
}

/// `|k><k|` on a `levels`-dimensional space.
pub fn projector(levels: usize, k: usize) -> Result<Operator> {
    if k >= levels {
        return Err(Error::invalid(format!("level {k} out of range for dimension {levels}")));
    }
    let mut diag = vec![0.0; levels];
    diag[k] = 1.0;
    Ok(Operator::from_real_diagonal(&diag))
}

/// `|e><e| - |g><g|` with `|g>` at index 0.
pub fn sigma_z() -> Operator {
    Operator::from_real_diagonal(&[-1.0, 1.0])
}

/// `|e><g|`
pub fn sigma_plus() -> Operator {
    let mut m = DMatrix::zeros(2, 2);
    m[(1, 0)] = C64::new(1.0, 0.0);
    Operator(m)
}

pub fn sigma_minus() -> Operator {
    sigma_plus().dagger()
}

/// Lift a subsystem operator into the full space: `I (x) ... (x) op (x) ... (x) I`.
pub fn embed(op: &Operator, slot: usize, spec: &HilbertSpec) -> Result<Operator> {
    let dims = spec.dims();
    if slot >= dims.len() {
        return Err(Error::invalid(format!(
            "slot {slot} out of range for {} subsystems",
            dims.len()
        )));
    }
    check_dim(dims[slot], op.dim())?;
    let before: usize = dims[..slot].iter().product();
    let after: usize = dims[slot + 1..].iter().product();
    let mut out = op.0.clone();
    if before > 1 {
        out = DMatrix::<C64>::identity(before, before).kronecker(&out);
    }
    if after > 1 {
        out = out.kronecker(&DMatrix::<C64>::identity(after, after));
    }
    Ok(Operator(out))
}

/// Normalized coherent state truncated to `levels` Fock states.
pub fn coherent_state(amp: C64, levels: usize) -> Result<StateVector> {
    if levels < 2 {
        return Err(Error::invalid(format!("levels must be >= 2, got {levels}")));
    }
    if !amp.re.is_finite() || !amp.im.is_finite() {
        return Err(Error::invalid("coherent amplitude must be finite"));
    }
    // Recurrence c_n = c_{n-1} * amp / sqrt(n) avoids factorial overflow.
    let mut amps = Vec::with_capacity(levels);
    let mut c = C64::new(1.0, 0.0);
    amps.push(c);
    for n in 1..levels {
        c = c * amp / (n as f64).sqrt();
        amps.push(c);
    }
    let mut psi = StateVector::from_amplitudes(amps);
    psi.normalize()?;
    Ok(psi)
}

pub fn expectation(state: &StateVector, op: &Operator) -> Result<C64> {
    check_dim(op.dim(), state.dim())?;
    Ok(state.0.dotc(&(&op.0 * &state.0)))
}

/// Real part of `<psi|op|psi>`; meaningful for Hermitian `op`.
pub fn expectation_real(state: &StateVector, op: &Operator) -> Result<f64> {
    expectation(state, op).map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn lowering_two_levels() {
        let a = annihilation(2).unwrap();
        assert_eq!(a.get(0, 1), c(1.0));
        assert_eq!(a.get(0, 0), c(0.0));
        assert_eq!(a.get(1, 0), c(0.0));
        assert_eq!(a.get(1, 1), c(0.0));
    }

    #[test]
    fn number_operator_diagonal() {
        let n = number(3).unwrap();
        let d: Vec<f64> = n.diagonal().iter().map(|z| z.re).collect();
        assert!((d[0] - 0.0).abs() < 1e-15);
        assert!((d[1] - 1.0).abs() < 1e-15);
        assert!((d[2] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn truncated_commutator() {
        let a = annihilation(5).unwrap();
        let comm = a.commutator(&a.dagger());
        let d = comm.diagonal();
        for z in &d[..4] {
            assert!((z.re - 1.0).abs() < 1e-14 && z.im == 0.0);
        }
        assert!((d[4].re + 4.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_single_level() {
        assert!(matches!(annihilation(1), Err(Error::InvalidArgument(_))));
        assert!(matches!(coherent_state(c(0.1), 1), Err(Error::InvalidArgument(_))));
        assert!(HilbertSpec::new(&[2, 1]).is_err());
    }

    #[test]
    fn total_dim_guard() {
        assert!(HilbertSpec::new(&[1000, 1001]).is_err());
        assert_eq!(HilbertSpec::new(&[2, 3, 3]).unwrap().total_dim(), 18);
    }

    #[test]
    fn embed_sigma_z_atom_major() {
        let spec = HilbertSpec::new(&[2, 2]).unwrap();
        let z = embed(&sigma_z(), 0, &spec).unwrap();
        let d: Vec<f64> = z.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![-1.0, -1.0, 1.0, 1.0]);
        assert!((&z - &Operator::from_real_diagonal(&d)).norm() == 0.0);
    }

    #[test]
    fn embed_identity_is_identity() {
        let spec = HilbertSpec::new(&[2, 3, 4]).unwrap();
        for (slot, &d) in spec.dims().iter().enumerate() {
            let id = embed(&Operator::identity(d), slot, &spec).unwrap();
            assert_eq!(id, Operator::identity(24));
        }
    }

    #[test]
    fn embed_element_independent_of_other_slots() {
        let spec = HilbertSpec::new(&[2, 3, 3]).unwrap();
        let a1 = embed(&annihilation(3).unwrap(), 1, &spec).unwrap();
        for atom in 0..2 {
            for n2 in 0..3 {
                let row = spec.index_of(&[atom, 1, n2]).unwrap();
                let col = spec.index_of(&[atom, 2, n2]).unwrap();
                assert!((a1.get(row, col) - c(2f64.sqrt())).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn embed_errors() {
        let spec = HilbertSpec::new(&[2, 3]).unwrap();
        assert!(embed(&sigma_z(), 2, &spec).is_err());
        assert!(matches!(
            embed(&sigma_z(), 1, &spec),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn coherent_vacuum() {
        let psi = coherent_state(c(0.0), 4).unwrap();
        assert_eq!(psi, StateVector::basis(4, 0).unwrap());
    }

    #[test]
    fn coherent_small_amplitude() {
        let psi = coherent_state(c(0.05), 4).unwrap();
        let n = expectation_real(&psi, &number(4).unwrap()).unwrap();
        // oracle: truncated Poisson weights |a|^{2n}/n! summed directly
        let x: f64 = 0.0025;
        let w = [1.0, x, x * x / 2.0, x * x * x / 6.0];
        let oracle = (w[1] + 2.0 * w[2] + 3.0 * w[3]) / w.iter().sum::<f64>();
        assert!((n - oracle).abs() < 1e-15);
        assert!((n - 0.0025).abs() < 1e-6);
        let a = expectation(&psi, &annihilation(4).unwrap()).unwrap();
        assert!((a - c(0.05)).norm() < 1e-6);
    }

    #[test]
    fn coherent_unit_amplitude() {
        let psi = coherent_state(c(1.0), 12).unwrap();
        let a = expectation(&psi, &annihilation(12).unwrap()).unwrap();
        assert!((a - c(1.0)).norm() < 1e-4);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_fock_states() {
        let n = number(4).unwrap();
        let vac = StateVector::basis(4, 0).unwrap();
        let one = StateVector::basis(4, 1).unwrap();
        assert_eq!(expectation_real(&vac, &n).unwrap(), 0.0);
        assert!((expectation_real(&one, &n).unwrap() - 1.0).abs() < 1e-15);
        assert!(expectation(&vac, &number(3).unwrap()).is_err());
    }
}
