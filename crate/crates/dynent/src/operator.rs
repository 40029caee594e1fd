//! Operators over labeled tensor factors.
//!
//! Every matrix in this crate lives on an ordered list of named systems, so
//! that wiring operations (partial trace, partial transpose, link product,
//! relabeling) can be phrased in terms of names instead of index arithmetic.
//! Flat indices are row-major over the system list: the last system varies
//! fastest. An operator with an empty system list is a 1x1 scalar.

use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Tolerance for Hermiticity checks in constructors and spectral routines.
pub const HERM_TOL: f64 = 1e-10;

/// A named tensor factor with its local dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemLabel {
    pub name: String,
    pub dim: usize,
}

impl SystemLabel {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self { name: name.into(), dim }
    }
}

fn check_labels(systems: &[SystemLabel]) -> Result<()> {
    for (i, s) in systems.iter().enumerate() {
        if s.dim == 0 {
            return Err(Error::ShapeError(format!("system {} has dimension 0", s.name)));
        }
        if systems[..i].iter().any(|t| t.name == s.name) {
            return Err(Error::LabelCollision(s.name.clone()));
        }
    }
    Ok(())
}

fn side_of(systems: &[SystemLabel]) -> usize {
    systems.iter().map(|s| s.dim).product()
}

/// Row-major strides: `strides[k]` is the flat-index weight of system `k`.
fn strides_of(dims: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let mut s = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// A square matrix together with the ordered, named systems it acts on.
#[derive(Clone, Debug)]
pub struct LabeledOperator {
    systems: Vec<SystemLabel>,
    mat: CMat,
}

impl LabeledOperator {
    /// Wraps a matrix whose side must equal the product of the system dims.
    pub fn new(systems: Vec<SystemLabel>, mat: CMat) -> Result<Self> {
        check_labels(&systems)?;
        let side = side_of(&systems);
        if mat.nrows() != side || mat.ncols() != side {
            return Err(Error::ShapeError(format!(
                "matrix is {}x{} but systems give side {}",
                mat.nrows(),
                mat.ncols(),
                side
            )));
        }
        Ok(Self { systems, mat })
    }

    /// Like [`new`](Self::new) but additionally requires Hermiticity.
    pub fn new_hermitian(systems: Vec<SystemLabel>, mat: CMat) -> Result<Self> {
        let op = Self::new(systems, mat)?;
        let residual = op.hermiticity_residual();
        if residual > HERM_TOL {
            return Err(Error::NotHermitian { residual });
        }
        Ok(op)
    }

    pub fn zeros(systems: Vec<SystemLabel>) -> Result<Self> {
        check_labels(&systems)?;
        let side = side_of(&systems);
        Ok(Self { systems, mat: CMat::zeros(side, side) })
    }

    pub fn identity(systems: Vec<SystemLabel>) -> Result<Self> {
        check_labels(&systems)?;
        let side = side_of(&systems);
        Ok(Self { systems, mat: CMat::identity(side, side) })
    }

    /// Rank-one projector `|v><v|` from amplitudes in row-major basis order.
    pub fn pure(systems: Vec<SystemLabel>, amplitudes: &[C64]) -> Result<Self> {
        check_labels(&systems)?;
        let side = side_of(&systems);
        if amplitudes.len() != side {
            return Err(Error::ShapeError(format!(
                "{} amplitudes for side {}",
                amplitudes.len(),
                side
            )));
        }
        let mut mat = CMat::zeros(side, side);
        for r in 0..side {
            for c in 0..side {
                mat[(r, c)] = amplitudes[r] * amplitudes[c].conj();
            }
        }
        Ok(Self { systems, mat })
    }

    /// Unnormalized maximally entangled operator `sum_{ik} |ii><kk|` on two
    /// fresh systems of dimension `d`. Its trace is `d`.
    pub fn omega(a: &str, b: &str, d: usize) -> Self {
        let systems = vec![SystemLabel::new(a, d), SystemLabel::new(b, d)];
        let mut mat = CMat::zeros(d * d, d * d);
        for i in 0..d {
            for k in 0..d {
                mat[(i * d + i, k * d + k)] = C64::new(1.0, 0.0);
            }
        }
        Self { systems, mat }
    }

    /// Normalized maximally entangled state `phi+ = omega / d`.
    pub fn phi_plus(a: &str, b: &str, d: usize) -> Self {
        Self::omega(a, b, d).scaled(1.0 / d as f64)
    }

    pub fn systems(&self) -> &[SystemLabel] {
        &self.systems
    }

    pub fn names(&self) -> Vec<&str> {
        self.systems.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    pub fn side(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn has(&self, name: &str) -> bool {
        self.systems.iter().any(|s| s.name == name)
    }

    pub fn find(&self, name: &str) -> Result<usize> {
        self.systems
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn dim_of(&self, name: &str) -> Result<usize> {
        Ok(self.systems[self.find(name)?].dim)
    }

    fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        let mut pos = Vec::with_capacity(names.len());
        for n in names {
            let p = self.find(n.as_ref())?;
            if pos.contains(&p) {
                return Err(Error::LabelCollision(n.as_ref().to_string()));
            }
            pos.push(p);
        }
        Ok(pos)
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn trace_re(&self) -> f64 {
        self.trace().re
    }

    /// Hilbert-Schmidt pairing `Tr[self^dag rhs]`; systems must match as sets.
    pub fn hs_inner(&self, rhs: &Self) -> Result<C64> {
        let names = self.names();
        let other = rhs.permuted(&names)?;
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..self.side() {
            for c in 0..self.side() {
                acc += self.mat[(r, c)].conj() * other.mat[(r, c)];
            }
        }
        Ok(acc)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.mat.nrows() {
            for c in r..self.mat.ncols() {
                let d = (self.mat[(r, c)] - self.mat[(c, r)].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// `(M + M^dag)/2`, discarding any anti-Hermitian numerical noise.
    pub fn hermitized(&self) -> Self {
        let mat = (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0);
        Self { systems: self.systems.clone(), mat }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { systems: self.systems.clone(), mat: &self.mat * C64::new(s, 0.0) }
    }

    pub fn scaled_c(&self, s: C64) -> Self {
        Self { systems: self.systems.clone(), mat: &self.mat * s }
    }

    fn aligned(&self, rhs: &Self) -> Result<CMat> {
        let names = self.names();
        if rhs.systems.len() != names.len() {
            return Err(Error::ShapeError("operand system sets differ".into()));
        }
        Ok(rhs.permuted(&names)?.mat)
    }

    pub fn plus(&self, rhs: &Self) -> Result<Self> {
        let m = self.aligned(rhs)?;
        Ok(Self { systems: self.systems.clone(), mat: &self.mat + m })
    }

    pub fn minus(&self, rhs: &Self) -> Result<Self> {
        let m = self.aligned(rhs)?;
        Ok(Self { systems: self.systems.clone(), mat: &self.mat - m })
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64> {
        let m = self.aligned(rhs)?;
        let mut worst = 0.0f64;
        for r in 0..self.side() {
            for c in 0..self.side() {
                let d = (self.mat[(r, c)] - m[(r, c)]).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        Ok(worst)
    }

    /// Reorders the systems; `order` must name every system exactly once.
    pub fn permuted<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        if order.len() != self.systems.len() {
            return Err(Error::ShapeError(format!(
                "permutation of length {} for {} systems",
                order.len(),
                self.systems.len()
            )));
        }
        let positions = self.resolve(order)?;
        if positions.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let old_dims = self.dims();
        let old_strides = strides_of(&old_dims);
        let new_systems: Vec<SystemLabel> =
            positions.iter().map(|&p| self.systems[p].clone()).collect();
        let new_dims: Vec<usize> = new_systems.iter().map(|s| s.dim).collect();
        let new_strides = strides_of(&new_dims);
        let side = self.side();
        let mut old_of = vec![0usize; side];
        for (i, slot) in old_of.iter_mut().enumerate() {
            let mut acc = 0usize;
            for (k, &p) in positions.iter().enumerate() {
                let digit = (i / new_strides[k]) % new_dims[k];
                acc += digit * old_strides[p];
            }
            *slot = acc;
        }
        let mut mat = CMat::zeros(side, side);
        for r in 0..side {
            for c in 0..side {
                mat[(r, c)] = self.mat[(old_of[r], old_of[c])];
            }
        }
        Ok(Self { systems: new_systems, mat })
    }

    /// Renames systems. Every source name must exist; targets must stay unique.
    pub fn renamed(&self, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut systems = self.systems.clone();
        for &(from, to) in pairs {
            let p = self.find(from)?;
            systems[p].name = to.to_string();
        }
        check_labels(&systems)?;
        Ok(Self { systems, mat: self.mat.clone() })
    }

    pub fn tensor(&self, rhs: &Self) -> Result<Self> {
        for s in &rhs.systems {
            if self.has(&s.name) {
                return Err(Error::LabelCollision(s.name.clone()));
            }
        }
        let mut systems = self.systems.clone();
        systems.extend(rhs.systems.iter().cloned());
        Ok(Self { systems, mat: self.mat.kronecker(&rhs.mat) })
    }

    /// Traces out the named systems, keeping the rest in their original order.
    pub fn partial_trace<S: AsRef<str>>(&self, traced: &[S]) -> Result<Self> {
        if traced.is_empty() {
            return Ok(self.clone());
        }
        let tpos = self.resolve(traced)?;
        let keep: Vec<&str> = self
            .systems
            .iter()
            .enumerate()
            .filter(|(k, _)| !tpos.contains(k))
            .map(|(_, s)| s.name.as_str())
            .collect();
        let mut order: Vec<&str> = keep.clone();
        order.extend(traced.iter().map(|s| s.as_ref()));
        let p = self.permuted(&order)?;
        let keep_systems: Vec<SystemLabel> = p.systems[..keep.len()].to_vec();
        let kd = side_of(&keep_systems);
        let td = p.side() / kd;
        let mut mat = CMat::zeros(kd, kd);
        for r in 0..kd {
            for c in 0..kd {
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..td {
                    acc += p.mat[(r * td + t, c * td + t)];
                }
                mat[(r, c)] = acc;
            }
        }
        Ok(Self { systems: keep_systems, mat })
    }

    /// Transposes the named systems in the computational basis, leaving the
    /// system order untouched.
    pub fn partial_transpose<S: AsRef<str>>(&self, part: &[S]) -> Result<Self> {
        if part.is_empty() {
            return Ok(self.clone());
        }
        let positions = self.resolve(part)?;
        let dims = self.dims();
        let strides = strides_of(&dims);
        let side = self.side();
        let mut cont = vec![0usize; side];
        for (i, slot) in cont.iter_mut().enumerate() {
            let mut acc = 0usize;
            for &p in &positions {
                acc += ((i / strides[p]) % dims[p]) * strides[p];
            }
            *slot = acc;
        }
        let mut mat = CMat::zeros(side, side);
        for r in 0..side {
            for c in 0..side {
                let r2 = r - cont[r] + cont[c];
                let c2 = c - cont[c] + cont[r];
                mat[(r2, c2)] = self.mat[(r, c)];
            }
        }
        Ok(Self { systems: self.systems.clone(), mat })
    }

    /// Coalesces systems into named groups. The groups must together list
    /// every system exactly once; each group becomes one system whose
    /// dimension is the product of its members, indexed row-major in the
    /// listed order.
    pub fn merged(&self, groups: &[(&str, &[&str])]) -> Result<Self> {
        let flat: Vec<&str> = groups.iter().flat_map(|(_, g)| g.iter().copied()).collect();
        let p = self.permuted(&flat)?;
        let mut systems = Vec::with_capacity(groups.len());
        let mut k = 0usize;
        for (name, members) in groups {
            let dim: usize = p.systems[k..k + members.len()].iter().map(|s| s.dim).product();
            systems.push(SystemLabel::new(*name, dim));
            k += members.len();
        }
        check_labels(&systems)?;
        Ok(Self { systems, mat: p.mat })
    }

    /// Splits one system into consecutive factors whose dims multiply back to
    /// the original dimension. Indexing stays row-major, so no data moves.
    pub fn split(&self, name: &str, parts: &[(&str, usize)]) -> Result<Self> {
        let p = self.find(name)?;
        let prod: usize = parts.iter().map(|&(_, d)| d).product();
        if prod != self.systems[p].dim {
            return Err(Error::ShapeError(format!(
                "cannot split {} (dim {}) into factors of product {}",
                name, self.systems[p].dim, prod
            )));
        }
        let mut systems = Vec::with_capacity(self.systems.len() + parts.len() - 1);
        systems.extend(self.systems[..p].iter().cloned());
        systems.extend(parts.iter().map(|&(n, d)| SystemLabel::new(n, d)));
        systems.extend(self.systems[p + 1..].iter().cloned());
        check_labels(&systems)?;
        Ok(Self { systems, mat: self.mat.clone() })
    }

    /// Link product: contracts the systems shared by name between `self` and
    /// `rhs` and tensors the rest. For Choi matrices this is composition of
    /// the underlying maps over the shared wires; with no shared names it
    /// reduces to the tensor product.
    ///
    /// Concretely, with `self` reordered to `(keep_a, shared)` and `rhs` to
    /// `(shared, keep_b)`, the result on `(keep_a, keep_b)` is
    /// `R[(a,b),(a',b')] = sum_{e,c} A[(a,e),(a',c)] B[(e,b),(c,b')]`,
    /// which is the partial trace of `A^(T_shared) B` over the shared part.
    pub fn link(&self, rhs: &Self) -> Result<Self> {
        let mut shared: Vec<&str> = self
            .systems
            .iter()
            .filter(|s| rhs.has(&s.name))
            .map(|s| s.name.as_str())
            .collect();
        shared.sort_unstable();
        if shared.is_empty() {
            return self.tensor(rhs);
        }
        for name in &shared {
            if self.dim_of(name)? != rhs.dim_of(name)? {
                return Err(Error::ShapeError(format!(
                    "shared system {} has mismatched dims",
                    name
                )));
            }
        }
        let keep_a: Vec<&str> = self
            .systems
            .iter()
            .filter(|s| !shared.contains(&s.name.as_str()))
            .map(|s| s.name.as_str())
            .collect();
        let keep_b: Vec<&str> = rhs
            .systems
            .iter()
            .filter(|s| !shared.contains(&s.name.as_str()))
            .map(|s| s.name.as_str())
            .collect();
        let mut order_a: Vec<&str> = keep_a.clone();
        order_a.extend(shared.iter().copied());
        let mut order_b: Vec<&str> = shared.clone();
        order_b.extend(keep_b.iter().copied());
        let a = self.permuted(&order_a)?;
        let b = rhs.permuted(&order_b)?;
        let m: usize = a.systems[..keep_a.len()].iter().map(|s| s.dim).product();
        let q = a.side() / m;
        let n = b.side() / q;
        let mut mat = CMat::zeros(m * n, m * n);
        for ka in 0..m {
            for ka2 in 0..m {
                for e in 0..q {
                    for c in 0..q {
                        let av = a.mat[(ka * q + e, ka2 * q + c)];
                        if av == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for kb in 0..n {
                            for kb2 in 0..n {
                                mat[(ka * n + kb, ka2 * n + kb2)] +=
                                    av * b.mat[(e * n + kb, c * n + kb2)];
                            }
                        }
                    }
                }
            }
        }
        let mut systems: Vec<SystemLabel> = a.systems[..keep_a.len()].to_vec();
        systems.extend(b.systems[shared.len()..].iter().cloned());
        Ok(Self { systems, mat })
    }

    /// Eigenvalues of a Hermitian operator, sorted ascending.
    pub fn eigvals(&self) -> Result<Vec<f64>> {
        let residual = self.hermiticity_residual();
        if residual > HERM_TOL.max(1e-9 * self.mat.norm()) {
            return Err(Error::NotHermitian { residual });
        }
        let eig = self.hermitized().mat.symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(vals)
    }

    /// Full Hermitian eigendecomposition: `(eigenvalues, eigenvectors)` with
    /// eigenvector `k` in column `k`.
    pub fn eigh(&self) -> Result<(Vec<f64>, CMat)> {
        let residual = self.hermiticity_residual();
        if residual > HERM_TOL.max(1e-9 * self.mat.norm()) {
            return Err(Error::NotHermitian { residual });
        }
        let eig = self.hermitized().mat.symmetric_eigen();
        let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        Ok((vals, eig.eigenvectors))
    }

    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eigvals()?.iter().map(|v| v.abs()).sum())
    }

    pub fn operator_norm(&self) -> Result<f64> {
        Ok(self.eigvals()?.iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let vals = self.eigvals()?;
        Ok(vals[0])
    }
}

/// A sample from the standard complex normal distribution.
pub fn complex_normal<R: Rng>(rng: &mut R) -> C64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let t = 2.0 * std::f64::consts::PI * u2;
    C64::new(r * t.cos(), r * t.sin()) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

/// Matrix with i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn haar_unitary<R: Rng>(rng: &mut R, d: usize) -> CMat {
    let g = ginibre(rng, d, d);
    let qr = g.qr();
    let r = qr.r();
    let mut u = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Random density matrix from the Hilbert-Schmidt ensemble.
pub fn random_density<R: Rng>(rng: &mut R, d: usize) -> CMat {
    let g = ginibre(rng, d, d);
    let m = &g * g.adjoint();
    let t = m.trace();
    m / t
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn sys(pairs: &[(&str, usize)]) -> Vec<SystemLabel> {
        pairs.iter().map(|&(n, d)| SystemLabel::new(n, d)).collect()
    }

    /// Choi matrix of conjugation by `u` as a map from system `x` to `y`.
    fn unitary_choi(x: &str, y: &str, u: &CMat) -> LabeledOperator {
        let d = u.nrows();
        let mut mat = CMat::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        mat[(i * d + a, j * d + b)] = u[(a, i)] * u[(b, j)].conj();
                    }
                }
            }
        }
        LabeledOperator::new(sys(&[(x, d), (y, d)]), mat).unwrap()
    }

    fn random_op<R: Rng>(rng: &mut R, systems: Vec<SystemLabel>) -> LabeledOperator {
        let side: usize = systems.iter().map(|s| s.dim).product();
        LabeledOperator::new(systems, ginibre(rng, side, side)).unwrap()
    }

    #[test]
    fn label_collision_rejected() {
        let err = LabeledOperator::zeros(sys(&[("X", 2), ("X", 3)])).unwrap_err();
        assert!(matches!(err, Error::LabelCollision(_)));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let err = LabeledOperator::new(sys(&[("X", 2)]), CMat::zeros(3, 3)).unwrap_err();
        assert!(matches!(err, Error::ShapeError(_)));
    }

    #[test]
    fn phi_plus_partial_transpose_spectrum() {
        let phi = LabeledOperator::phi_plus("A", "B", 2);
        let pt = phi.partial_transpose(&["B"]).unwrap();
        let vals = pt.eigvals().unwrap();
        let expect = [-0.5, 0.5, 0.5, 0.5];
        for (v, e) in vals.iter().zip(expect.iter()) {
            assert!((v - e).abs() < 1e-12, "got {:?}", vals);
        }
        assert!((pt.trace_norm().unwrap() - 2.0).abs() < 1e-12);
        assert!((pt.min_eigenvalue().unwrap() + 0.5).abs() < 1e-12);
        assert!((phi.min_eigenvalue().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn phi_plus_marginal_is_maximally_mixed() {
        for d in [2usize, 3] {
            let phi = LabeledOperator::phi_plus("A", "B", d);
            let red = phi.partial_trace(&["B"]).unwrap();
            let target = LabeledOperator::identity(sys(&[("A", d)])).unwrap().scaled(1.0 / d as f64);
            assert!(red.max_abs_diff(&target).unwrap() < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_of_product_is_transpose_of_factor() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let a = random_op(&mut rng, sys(&[("A", 2)]));
        let b = random_op(&mut rng, sys(&[("B", 3)]));
        let prod = a.tensor(&b).unwrap();
        let pt = prod.partial_transpose(&["B"]).unwrap();
        let bt = LabeledOperator::new(sys(&[("B", 3)]), b.mat().transpose()).unwrap();
        let expect = a.tensor(&bt).unwrap();
        assert!(pt.max_abs_diff(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn merge_then_split_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let op = random_op(&mut rng, sys(&[("X", 2), ("Y", 3), ("Z", 2)]));
        let merged = op.merged(&[("XY", &["X", "Y"]), ("Z2", &["Z"])]).unwrap();
        assert_eq!(merged.dims(), vec![6, 2]);
        let back = merged
            .split("XY", &[("X", 2), ("Y", 3)])
            .unwrap()
            .renamed(&[("Z2", "Z")])
            .unwrap();
        assert!(back.max_abs_diff(&op).unwrap() < 1e-14);
    }

    #[test]
    fn link_with_omega_relabels() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let j = random_op(&mut rng, sys(&[("X", 2), ("Y", 3)]));
        let omega = LabeledOperator::omega("Y", "Z", 3);
        let linked = j.link(&omega).unwrap();
        let expect = j.renamed(&[("Y", "Z")]).unwrap();
        assert!(linked.max_abs_diff(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn link_composes_unitary_channels() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let u = haar_unitary(&mut rng, 3);
        let v = haar_unitary(&mut rng, 3);
        let ju = unitary_choi("X", "Y", &u);
        let jv = unitary_choi("Y", "Z", &v);
        let composed = ju.link(&jv).unwrap();
        let direct = unitary_choi("X", "Z", &(&v * &u));
        assert!(composed.max_abs_diff(&direct).unwrap() < 1e-10);
    }

    #[test]
    fn link_without_shared_systems_is_tensor() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let a = random_op(&mut rng, sys(&[("X", 2)]));
        let b = random_op(&mut rng, sys(&[("Y", 2)]));
        let linked = a.link(&b).unwrap();
        let tens = a.tensor(&b).unwrap();
        assert!(linked.max_abs_diff(&tens).unwrap() < 1e-13);
    }

    #[test]
    fn link_over_all_systems_is_transposed_pairing() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let a = random_op(&mut rng, sys(&[("X", 2), ("Y", 2)]));
        let b = random_op(&mut rng, sys(&[("X", 2), ("Y", 2)]));
        let linked = a.link(&b).unwrap();
        assert_eq!(linked.side(), 1);
        let at = LabeledOperator::new(a.systems().to_vec(), a.mat().transpose()).unwrap();
        let expect = (at.mat() * b.mat()).trace();
        assert!((linked.mat()[(0, 0)] - expect).norm() < 1e-11);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let u = haar_unitary(&mut rng, 4);
        let err = (u.adjoint() * &u - CMat::identity(4, 4)).norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn random_density_is_a_state() {
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        let rho = random_density(&mut rng, 5);
        let op = LabeledOperator::new(sys(&[("X", 5)]), rho).unwrap();
        assert!((op.trace_re() - 1.0).abs() < 1e-12);
        assert!(op.min_eigenvalue().unwrap() > -1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn permutation_preserves_trace_and_roundtrips(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let op = random_op(&mut rng, sys(&[("X", 2), ("Y", 3), ("Z", 2)]));
            let p = op.permuted(&["Z", "X", "Y"]).unwrap();
            prop_assert!((p.trace() - op.trace()).norm() < 1e-12);
            let back = p.permuted(&["X", "Y", "Z"]).unwrap();
            prop_assert!(back.max_abs_diff(&op).unwrap() < 1e-14);
        }

        #[test]
        fn partial_transpose_is_an_involution(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let op = random_op(&mut rng, sys(&[("X", 2), ("Y", 2), ("Z", 3)]));
            let twice = op
                .partial_transpose(&["Y", "Z"]).unwrap()
                .partial_transpose(&["Y", "Z"]).unwrap();
            prop_assert!(twice.max_abs_diff(&op).unwrap() < 1e-14);
        }

        #[test]
        fn partial_trace_of_tensor_factors(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let a = random_op(&mut rng, sys(&[("X", 2)]));
            let b = random_op(&mut rng, sys(&[("Y", 3)]));
            let prod = a.tensor(&b).unwrap();
            let red = prod.partial_trace(&["Y"]).unwrap();
            let expect = a.scaled_c(b.trace());
            prop_assert!(red.max_abs_diff(&expect).unwrap() < 1e-12);
        }

        #[test]
        fn link_is_associative_on_chains(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let a = random_op(&mut rng, sys(&[("X", 2), ("Y", 2)]));
            let b = random_op(&mut rng, sys(&[("Y", 2), ("Z", 2)]));
            let c = random_op(&mut rng, sys(&[("Z", 2), ("W", 2)]));
            let left = a.link(&b).unwrap().link(&c).unwrap();
            let right = a.link(&b.link(&c).unwrap()).unwrap();
            prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-9);
        }

        #[test]
        fn partial_trace_commutes_with_partial_transpose_elsewhere(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let op = random_op(&mut rng, sys(&[("X", 2), ("Y", 2), ("Z", 2)]));
            let one = op.partial_transpose(&["Y"]).unwrap().partial_trace(&["Z"]).unwrap();
            let two = op.partial_trace(&["Z"]).unwrap().partial_transpose(&["Y"]).unwrap();
            prop_assert!(one.max_abs_diff(&two).unwrap() < 1e-13);
        }
    }
}
