//! Dense complex linear algebra shared by all physics modules.
//!
//! Everything is built around [`Operator`], a square complex matrix tagged
//! with the list of tensor-factor dimensions it acts on. States, Hamiltonians
//! and unitaries all use the same carrier; subsystem bookkeeping goes through
//! the `dims` list (leftmost factor is the most significant index).

use nalgebra::DMatrix;
use thiserror::Error;

/// Complex double.
pub type C64 = nalgebra::Complex<f64>;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Default tolerance for structural assertions (hermiticity, unitarity).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative threshold below which a singular value counts as zero.
///
/// The dark (zero-singular-value) subspace drives the whole rotation method,
/// so zero singular values are classified explicitly instead of truncated.
pub const ZERO_SINGULAR_REL: f64 = 1e-12;

/// Numerical tolerances used by structural checks. All entry points take the
/// defaults unless a caller overrides them.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Absolute tolerance on ‖A−A†‖ / ‖U†U−I‖ style checks.
    pub structural: f64,
    /// σ < `zero_singular_rel`·σ_max counts as a zero singular value.
    pub zero_singular_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structural: DEFAULT_TOL,
            zero_singular_rel: ZERO_SINGULAR_REL,
        }
    }
}

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("product of dims {dims:?} is {product}, but matrix side is {side}")]
    DimProductMismatch {
        dims: Vec<usize>,
        product: usize,
        side: usize,
    },
    #[error("operator is not Hermitian: max|A - A\u{2020}| = {deviation:.3e} (tol {tol:.1e})")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("operator is not unitary: max|U\u{2020}U - 1| = {deviation:.3e} (tol {tol:.1e})")]
    NotUnitary { deviation: f64, tol: f64 },
}

/// Dense complex square matrix on a tensor product of subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
    dims: Vec<usize>,
}

impl Operator {
    /// Wrap a matrix, checking that it is square and that the subsystem
    /// dimensions multiply to the side length.
    pub fn new(mat: DMatrix<C64>, dims: Vec<usize>) -> Result<Self, LinalgError> {
        if mat.nrows() != mat.ncols() {
            return Err(LinalgError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let product: usize = dims.iter().product();
        if product != mat.nrows() {
            return Err(LinalgError::DimProductMismatch {
                dims,
                product,
                side: mat.nrows(),
            });
        }
        Ok(Operator { mat, dims })
    }

    /// Build from an entry function over (row, col).
    pub fn from_fn(dims: &[usize], f: impl FnMut(usize, usize) -> C64) -> Self {
        let side: usize = dims.iter().product();
        Operator {
            mat: DMatrix::from_fn(side, side, f),
            dims: dims.to_vec(),
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let side: usize = dims.iter().product();
        Operator {
            mat: DMatrix::identity(side, side),
            dims: dims.to_vec(),
        }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let side: usize = dims.iter().product();
        Operator {
            mat: DMatrix::zeros(side, side),
            dims: dims.to_vec(),
        }
    }

    /// Diagonal operator from phases/values.
    pub fn from_diagonal(dims: &[usize], diag: &[C64]) -> Self {
        let side: usize = dims.iter().product();
        assert_eq!(side, diag.len(), "diagonal length must match dims product");
        Operator {
            mat: DMatrix::from_fn(side, side, |i, j| {
                if i == j {
                    diag[i]
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
            dims: dims.to_vec(),
        }
    }

    /// Matrix side length.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Ordered subsystem dimensions (leftmost factor most significant).
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    /// Reinterpret the same matrix over a different subsystem split.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self, LinalgError> {
        Operator::new(self.mat.clone(), dims)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Operator {
            mat: self.mat.adjoint(),
            dims: self.dims.clone(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Operator {
            mat: self.mat.map(|z| z * c),
            dims: self.dims.clone(),
        }
    }

    /// Largest entry-wise deviation from another operator.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "operator dimensions differ");
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let adj = self.mat.adjoint();
        self.mat
            .iter()
            .zip(adj.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self.mat.adjoint() * &self.mat;
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                dev = dev.max((prod[(i, j)] - target).norm());
            }
        }
        dev
    }

    pub fn assert_hermitian(&self, tol: f64) -> Result<(), LinalgError> {
        let deviation = self.hermiticity_deviation();
        if deviation > tol {
            return Err(LinalgError::NotHermitian { deviation, tol });
        }
        Ok(())
    }

    pub fn assert_unitary(&self, tol: f64) -> Result<(), LinalgError> {
        let deviation = self.unitarity_deviation();
        if deviation > tol {
            return Err(LinalgError::NotUnitary { deviation, tol });
        }
        Ok(())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(
            self.dims, rhs.dims,
            "operator products require identical subsystem dims"
        );
        Operator {
            mat: &self.mat * &rhs.mat,
            dims: self.dims.clone(),
        }
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dims, rhs.dims, "operator sums require identical dims");
        Operator {
            mat: &self.mat + &rhs.mat,
            dims: self.dims.clone(),
        }
    }
}

impl std::ops::Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dims, rhs.dims, "operator sums require identical dims");
        Operator {
            mat: &self.mat - &rhs.mat,
            dims: self.dims.clone(),
        }
    }
}

/// Tensor product; dims lists are concatenated.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (na, nb) = (a.dim(), b.dim());
    let mat = DMatrix::from_fn(na * nb, na * nb, |i, j| {
        a.mat[(i / nb, j / nb)] * b.mat[(i % nb, j % nb)]
    });
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    Operator { mat, dims }
}

/// Row-major composite index of a digit string under `dims`.
pub fn basis_index(dims: &[usize], digits: &[usize]) -> usize {
    assert_eq!(dims.len(), digits.len());
    let mut idx = 0;
    for (d, &digit) in dims.iter().zip(digits) {
        assert!(digit < *d, "digit {digit} out of range for dim {d}");
        idx = idx * d + digit;
    }
    idx
}

/// Inverse of [`basis_index`].
pub fn basis_digits(dims: &[usize], index: usize) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    let mut rem = index;
    for (slot, d) in digits.iter_mut().zip(dims).rev() {
        *slot = rem % d;
        rem /= d;
    }
    digits
}

/// Eigendecomposition of a Hermitian operator: eigenvalues descending with
/// matching eigenvector columns.
pub fn eigh(h: &Operator) -> (Vec<f64>, DMatrix<C64>) {
    let eig = h.mat.clone().symmetric_eigen();
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// exp(−i h t) for Hermitian `h`, via eigendecomposition.
///
/// Rejects non-Hermitian input with the measured deviation.
pub fn matexp_hermitian(h: &Operator, t: f64) -> Result<Operator, LinalgError> {
    matexp_hermitian_tol(h, t, DEFAULT_TOL)
}

pub fn matexp_hermitian_tol(h: &Operator, t: f64, tol: f64) -> Result<Operator, LinalgError> {
    h.assert_hermitian(tol)?;
    let (values, vectors) = eigh(h);
    let n = h.dim();
    let mut scaled = vectors.clone();
    for (col, &lambda) in values.iter().enumerate() {
        let phase = (-I * C64::new(lambda * t, 0.0)).exp();
        for row in 0..n {
            scaled[(row, col)] *= phase;
        }
    }
    let mat = scaled * vectors.adjoint();
    Ok(Operator {
        mat,
        dims: h.dims.clone(),
    })
}

/// Singular value decomposition with explicit zero-singular-value vectors.
///
/// `singular_values` are descending; columns of `left`/`right` are the paired
/// singular vectors, with A = Σ σ_j |l_j⟩⟨r_j| reconstructing the input.
/// Zero singular values are retained: their left vectors span null(A†) and
/// their right vectors span null(A).
#[derive(Clone, Debug)]
pub struct SvdTriple {
    pub singular_values: Vec<f64>,
    pub left: DMatrix<C64>,
    pub right: DMatrix<C64>,
    zero_threshold: f64,
}

impl SvdTriple {
    /// σ below this absolute threshold classify as zero.
    pub fn zero_threshold(&self) -> f64 {
        self.zero_threshold
    }

    pub fn is_zero(&self, j: usize) -> bool {
        self.singular_values[j] <= self.zero_threshold
    }

    pub fn rank(&self) -> usize {
        self.singular_values
            .iter()
            .filter(|&&s| s > self.zero_threshold)
            .count()
    }

    /// Σ σ_j |l_j⟩⟨r_j|.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let n = self.left.nrows();
        let mut out = DMatrix::zeros(n, n);
        for (j, &s) in self.singular_values.iter().enumerate() {
            let l = self.left.column(j);
            let r = self.right.column(j);
            for row in 0..n {
                for col in 0..n {
                    out[(row, col)] += C64::new(s, 0.0) * l[row] * r[col].conj();
                }
            }
        }
        out
    }
}

/// SVD of a square operator, singular values descending, zero singular
/// values retained with explicit null-space vectors.
pub fn svd(a: &Operator) -> SvdTriple {
    svd_tol(a, Tolerances::default())
}

pub fn svd_tol(a: &Operator, tol: Tolerances) -> SvdTriple {
    let n = a.dim();
    if let Some(decomp) = a.mat.clone().try_svd(true, true, f64::EPSILON, 2000) {
        let u = decomp.u.unwrap();
        let vt = decomp.v_t.unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| {
            decomp.singular_values[y]
                .partial_cmp(&decomp.singular_values[x])
                .unwrap()
        });
        let singular_values: Vec<f64> = order.iter().map(|&i| decomp.singular_values[i]).collect();
        let mut left = DMatrix::zeros(n, n);
        let mut right = DMatrix::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            left.set_column(col, &u.column(src));
            right.set_column(col, &vt.row(src).adjoint());
        }
        let sigma_max = singular_values.first().copied().unwrap_or(0.0);
        let zero_threshold = tol.zero_singular_rel * sigma_max.max(1.0e-300);
        return SvdTriple {
            singular_values,
            left,
            right,
            zero_threshold,
        };
    }
    svd_via_gram(a, tol)
}

/// Fallback route through eigh(A†A)/eigh(AA†). Small singular values carry
/// the Gram noise floor √ε·σ_max, so the zero threshold is widened
/// accordingly.
fn svd_via_gram(a: &Operator, tol: Tolerances) -> SvdTriple {
    let n = a.dim();
    let gram_right = Operator {
        mat: a.mat.adjoint() * &a.mat,
        dims: a.dims.clone(),
    };
    let (lambdas, right) = eigh(&gram_right);
    let singular_values: Vec<f64> = lambdas.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let gram_floor = (n as f64 * f64::EPSILON).sqrt() * 16.0;
    let zero_threshold = tol.zero_singular_rel.max(gram_floor) * sigma_max.max(1.0e-300);

    let mut left = DMatrix::zeros(n, n);
    let mut zero_cols = Vec::new();
    for (j, &s) in singular_values.iter().enumerate() {
        if s > zero_threshold {
            let lr = &a.mat * right.column(j);
            let col = lr.map(|z| z / C64::new(s, 0.0));
            left.set_column(j, &col);
        } else {
            zero_cols.push(j);
        }
    }
    if !zero_cols.is_empty() {
        // Null space of A†, i.e. the smallest-eigenvalue eigenvectors of AA†.
        let gram_left = Operator {
            mat: &a.mat * a.mat.adjoint(),
            dims: a.dims.clone(),
        };
        let (_, lvecs) = eigh(&gram_left);
        for (slot, &j) in zero_cols.iter().enumerate() {
            // eigh sorts descending, so null vectors sit at the tail
            left.set_column(j, &lvecs.column(n - 1 - slot));
        }
    }

    SvdTriple {
        singular_values,
        left,
        right,
        zero_threshold,
    }
}

/// Largest singular value.
pub fn operator_norm(a: &Operator) -> f64 {
    let gram = a.mat.adjoint() * &a.mat;
    let eig = gram.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.max(0.0)))
        .sqrt()
}

/// Average gate fidelity F = (|tr(M U†)|² + tr(M†M)) / (n(n+1)).
///
/// `m` may be non-unitary (leakage); both matrices must share the same side
/// length n (the computational-space dimension).
pub fn average_gate_fidelity(m: &DMatrix<C64>, target: &DMatrix<C64>) -> f64 {
    assert_eq!(m.nrows(), target.nrows(), "fidelity dimensions differ");
    let n = m.nrows() as f64;
    let tr_mu = (m * target.adjoint()).trace();
    let tr_mm = (m.adjoint() * m).trace();
    (tr_mu.norm_sqr() + tr_mm.re) / (n * (n + 1.0))
}

/// Standard 2x2 matrices in the basis ordering used throughout: index 0 is
/// the σ_z = +1 state.
pub fn sigma_x() -> Operator {
    Operator::from_fn(&[2], |i, j| {
        if i != j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn sigma_y() -> Operator {
    Operator::from_fn(&[2], |i, j| match (i, j) {
        (0, 1) => C64::new(0.0, -1.0),
        (1, 0) => C64::new(0.0, 1.0),
        _ => C64::new(0.0, 0.0),
    })
}

pub fn sigma_z() -> Operator {
    Operator::from_diagonal(&[2], &[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)])
}

/// Raising operator |0⟩⟨1| in the fixed ordering (index 0 carries σ_z = +1).
pub fn sigma_plus() -> Operator {
    Operator::from_fn(&[2], |i, j| {
        if i == 0 && j == 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn sigma_minus() -> Operator {
    sigma_plus().adjoint()
}

/// Truncated bosonic annihilation operator on `dim` levels.
pub fn annihilation(dim: usize) -> Operator {
    Operator::from_fn(&[dim], |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Number operator diag(0, 1, ..., dim−1).
pub fn number_operator(dim: usize) -> Operator {
    Operator::from_fn(
        &[dim],
        |i, j| {
            if i == j {
                C64::new(i as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> Operator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = DMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let herm = (&raw + raw.adjoint()).map(|z| z * C64::new(0.5, 0.0));
        Operator::new(herm, vec![n]).unwrap()
    }

    /// Independent oracle: scaling-and-squaring Taylor series for exp(−iHt).
    fn matexp_taylor(h: &Operator, t: f64) -> DMatrix<C64> {
        let n = h.dim();
        let norm1: f64 = h
            .matrix()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            * n as f64
            * t.abs();
        let squarings = norm1.log2().ceil().max(0.0) as u32 + 2;
        let scale = 2.0f64.powi(squarings as i32);
        let a = h.matrix().map(|z| -I * z * C64::new(t / scale, 0.0));
        let mut term = DMatrix::<C64>::identity(n, n);
        let mut sum = DMatrix::<C64>::identity(n, n);
        for k in 1..40 {
            term = (&term * &a).map(|z| z / C64::new(k as f64, 0.0));
            sum += &term;
        }
        let mut result = sum;
        for _ in 0..squarings {
            result = &result * &result;
        }
        result
    }

    #[test]
    fn kron_identity_case() {
        let i2 = Operator::identity(&[2]);
        let prod = kron(&i2, &i2);
        assert_eq!(prod.dims(), &[2, 2]);
        assert!(prod.max_abs_diff(&Operator::identity(&[2, 2])) < 1e-15);
    }

    #[test]
    fn kron_sigma_z_diagonal() {
        let zz = kron(&sigma_z(), &sigma_z());
        let expect = Operator::from_diagonal(
            &[2, 2],
            &[
                C64::new(1.0, 0.0),
                C64::new(-1.0, 0.0),
                C64::new(-1.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        );
        assert!(zz.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn kron_dimension_bookkeeping() {
        let a = Operator::identity(&[3]);
        let b = Operator::identity(&[3, 3]);
        let prod = kron(&a, &b);
        assert_eq!(prod.dims(), &[3, 3, 3]);
        assert_eq!(prod.dim(), 27);
    }

    #[test]
    fn matexp_zero_hamiltonian() {
        let h = Operator::zeros(&[2, 2]);
        let u = matexp_hermitian(&h, 1.7).unwrap();
        assert!(u.max_abs_diff(&Operator::identity(&[2, 2])) < 1e-12);
    }

    #[test]
    fn matexp_sigma_x_quarter_period() {
        // exp(−i σ_x π/2) = −i σ_x
        let u = matexp_hermitian(&sigma_x(), std::f64::consts::FRAC_PI_2).unwrap();
        let expect = sigma_x().scale(-I);
        assert!(u.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn matexp_matches_taylor_oracle() {
        let h = random_hermitian(8, 42);
        let u = matexp_hermitian(&h, 0.7).unwrap();
        let oracle = matexp_taylor(&h, 0.7);
        let dev = u
            .matrix()
            .iter()
            .zip(oracle.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-10, "matexp vs Taylor oracle deviation {dev:.3e}");
    }

    #[test]
    fn matexp_rejects_non_hermitian() {
        let a = annihilation(3);
        let err = matexp_hermitian(&a, 1.0).unwrap_err();
        match err {
            LinalgError::NotHermitian { deviation, .. } => assert!(deviation > 0.9),
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn matexp_inverse_pairs() {
        for seed in 0..4 {
            let h = random_hermitian(6, 100 + seed);
            let u = matexp_hermitian(&h, 0.37).unwrap();
            let v = matexp_hermitian(&h, -0.37).unwrap();
            assert!((&u * &v).max_abs_diff(&Operator::identity(&[6])) < 1e-10);
        }
    }

    #[test]
    fn svd_identity() {
        let triple = svd(&Operator::identity(&[4]));
        for &s in &triple.singular_values {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert_eq!(triple.rank(), 4);
    }

    #[test]
    fn svd_truncated_annihilation() {
        // a on 3 levels has a†a = diag(0, 1, 2): singular values {√2, 1, 0}
        let triple = svd(&annihilation(3));
        let expect = [2f64.sqrt(), 1.0, 0.0];
        for (s, e) in triple.singular_values.iter().zip(expect) {
            assert!((s - e).abs() < 1e-12, "singular values {:?}", triple.singular_values);
        }
        assert!(triple.is_zero(2));
        assert_eq!(triple.rank(), 2);
    }

    #[test]
    fn svd_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..4 {
            let raw = DMatrix::from_fn(16, 16, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let a = Operator::new(raw, vec![16]).unwrap();
            let triple = svd(&a);
            let rec = triple.reconstruct();
            let dev = rec
                .iter()
                .zip(a.matrix().iter())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-10, "svd reconstruction deviation {dev:.3e}");
        }
    }

    #[test]
    fn svd_orthonormal_vector_sets() {
        // singular matrix with a nontrivial null space
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let thin = DMatrix::from_fn(6, 3, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let a = Operator::new(&thin * thin.adjoint(), vec![6]).unwrap();
        let triple = svd(&a);
        assert_eq!(triple.rank(), 3);
        for side in [&triple.left, &triple.right] {
            let gram = side.adjoint() * side;
            for i in 0..6 {
                for j in 0..6 {
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (gram[(i, j)] - C64::new(target, 0.0)).norm() < 1e-10,
                        "non-orthonormal vectors at {i},{j}"
                    );
                }
            }
        }
    }

    #[test]
    fn operator_norm_cases() {
        assert!((operator_norm(&Operator::identity(&[5])) - 1.0).abs() < 1e-12);
        let two = Operator::identity(&[4]).scale(C64::new(2.0, 0.0));
        assert!((operator_norm(&two) - 2.0).abs() < 1e-12);
        // random unitary via matexp of a random Hermitian
        let u = matexp_hermitian(&random_hermitian(7, 3), 1.0).unwrap();
        assert!((operator_norm(&u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_index_roundtrip() {
        let dims = [3, 2, 4];
        for idx in 0..24 {
            let digits = basis_digits(&dims, idx);
            assert_eq!(basis_index(&dims, &digits), idx);
        }
        assert_eq!(basis_index(&dims, &[1, 0, 2]), 10);
    }

    #[test]
    fn fidelity_of_exact_gate_is_one() {
        let u = matexp_hermitian(&random_hermitian(4, 5), 0.9).unwrap();
        let f = average_gate_fidelity(u.matrix(), u.matrix());
        assert!((f - 1.0).abs() < 1e-12);
    }
}
