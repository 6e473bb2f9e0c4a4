use std::ops::{Index, IndexMut};

use num_complex::Complex64;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row slices. Panics if the rows are not square.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "matrix rows must be square");
            data.extend_from_slice(row);
        }
        Self { dim, data }
    }

    pub fn from_real(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "matrix rows must be square");
            data.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self { dim, data }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let mut out = Self::zeros(n * m);
        for r1 in 0..n {
            for c1 in 0..n {
                let a = self.data[r1 * n + c1];
                for r2 in 0..m {
                    for c2 in 0..m {
                        out[(r1 * m + r2, c1 * m + c2)] = a * other.data[r2 * m + c2];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| *x == ZERO)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint()
            .matmul(self)
            .approx_eq(&Self::identity(self.dim), tol)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

/// Single-qubit superoperator acting on the vectorised 2x2 block
/// `(rho00, rho01, rho10, rho11)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Superop1 {
    pub(crate) m: [C64; 16],
}

impl Superop1 {
    pub fn identity() -> Self {
        let mut m = [ZERO; 16];
        for i in 0..4 {
            m[i * 5] = ONE;
        }
        Self { m }
    }

    /// Superoperator of `rho -> sum_i A_i rho A_i^dagger` for 2x2 operators.
    pub fn from_kraus(ops: &[CMatrix]) -> Self {
        let mut m = [ZERO; 16];
        for a in ops {
            debug_assert_eq!(a.dim(), 2);
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            m[(i * 2 + j) * 4 + (k * 2 + l)] += a[(i, k)] * a[(j, l)].conj();
                        }
                    }
                }
            }
        }
        Self { m }
    }

    pub fn from_unitary(u: &CMatrix) -> Self {
        Self::from_kraus(std::slice::from_ref(u))
    }

    /// `rho -> sum_P w_P P rho P` over (I, X, Y, Z). Weights may be negative,
    /// in which case the map is a quasi-probability combination.
    pub fn pauli_mixture(weights: [f64; 4]) -> Self {
        let paulis = crate::sim::gate::pauli_matrices();
        let mut m = [ZERO; 16];
        for (p, w) in paulis.iter().zip(weights) {
            let s = Self::from_unitary(p);
            for (acc, v) in m.iter_mut().zip(s.m) {
                *acc += v * w;
            }
        }
        Self { m }
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &Superop1) -> Self {
        let mut m = [ZERO; 16];
        for r in 0..4 {
            for k in 0..4 {
                let a = self.m[r * 4 + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..4 {
                    m[r * 4 + c] += a * first.m[k * 4 + c];
                }
            }
        }
        Self { m }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let id = Self::identity();
        self.m.iter().zip(&id.m).all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Diagonal of the Pauli transfer matrix in (I, X, Y, Z) order.
    pub fn pauli_transfer_diagonal(&self) -> [f64; 4] {
        let paulis = crate::sim::gate::pauli_matrices();
        let mut out = [0.0; 4];
        for (q, p) in paulis.iter().enumerate() {
            let image = self.apply_block([p[(0, 0)], p[(0, 1)], p[(1, 0)], p[(1, 1)]]);
            // (1/2) Tr(P N(P))
            let tr = p[(0, 0)] * image[0]
                + p[(0, 1)] * image[2]
                + p[(1, 0)] * image[1]
                + p[(1, 1)] * image[3];
            out[q] = 0.5 * tr.re;
        }
        out
    }

    #[inline]
    pub(crate) fn apply_block(&self, v: [C64; 4]) -> [C64; 4] {
        let m = &self.m;
        [
            m[0] * v[0] + m[1] * v[1] + m[2] * v[2] + m[3] * v[3],
            m[4] * v[0] + m[5] * v[1] + m[6] * v[2] + m[7] * v[3],
            m[8] * v[0] + m[9] * v[1] + m[10] * v[2] + m[11] * v[3],
            m[12] * v[0] + m[13] * v[1] + m[14] * v[2] + m[15] * v[3],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_of_identities_is_identity() {
        let k = CMatrix::identity(2).kron(&CMatrix::identity(4));
        assert!(k.approx_eq(&CMatrix::identity(8), 0.0));
    }

    #[test]
    fn superop_composition_matches_sequential_kraus() {
        let h = crate::sim::gate::Gate::H(0).matrix();
        let s = crate::sim::gate::Gate::Rz(0, 0.3).matrix();
        let composed = Superop1::from_unitary(&s).after(&Superop1::from_unitary(&h));
        let direct = Superop1::from_unitary(&s.matmul(&h));
        for (a, b) in composed.m.iter().zip(&direct.m) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
