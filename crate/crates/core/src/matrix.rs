use crate::scalar::Scalar;

/// Dense Hermitian matrix in column-major storage.
///
/// Both triangles are stored; constructors keep `a[j, i] == conj(a[i, j])`
/// bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymmetricMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        SymmetricMatrix {
            dim,
            data: vec![T::ZERO; dim * dim],
        }
    }

    /// Builds a matrix from its upper triangle (`i <= j`); the diagonal is made real.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            for i in 0..=j {
                m.data[i + j * dim] = f(i, j);
            }
        }
        m.mirror_upper();
        m
    }

    /// Copies the strict upper triangle onto the lower one and zeroes the
    /// imaginary part of the diagonal.
    pub(crate) fn mirror_upper(&mut self) {
        let n = self.dim;
        for j in 0..n {
            let d = self.data[j + j * n].re();
            self.data[j + j * n] = T::from_re(d);
            for i in 0..j {
                self.data[j + i * n] = self.data[i + j * n].conj();
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i + j * self.dim]
    }

    #[inline]
    pub(crate) fn upper_mut(&mut self, i: usize, j: usize) -> &mut T {
        debug_assert!(i <= j);
        &mut self.data[i + j * self.dim]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re()).sum()
    }

    /// True when the Hermitian symmetry holds exactly.
    pub fn is_hermitian(&self) -> bool {
        let n = self.dim;
        (0..n).all(|j| {
            self.get(j, j).im() == 0.0 && (0..j).all(|i| self.get(j, i) == self.get(i, j).conj())
        })
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.dim;
        let mut y = vec![T::ZERO; n];
        for (j, &xj) in x.iter().enumerate() {
            for (yi, &a) in y.iter_mut().zip(self.column(j)) {
                *yi += a * xj;
            }
        }
        y
    }

    /// Extracts the principal submatrix on `range`.
    pub fn principal(&self, range: std::ops::Range<usize>) -> Self {
        let k = range.len();
        let s = range.start;
        let mut m = Self::zeros(k);
        for j in 0..k {
            for i in 0..k {
                m.data[i + j * k] = self.get(s + i, s + j);
            }
        }
        m
    }

    /// Places `block` on the diagonal starting at `offset`.
    pub fn set_block(&mut self, offset: usize, block: &Self) {
        let k = block.dim;
        for j in 0..k {
            let dst = (offset + j) * self.dim + offset;
            self.data[dst..dst + k].copy_from_slice(block.column(j));
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        SymmetricMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}
