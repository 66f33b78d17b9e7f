/// Dimensions of the jet space J¹(T, M): `p = dim T`, `n = dim M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub p: usize,
    pub n: usize,
}

impl Dims {
    pub fn new(p: usize, n: usize) -> Self {
        Dims { p, n }
    }

    /// Number of jet coordinates `x^i_α`.
    pub fn pairs(&self) -> usize {
        self.p * self.n
    }

    /// Flat index of the vertical pair `(i, α)`: Latin index major.
    #[inline]
    pub fn pair(&self, i: usize, a: usize) -> usize {
        i * self.p + a
    }

    #[inline]
    pub fn unpair(&self, flat: usize) -> (usize, usize) {
        (flat / self.p, flat % self.p)
    }
}
