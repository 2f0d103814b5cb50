//! Linear systems whose unknowns are a list of matrix blocks.
//!
//! An equation is a sum of terms `c * L * X_b * R` equal to a constant
//! matrix, where `L`/`R` default to identities.

use crate::ff::FpMatrix;

pub(crate) struct Term<'a> {
    pub block: usize,
    pub coeff: u32,
    pub left: Option<&'a FpMatrix>,
    pub right: Option<&'a FpMatrix>,
}

impl<'a> Term<'a> {
    pub fn new(block: usize, coeff: u32, left: Option<&'a FpMatrix>, right: Option<&'a FpMatrix>) -> Self {
        Term { block, coeff, left, right }
    }
}

pub(crate) struct LinSys {
    p: u32,
    shapes: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    nvars: usize,
    rows: Vec<u32>,
    rhs: Vec<u32>,
    nrows: usize,
}

impl LinSys {
    pub fn new(p: u32, shapes: Vec<(usize, usize)>) -> Self {
        let mut offsets = Vec::with_capacity(shapes.len());
        let mut n = 0;
        for &(r, c) in &shapes {
            offsets.push(n);
            n += r * c;
        }
        LinSys { p, shapes, offsets, nvars: n, rows: Vec::new(), rhs: Vec::new(), nrows: 0 }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Add the `er x ec` equations `sum terms = rhs` (zero when `rhs` is `None`).
    pub fn add_eq(&mut self, er: usize, ec: usize, terms: &[Term<'_>], rhs: Option<&FpMatrix>) {
        if er * ec == 0 {
            return;
        }
        let p = self.p;
        let base = self.rows.len();
        self.rows.resize(base + er * ec * self.nvars, 0);
        for t in terms {
            let (br, bc) = self.shapes[t.block];
            if br * bc == 0 || t.coeff % p == 0 {
                continue;
            }
            let off = self.offsets[t.block];
            for i in 0..er {
                for j in 0..ec {
                    let row = base + (i * ec + j) * self.nvars;
                    for k in 0..br {
                        let l_ik = match t.left {
                            Some(l) => l.get(i, k),
                            None => (i == k) as u32,
                        };
                        if l_ik == 0 {
                            continue;
                        }
                        for l in 0..bc {
                            let r_lj = match t.right {
                                Some(r) => r.get(l, j),
                                None => (l == j) as u32,
                            };
                            if r_lj == 0 {
                                continue;
                            }
                            let v = &mut self.rows[row + off + k * bc + l];
                            *v = (*v + t.coeff * l_ik % p * r_lj) % p;
                        }
                    }
                }
            }
        }
        for i in 0..er {
            for j in 0..ec {
                self.rhs.push(rhs.map_or(0, |m| m.get(i, j)));
            }
        }
        self.nrows += er * ec;
    }

    fn matrix(&self) -> FpMatrix {
        FpMatrix::from_vec(self.p, self.nrows, self.nvars, self.rows.clone()).expect("consistent system")
    }

    pub fn kernel(&self) -> Vec<Vec<u32>> {
        if self.nrows == 0 {
            return (0..self.nvars)
                .map(|k| {
                    let mut v = vec![0; self.nvars];
                    v[k] = 1;
                    v
                })
                .collect();
        }
        self.matrix().kernel_basis()
    }

    pub fn solve(&self) -> Option<Vec<u32>> {
        if self.nrows == 0 {
            return Some(vec![0; self.nvars]);
        }
        self.matrix().solve_linear(&self.rhs).expect("rhs sized by construction")
    }

    /// Split a flat vector into its blocks.
    pub fn unflatten(&self, v: &[u32]) -> Vec<FpMatrix> {
        self.shapes
            .iter()
            .zip(&self.offsets)
            .map(|(&(r, c), &o)| FpMatrix::from_vec(self.p, r, c, v[o..o + r * c].to_vec()).unwrap())
            .collect()
    }
}

/// Concatenate blocks into a flat vector.
pub(crate) fn flatten(blocks: &[FpMatrix]) -> Vec<u32> {
    blocks.iter().flat_map(|b| b.entries().iter().copied()).collect()
}
