//! Complexes of representations in either grading: 2-periodic, or bounded
//! inside a fixed degree window. Chain maps, homotopies, homology, middle
//! terms of extensions, and Fitting splittings live here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ff::FpMatrix;
use crate::linsys::{flatten, LinSys, Term};
use crate::quiver::{checked_size, complement_indices, Counter, RepCategory, RepMorphism, Rep, BUDGET};

/// Lowest degree stored for bounded complexes.
pub const WIN_LO: i32 = -12;
/// Number of degrees stored for bounded complexes.
pub const WIN_LEN: usize = 25;
/// Degrees a caller may use for bounded complexes.
pub const PUBLIC_WINDOW: (i32, i32) = (-8, 8);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gcx {
    periodic: bool,
    comps: Vec<Rep>,
    /// Periodic: `diffs[k]: comps[k] -> comps[1-k]`.
    /// Bounded: `diffs[k]: comps[k] -> comps[k+1]`.
    diffs: Vec<RepMorphism>,
}

/// A chain map as one morphism per stored index.
pub type ChainMap = Vec<RepMorphism>;

/// Homology at one index: `Z = ker d`, `H = Z / im d`.
#[derive(Debug, Clone)]
pub struct HomologyAt {
    pub h: Rep,
    pub z: Rep,
    pub z_incl: RepMorphism,
    pub proj: RepMorphism,
}

pub(crate) fn index_to_degree(k: usize) -> i32 {
    k as i32 + WIN_LO
}

impl Gcx {
    pub fn new(cat: &RepCategory, periodic: bool, comps: Vec<Rep>, diffs: Vec<RepMorphism>) -> Result<Gcx> {
        let want = if periodic { (2, 2) } else { (WIN_LEN, WIN_LEN - 1) };
        if comps.len() != want.0 || diffs.len() != want.1 {
            return Err(Error::ShapeError("wrong number of components or differentials".into()));
        }
        let x = Gcx { periodic, comps, diffs };
        for k in 0..x.len() {
            if let Some(j) = x.next(k) {
                if !cat.is_morphism(&x.diffs[k], &x.comps[k], &x.comps[j]) {
                    return Err(Error::ShapeError(format!("differential at index {k} is not a morphism")));
                }
            }
        }
        if !x.is_complex() {
            return Err(Error::PreconditionError("differential does not square to zero".into()));
        }
        Ok(x)
    }

    pub(crate) fn new_unchecked(periodic: bool, comps: Vec<Rep>, diffs: Vec<RepMorphism>) -> Gcx {
        Gcx { periodic, comps, diffs }
    }

    pub fn zero(cat: &RepCategory, periodic: bool) -> Gcx {
        let z = cat.zero_rep();
        let n = if periodic { 2 } else { WIN_LEN };
        let d = cat.zero_morphism(&z, &z);
        Gcx { periodic, comps: vec![z; n], diffs: vec![d; if periodic { 2 } else { WIN_LEN - 1 }] }
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[Rep] {
        &self.comps
    }

    pub fn comp(&self, k: usize) -> &Rep {
        &self.comps[k]
    }

    pub fn diff(&self, k: usize) -> Option<&RepMorphism> {
        self.next(k).map(|_| &self.diffs[k])
    }

    pub fn next(&self, k: usize) -> Option<usize> {
        if self.periodic {
            Some(1 - k)
        } else if k + 1 < self.comps.len() {
            Some(k + 1)
        } else {
            None
        }
    }

    pub fn prev(&self, k: usize) -> Option<usize> {
        if self.periodic {
            Some(1 - k)
        } else if k > 0 {
            Some(k - 1)
        } else {
            None
        }
    }

    pub fn is_complex(&self) -> bool {
        (0..self.len()).all(|k| match (self.next(k), self.next(k).and_then(|j| self.next(j))) {
            (Some(j), Some(_)) => self.diffs[j].after(&self.diffs[k]).is_zero(),
            _ => true,
        })
    }

    pub fn total_dim(&self) -> usize {
        self.comps.iter().map(|c| c.total_dim()).sum()
    }

    /// Indices carrying a nonzero component.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| !self.comps[k].is_zero()).collect()
    }

    pub fn direct_sum(&self, cat: &RepCategory, o: &Gcx) -> Gcx {
        let comps = self.comps.iter().zip(&o.comps).map(|(a, b)| cat.direct_sum(a, b)).collect();
        let diffs = self.diffs.iter().zip(&o.diffs).map(|(a, b)| a.direct_sum(b)).collect();
        Gcx { periodic: self.periodic, comps, diffs }
    }

    /// Σ: periodic `(M1, M0, −d1, −d0)`; bounded `(ΣM)^k = M^{k+1}`, `d ↦ −d`.
    pub fn shift(&self, cat: &RepCategory) -> Result<Gcx> {
        if self.periodic {
            return Ok(Gcx {
                periodic: true,
                comps: vec![self.comps[1].clone(), self.comps[0].clone()],
                diffs: vec![self.diffs[1].neg(), self.diffs[0].neg()],
            });
        }
        if !self.comps[0].is_zero() {
            return Err(Error::WindowExceeded(WIN_LO - 1));
        }
        let z = cat.zero_rep();
        let mut comps: Vec<Rep> = self.comps[1..].to_vec();
        comps.push(z.clone());
        let mut diffs: Vec<RepMorphism> = self.diffs[1..].iter().map(|d| d.neg()).collect();
        diffs.push(cat.zero_morphism(&comps[WIN_LEN - 2], &z));
        Ok(Gcx { periodic: false, comps, diffs })
    }

    /// Σ^{-1} for bounded complexes.
    pub fn unshift(&self, cat: &RepCategory) -> Result<Gcx> {
        if self.periodic {
            return self.shift(cat);
        }
        if !self.comps[WIN_LEN - 1].is_zero() {
            return Err(Error::WindowExceeded(index_to_degree(WIN_LEN)));
        }
        let z = cat.zero_rep();
        let mut comps = vec![z.clone()];
        comps.extend_from_slice(&self.comps[..WIN_LEN - 1]);
        let mut diffs = vec![cat.zero_morphism(&z, &comps[1])];
        diffs.extend(self.diffs[..WIN_LEN - 2].iter().map(|d| d.neg()));
        Ok(Gcx { periodic: false, comps, diffs })
    }

    fn same_shape(&self, o: &Gcx) -> Result<()> {
        if self.periodic != o.periodic || self.len() != o.len() {
            return Err(Error::CategoryMismatch);
        }
        Ok(())
    }

    pub fn identity(&self, cat: &RepCategory) -> ChainMap {
        self.comps.iter().map(|c| cat.identity(c)).collect()
    }

    pub fn zero_map(&self, cat: &RepCategory, o: &Gcx) -> ChainMap {
        self.comps.iter().zip(&o.comps).map(|(a, b)| cat.zero_morphism(a, b)).collect()
    }

    /// Basis of chain maps `self -> o`, flattened index by index.
    pub fn chain_map_basis(&self, cat: &RepCategory, o: &Gcx) -> Result<Vec<ChainMap>> {
        self.same_shape(o)?;
        let n = cat.n();
        let p = cat.p();
        let shapes = (0..self.len())
            .flat_map(|k| (0..n).map(move |i| (k, i)))
            .map(|(k, i)| (o.comps[k].dim()[i], self.comps[k].dim()[i]))
            .collect();
        let mut sys = LinSys::new(p, shapes);
        for k in 0..self.len() {
            cat.add_module_eqs(&mut sys, k * n, &self.comps[k], &o.comps[k]);
        }
        for k in 0..self.len() {
            if let Some(j) = self.next(k) {
                for i in 0..n {
                    sys.add_eq(
                        o.comps[j].dim()[i],
                        self.comps[k].dim()[i],
                        &[
                            Term::new(j * n + i, 1, None, Some(self.diffs[k].comp(i))),
                            Term::new(k * n + i, p - 1, Some(o.diffs[k].comp(i)), None),
                        ],
                        None,
                    );
                }
            }
        }
        Ok(sys
            .kernel()
            .iter()
            .map(|v| {
                let blocks = sys.unflatten(v);
                blocks.chunks(n).map(|c| RepMorphism::new(c.to_vec())).collect()
            })
            .collect())
    }

    pub fn chain_hom_dim(&self, cat: &RepCategory, o: &Gcx) -> Result<usize> {
        Ok(self.chain_map_basis(cat, o)?.len())
    }

    /// Flattened null-homotopic maps `self -> o` spanning the homotopy subspace.
    fn homotopy_vectors(&self, cat: &RepCategory, o: &Gcx) -> Result<Vec<Vec<u32>>> {
        let mut out = Vec::new();
        for k in 0..self.len() {
            let Some(j) = self.prev(k) else { continue };
            for h in cat.hom_basis(&self.comps[k], &o.comps[j])? {
                let mut s = self.zero_map(cat, o);
                s[k] = s[k].add(&o.diffs[j].after(&h));
                s[j] = s[j].add(&h.after(&self.diffs[j]));
                out.push(flat(&s));
            }
        }
        Ok(out)
    }

    /// Rebuild a chain map `self -> o` from its flattened coordinates.
    pub(crate) fn unflat(&self, cat: &RepCategory, o: &Gcx, v: &[u32]) -> ChainMap {
        let mut off = 0;
        let mut out = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            let mut blocks = Vec::with_capacity(cat.n());
            for i in 0..cat.n() {
                let (r, c) = (o.comps[k].dim()[i], self.comps[k].dim()[i]);
                blocks.push(FpMatrix::from_vec(cat.p(), r, c, v[off..off + r * c].to_vec()).unwrap());
                off += r * c;
            }
            out.push(RepMorphism::new(blocks));
        }
        out
    }

    /// Basis of the null-homotopic chain maps `self -> o`.
    pub fn null_homotopic_basis(&self, cat: &RepCategory, o: &Gcx) -> Result<Vec<ChainMap>> {
        self.same_shape(o)?;
        let vs = self.homotopy_vectors(cat, o)?;
        if vs.is_empty() {
            return Ok(Vec::new());
        }
        let len = vs[0].len();
        let m = FpMatrix::from_vec(cat.p(), vs.len(), len, vs.concat())?;
        let (r, piv) = m.rref();
        Ok((0..piv.len()).map(|i| self.unflat(cat, o, r.row(i))).collect())
    }

    /// Representatives of Hom_K(self, Σ o) = Ext^1(self, o) for complexes with
    /// projective components, one per class.
    pub fn ext_classes(&self, cat: &RepCategory, o: &Gcx) -> Result<Vec<ChainMap>> {
        let so = o.shift(cat)?;
        let chain = self.chain_map_basis(cat, &so)?;
        let htp = self.homotopy_vectors(cat, &so)?;
        let zero = self.zero_map(cat, &so);
        let len = flat(&zero).len();
        let cand: Vec<Vec<u32>> = chain.iter().map(|c| flat(c)).collect();
        let idx = complement_indices(cat.p(), len, &htp, &cand);
        match checked_size(cat.p(), idx.len()) {
            Some(s) if s <= BUDGET => {}
            _ => return Err(Error::BudgetExceeded(format!("{} extension classes", idx.len()))),
        }
        let reps: Vec<&ChainMap> = idx.iter().map(|&i| &chain[i]).collect();
        Ok(Counter::new(cat.p(), reps.len())
            .map(|c| {
                let mut f = zero.clone();
                for (r, &x) in reps.iter().zip(&c) {
                    if x != 0 {
                        for (fk, rk) in f.iter_mut().zip(r.iter()) {
                            *fk = fk.add(&rk.scale(x));
                        }
                    }
                }
                f
            })
            .collect())
    }

    /// Number of classes in Hom_K(self, Σ o) as a power of q.
    pub fn ext_dim(&self, cat: &RepCategory, o: &Gcx) -> Result<usize> {
        let so = o.shift(cat)?;
        let chain = self.chain_map_basis(cat, &so)?;
        let htp = self.homotopy_vectors(cat, &so)?;
        let len = flat(&self.zero_map(cat, &so)).len();
        let cand: Vec<Vec<u32>> = chain.iter().map(|c| flat(c)).collect();
        Ok(complement_indices(cat.p(), len, &htp, &cand).len())
    }

    /// Middle term of the extension of `self` by `o` given by a chain map
    /// `f: self -> Σ o`: components `o^k ⊕ self^k`, differential
    /// `[[d_o, f], [0, d_self]]`.
    pub fn middle_term(&self, cat: &RepCategory, o: &Gcx, f: &ChainMap) -> Result<Gcx> {
        self.same_shape(o)?;
        let n = cat.n();
        let comps: Vec<Rep> = o.comps.iter().zip(&self.comps).map(|(a, b)| cat.direct_sum(a, b)).collect();
        let mut diffs = Vec::with_capacity(self.diffs.len());
        for k in 0..self.diffs.len() {
            let j = self.next(k).expect("stored differential has a target");
            let blocks = (0..n)
                .map(|i| {
                    let (om, ol) = (o.comps[j].dim()[i], self.comps[j].dim()[i]);
                    let (im, il) = (o.comps[k].dim()[i], self.comps[k].dim()[i]);
                    let mut m = FpMatrix::zeros(cat.p(), om + ol, im + il);
                    m.paste(0, 0, o.diffs[k].comp(i));
                    m.paste(0, im, f[k].comp(i));
                    m.paste(om, im, self.diffs[k].comp(i));
                    m
                })
                .collect();
            diffs.push(RepMorphism::new(blocks));
        }
        let e = Gcx { periodic: self.periodic, comps, diffs };
        if !e.is_complex() {
            return Err(Error::SignConventionBroken);
        }
        Ok(e)
    }

    /// Dimension vectors of `im d_k` for every index.
    pub fn image_dims(&self) -> Vec<Vec<i64>> {
        (0..self.len())
            .map(|k| match self.diff(k) {
                Some(d) => d.ranks().into_iter().map(|r| r as i64).collect(),
                None => vec![0; self.comps[k].dim().len()],
            })
            .collect()
    }

    pub fn homology(&self, cat: &RepCategory) -> Result<Vec<HomologyAt>> {
        (0..self.len()).map(|k| self.homology_at(cat, k)).collect()
    }

    pub fn homology_at(&self, cat: &RepCategory, k: usize) -> Result<HomologyAt> {
        let x = &self.comps[k];
        let (z, z_incl) = match self.diff(k) {
            Some(d) => cat.kernel(d, x)?,
            None => (x.clone(), cat.identity(x)),
        };
        let boundary: Vec<FpMatrix> = match self.prev(k).and_then(|j| self.diff(j)) {
            Some(d) => (0..cat.n())
                .map(|i| {
                    let img = d.comp(i).column_space();
                    let zi = z_incl.comp(i);
                    let cols: Vec<Vec<u32>> = (0..img.cols())
                        .map(|c| zi.solve_linear(&img.col(c)).unwrap().expect("boundaries are cycles"))
                        .collect();
                    FpMatrix::from_cols(cat.p(), zi.cols(), &cols)
                })
                .collect(),
            None => (0..cat.n()).map(|i| FpMatrix::zeros(cat.p(), z.dim()[i], 0)).collect(),
        };
        let (h, proj) = cat.quotient(&z, &boundary)?;
        Ok(HomologyAt { h, z, z_incl, proj })
    }

    pub fn is_acyclic(&self, cat: &RepCategory) -> Result<bool> {
        Ok(self.homology(cat)?.iter().all(|h| h.h.is_zero()))
    }

    /// Subcomplex spanned by column bases per index and vertex.
    pub fn subcomplex(&self, cat: &RepCategory, bases: &[Vec<FpMatrix>]) -> Result<(Gcx, ChainMap)> {
        let mut comps = Vec::with_capacity(self.len());
        let mut incl = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            let (r, i) = cat.subrep(&self.comps[k], &bases[k])?;
            comps.push(r);
            incl.push(i);
        }
        let mut diffs = Vec::with_capacity(self.diffs.len());
        for k in 0..self.diffs.len() {
            let j = self.next(k).unwrap();
            let comps_k: Vec<FpMatrix> = (0..cat.n())
                .map(|i| {
                    let img = self.diffs[k].comp(i).mul(&bases[k][i]);
                    let cols = (0..img.cols())
                        .map(|c| bases[j][i].solve_linear(&img.col(c))?.ok_or(Error::NotASubmodule))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(FpMatrix::from_cols(cat.p(), bases[j][i].cols(), &cols))
                })
                .collect::<Result<_>>()?;
            diffs.push(RepMorphism::new(comps_k));
        }
        Ok((Gcx { periodic: self.periodic, comps, diffs }, incl))
    }

    pub fn is_chain_invertible(f: &ChainMap) -> bool {
        f.iter().all(|m| m.is_invertible())
    }

    /// A chain isomorphism `self -> o`, if any.
    pub fn find_iso(&self, cat: &RepCategory, o: &Gcx) -> Result<Option<ChainMap>> {
        self.same_shape(o)?;
        if self.comps.iter().zip(&o.comps).any(|(a, b)| a.dim() != b.dim()) {
            return Ok(None);
        }
        if self == o {
            return Ok(Some(self.identity(cat)));
        }
        if self.image_dims() != o.image_dims() {
            return Ok(None);
        }
        let h = self.chain_map_basis(cat, o)?;
        let e = self.chain_hom_dim(cat, self)?;
        if h.len() != e || o.chain_hom_dim(cat, self)? != e {
            return Ok(None);
        }
        let zero = self.zero_map(cat, o);
        let mut rng = ChaCha8Rng::seed_from_u64(0x2c2);
        let pick = |c: &[u32]| -> ChainMap {
            let mut f = zero.clone();
            for (b, &x) in h.iter().zip(c) {
                if x != 0 {
                    for (fk, bk) in f.iter_mut().zip(b) {
                        *fk = fk.add(&bk.scale(x));
                    }
                }
            }
            f
        };
        for _ in 0..64 {
            let c: Vec<u32> = (0..h.len()).map(|_| rng.gen_range(0..cat.p())).collect();
            let f = pick(&c);
            if Self::is_chain_invertible(&f) {
                return Ok(Some(f));
            }
        }
        match checked_size(cat.p(), h.len()) {
            Some(s) if s <= BUDGET => {}
            _ => return Err(Error::BudgetExceeded(format!("chain Hom of dimension {}", h.len()))),
        }
        for c in Counter::new(cat.p(), h.len()) {
            let f = pick(&c);
            if Self::is_chain_invertible(&f) {
                return Ok(Some(f));
            }
        }
        Ok(None)
    }

    pub fn is_isomorphic(&self, cat: &RepCategory, o: &Gcx) -> Result<bool> {
        Ok(self.find_iso(cat, o)?.is_some())
    }

    /// Number of chain automorphisms.
    pub fn aut_count(&self, cat: &RepCategory) -> Result<u64> {
        let end = self.chain_map_basis(cat, self)?;
        match checked_size(cat.p(), end.len()) {
            Some(s) if s <= BUDGET => {}
            _ => return Err(Error::BudgetExceeded(format!("chain End of dimension {}", end.len()))),
        }
        let zero = self.zero_map(cat, self);
        let mut n = 0;
        for c in Counter::new(cat.p(), end.len()) {
            let mut f = zero.clone();
            for (b, &x) in end.iter().zip(&c) {
                if x != 0 {
                    for (fk, bk) in f.iter_mut().zip(b) {
                        *fk = fk.add(&bk.scale(x));
                    }
                }
            }
            if Self::is_chain_invertible(&f) {
                n += 1;
            }
        }
        Ok(n)
    }

    /// Fitting split `ker φ^N ⊕ im φ^N` for the first chain endomorphism
    /// that is neither nilpotent nor invertible.
    pub fn fitting_split(&self, cat: &RepCategory) -> Result<Option<(Gcx, Gcx)>> {
        let end = self.chain_map_basis(cat, self)?;
        if end.len() <= 1 {
            return Ok(None);
        }
        let zero = self.zero_map(cat, self);
        let big = self.comps.iter().flat_map(|c| c.dim().iter().copied()).max().unwrap_or(0) as u32;
        let mut visited: u64 = 0;
        let combos = end.iter().cloned().chain(Counter::new(cat.p(), end.len()).map(|c| {
            let mut f = zero.clone();
            for (b, &x) in end.iter().zip(&c) {
                if x != 0 {
                    for (fk, bk) in f.iter_mut().zip(b) {
                        *fk = fk.add(&bk.scale(x));
                    }
                }
            }
            f
        }));
        for phi in combos {
            visited += 1;
            if visited > BUDGET {
                return Err(Error::BudgetExceeded("chain endomorphism scan".into()));
            }
            let pw: ChainMap =
                phi.iter().map(|m| RepMorphism::new(m.comps().iter().map(|c| c.pow(big)).collect())).collect();
            let nil = pw.iter().all(|m| m.is_zero());
            if nil || Self::is_chain_invertible(&pw) {
                continue;
            }
            let kb: Vec<Vec<FpMatrix>> = pw
                .iter()
                .enumerate()
                .map(|(k, m)| {
                    m.comps()
                        .iter()
                        .enumerate()
                        .map(|(i, c)| FpMatrix::from_cols(cat.p(), self.comps[k].dim()[i], &c.kernel_basis()))
                        .collect()
                })
                .collect();
            let ib: Vec<Vec<FpMatrix>> =
                pw.iter().map(|m| m.comps().iter().map(|c| c.column_space()).collect()).collect();
            let (a, _) = self.subcomplex(cat, &kb)?;
            let (b, _) = self.subcomplex(cat, &ib)?;
            return Ok(Some((a, b)));
        }
        Ok(None)
    }

    /// Indecomposable direct summands.
    pub fn indecomposable_summands(&self, cat: &RepCategory) -> Result<Vec<Gcx>> {
        let mut out = Vec::new();
        let mut stack = vec![self.clone()];
        while let Some(x) = stack.pop() {
            if x.total_dim() == 0 {
                continue;
            }
            match x.fitting_split(cat)? {
                Some((a, b)) => {
                    stack.push(a);
                    stack.push(b);
                }
                None => out.push(x),
            }
        }
        Ok(out)
    }

    /// Transport along componentwise automorphisms `g`.
    pub fn base_change(&self, cat: &RepCategory, g: &[RepMorphism]) -> Result<Gcx> {
        let inv: Vec<RepMorphism> =
            g.iter().map(|x| x.inverse().ok_or(Error::DivisionByZero)).collect::<Result<_>>()?;
        let mut comps = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            let gk: Vec<FpMatrix> = g[k].comps().to_vec();
            comps.push(cat.base_change(&self.comps[k], &gk)?);
        }
        let diffs = (0..self.diffs.len())
            .map(|k| {
                let j = self.next(k).unwrap();
                g[j].after(&self.diffs[k]).after(&inv[k])
            })
            .collect();
        Ok(Gcx { periodic: self.periodic, comps, diffs })
    }

    pub fn compose(f: &ChainMap, g: &ChainMap) -> ChainMap {
        f.iter().zip(g).map(|(a, b)| a.after(b)).collect()
    }
}

pub(crate) fn flat(f: &ChainMap) -> Vec<u32> {
    f.iter().flat_map(|m| flatten(m.comps())).collect()
}
