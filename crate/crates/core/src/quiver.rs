//! Quivers, finite-dimensional representations over F_p, and the module
//! category operations built on them.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::ops::Deref;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{FieldSpec, FpMatrix};
use crate::linsys::{flatten, LinSys, Term};

/// Element-count budget for exhaustive scans.
pub const BUDGET: u64 = 1 << 20;

/// Finite acyclic quiver with vertices `0..n` and arrows `(source, target)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quiver {
    n: usize,
    arrows: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct QuiverJson {
    vertices: usize,
    arrows: Vec<[usize; 2]>,
}

impl Quiver {
    /// Build from 1-indexed arrows, rejecting bad indices and cycles.
    pub fn new(n: usize, arrows_one_based: &[(usize, usize)]) -> Result<Self> {
        let mut arrows = Vec::with_capacity(arrows_one_based.len());
        for &(s, t) in arrows_one_based {
            if s == 0 || s > n {
                return Err(Error::IndexError(s));
            }
            if t == 0 || t > n {
                return Err(Error::IndexError(t));
            }
            arrows.push((s - 1, t - 1));
        }
        let q = Quiver { n, arrows };
        if !q.is_acyclic() {
            return Err(Error::Input("quiver has an oriented cycle".into()));
        }
        Ok(q)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: QuiverJson = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
        if j.vertices == 0 {
            return Err(Error::Input("quiver without vertices".into()));
        }
        let arrows: Vec<(usize, usize)> = j.arrows.iter().map(|a| (a[0], a[1])).collect();
        Quiver::new(j.vertices, &arrows)
    }

    pub fn to_json(&self) -> String {
        let j = QuiverJson {
            vertices: self.n,
            arrows: self.arrows.iter().map(|&(s, t)| [s + 1, t + 1]).collect(),
        };
        serde_json::to_string(&j).expect("serializable")
    }

    /// Linearly oriented A_n: 1 -> 2 -> ... -> n.
    pub fn linear_a(n: usize) -> Self {
        let arrows: Vec<(usize, usize)> = (1..n).map(|i| (i, i + 1)).collect();
        Quiver::new(n, &arrows).expect("A_n is acyclic")
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    /// Arrows as 0-indexed `(source, target)` pairs.
    pub fn arrows(&self) -> &[(usize, usize)] {
        &self.arrows
    }

    fn is_acyclic(&self) -> bool {
        let mut indeg = vec![0usize; self.n];
        for &(_, t) in &self.arrows {
            indeg[t] += 1;
        }
        let mut stack: Vec<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &(s, t) in &self.arrows {
                if s == v {
                    indeg[t] -= 1;
                    if indeg[t] == 0 {
                        stack.push(t);
                    }
                }
            }
        }
        seen == self.n
    }

    pub fn is_sink(&self, i: usize) -> bool {
        self.arrows.iter().all(|&(s, _)| s != i)
    }

    pub fn is_source(&self, i: usize) -> bool {
        self.arrows.iter().all(|&(_, t)| t != i)
    }

    /// Reverse every arrow incident to `i`, keeping arrow positions.
    pub fn reflect_at(&self, i: usize) -> Quiver {
        let arrows = self
            .arrows
            .iter()
            .map(|&(s, t)| if s == i || t == i { (t, s) } else { (s, t) })
            .collect();
        Quiver { n: self.n, arrows }
    }

    /// Number of arrows between `i` and `j` in either direction.
    pub fn edges_between(&self, i: usize, j: usize) -> usize {
        self.arrows.iter().filter(|&&(s, t)| (s, t) == (i, j) || (s, t) == (j, i)).count()
    }

    /// Underlying graph is a disjoint union of simply-laced Dynkin diagrams.
    pub fn is_dynkin(&self) -> bool {
        let n = self.n;
        let mut adj = vec![Vec::new(); n];
        for &(s, t) in &self.arrows {
            if s == t || self.edges_between(s, t) > 1 {
                return false;
            }
            adj[s].push(t);
            adj[t].push(s);
        }
        let mut comp = vec![usize::MAX; n];
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut members = vec![start];
            comp[start] = start;
            let mut k = 0;
            while k < members.len() {
                for &w in &adj[members[k]] {
                    if comp[w] == usize::MAX {
                        comp[w] = start;
                        members.push(w);
                    }
                }
                k += 1;
            }
            let edges: usize = members.iter().map(|&v| adj[v].len()).sum::<usize>() / 2;
            if edges + 1 != members.len() {
                return false;
            }
            let branch: Vec<usize> = members.iter().copied().filter(|&v| adj[v].len() >= 3).collect();
            if branch.len() > 1 || members.iter().any(|&v| adj[v].len() > 3) {
                return false;
            }
            if let Some(&b) = branch.first() {
                let mut arms = Vec::new();
                for &w in &adj[b] {
                    let (mut prev, mut cur, mut len) = (b, w, 1usize);
                    while let Some(&nx) = adj[cur].iter().find(|&&x| x != prev) {
                        prev = cur;
                        cur = nx;
                        len += 1;
                    }
                    arms.push(len + 1);
                }
                arms.sort_unstable();
                let (p, q, r) = (arms[0], arms[1], arms[2]);
                if q * r + p * r + p * q <= p * q * r {
                    return false;
                }
            }
        }
        true
    }

    /// ⟨d, e⟩ = Σ d_i e_i − Σ_arrows d_s e_t.
    pub fn euler_form_int(&self, d: &[i64], e: &[i64]) -> i64 {
        let diag: i64 = d.iter().zip(e).map(|(a, b)| a * b).sum();
        let off: i64 = self.arrows.iter().map(|&(s, t)| d[s] * e[t]).sum();
        diag - off
    }

    /// All paths of positive length starting at `i`, as arrow sequences.
    fn paths_from(&self, i: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack: Vec<Vec<usize>> = self
            .arrows
            .iter()
            .enumerate()
            .filter(|(_, &(s, _))| s == i)
            .map(|(a, _)| vec![a])
            .collect();
        while let Some(p) = stack.pop() {
            let end = self.arrows[*p.last().unwrap()].1;
            for (a, &(s, _)) in self.arrows.iter().enumerate() {
                if s == end {
                    let mut np = p.clone();
                    np.push(a);
                    stack.push(np);
                }
            }
            out.push(p);
        }
        out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        out
    }

    fn path_end(&self, start: usize, p: &[usize]) -> usize {
        p.last().map_or(start, |&a| self.arrows[a].1)
    }

    fn fingerprint(&self, p: u32) -> u64 {
        let mut h = DefaultHasher::new();
        (self.n, &self.arrows, p).hash(&mut h);
        h.finish()
    }
}

/// Representation: a vector space `F_p^{dim[i]}` per vertex and a
/// `dim[t] x dim[s]` matrix per arrow.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rep {
    tag: u64,
    dim: Vec<usize>,
    maps: Vec<FpMatrix>,
}

impl Rep {
    pub fn dim(&self) -> &[usize] {
        &self.dim
    }

    pub fn dim_i64(&self) -> Vec<i64> {
        self.dim.iter().map(|&x| x as i64).collect()
    }

    pub fn maps(&self) -> &[FpMatrix] {
        &self.maps
    }

    pub fn total_dim(&self) -> usize {
        self.dim.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }
}

/// Canonical representative of an isomorphism class: the smallest member
/// in the order (dimension vector, arrow matrices row-major).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IsoClassKey(Arc<Rep>);

impl Deref for IsoClassKey {
    type Target = Rep;
    fn deref(&self) -> &Rep {
        &self.0
    }
}

impl IsoClassKey {
    pub fn rep(&self) -> &Rep {
        &self.0
    }
}

/// Morphism of representations: one matrix per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RepMorphism {
    comps: Vec<FpMatrix>,
}

impl RepMorphism {
    pub fn new(comps: Vec<FpMatrix>) -> Self {
        RepMorphism { comps }
    }

    pub fn comps(&self) -> &[FpMatrix] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &FpMatrix {
        &self.comps[i]
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &RepMorphism) -> RepMorphism {
        RepMorphism { comps: self.comps.iter().zip(&f.comps).map(|(g, f)| g.mul(f)).collect() }
    }

    pub fn add(&self, o: &RepMorphism) -> RepMorphism {
        RepMorphism { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &RepMorphism) -> RepMorphism {
        RepMorphism { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, c: u32) -> RepMorphism {
        RepMorphism { comps: self.comps.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn neg(&self) -> RepMorphism {
        RepMorphism { comps: self.comps.iter().map(|a| a.neg()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|m| m.is_zero())
    }

    pub fn is_invertible(&self) -> bool {
        self.comps.iter().all(|m| m.is_invertible())
    }

    pub fn inverse(&self) -> Option<RepMorphism> {
        self.comps.iter().map(|m| m.inverse()).collect::<Option<Vec<_>>>().map(RepMorphism::new)
    }

    /// Block diagonal `f ⊕ g`.
    pub fn direct_sum(&self, g: &RepMorphism) -> RepMorphism {
        RepMorphism { comps: self.comps.iter().zip(&g.comps).map(|(a, b)| a.block_diag(b)).collect() }
    }

    /// `[f g]` out of a direct sum.
    pub fn hstack(&self, g: &RepMorphism) -> RepMorphism {
        RepMorphism { comps: self.comps.iter().zip(&g.comps).map(|(a, b)| a.hstack(b)).collect() }
    }

    /// `[f; g]` into a direct sum.
    pub fn vstack(&self, g: &RepMorphism) -> RepMorphism {
        RepMorphism { comps: self.comps.iter().zip(&g.comps).map(|(a, b)| a.vstack(b)).collect() }
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.comps.iter().map(|m| m.rank()).collect()
    }
}

/// Subrepresentation given by one column-basis matrix per vertex.
pub type SubspaceFamily = Vec<FpMatrix>;

/// Minimal projective resolution `0 -> P1 -> P0 -> A -> 0`.
#[derive(Debug, Clone)]
pub struct ProjRes {
    pub p1: Rep,
    pub p0: Rep,
    pub incl: RepMorphism,
    pub cover: RepMorphism,
    /// Multiplicity of each indecomposable projective in `P0`.
    pub top: Vec<usize>,
}

/// Odometer over `F_q^n` in lexicographic order (last coordinate fastest).
pub(crate) struct Counter {
    q: u32,
    cur: Vec<u32>,
    done: bool,
}

impl Counter {
    pub fn new(q: u32, n: usize) -> Self {
        Counter { q, cur: vec![0; n], done: false }
    }
}

impl Iterator for Counter {
    type Item = Vec<u32>;
    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut k = self.cur.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.cur[k] += 1;
            if self.cur[k] < self.q {
                break;
            }
            self.cur[k] = 0;
        }
        Some(out)
    }
}

pub(crate) fn checked_size(q: u32, n: usize) -> Option<u64> {
    let mut s: u64 = 1;
    for _ in 0..n {
        s = s.checked_mul(q as u64)?;
        if s > u64::MAX / 128 {
            return None;
        }
    }
    Some(s)
}

/// Linear combination `Σ c_k basis_k` of morphisms.
pub(crate) fn combine(basis: &[RepMorphism], coeffs: &[u32], zero: &RepMorphism) -> RepMorphism {
    let mut acc = zero.clone();
    for (b, &c) in basis.iter().zip(coeffs) {
        if c != 0 {
            acc = acc.add(&b.scale(c));
        }
    }
    acc
}

/// Indices of `candidates` that extend a basis of span(`sub`) to a basis
/// of span(`sub` ∪ `candidates`).
pub(crate) fn complement_indices(p: u32, len: usize, sub: &[Vec<u32>], candidates: &[Vec<u32>]) -> Vec<usize> {
    let mut acc: Vec<Vec<u32>> = sub.to_vec();
    let mut rank = FpMatrix::from_cols(p, len, &acc).rank();
    let mut out = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        acc.push(c.clone());
        let r = FpMatrix::from_cols(p, len, &acc).rank();
        if r > rank {
            rank = r;
            out.push(i);
        } else {
            acc.pop();
        }
    }
    out
}

/// Row-reduced basis (as rows) of the column space of `basis`, with pivots.
pub(crate) fn row_basis(m: &FpMatrix) -> (FpMatrix, Vec<usize>) {
    let (r, piv) = m.transpose().rref();
    let k = piv.len();
    (r.submatrix(0, k, 0, r.cols()), piv)
}

/// Reduce `v` modulo the row space given in reduced echelon form.
pub(crate) fn reduce_mod(rows: &FpMatrix, piv: &[usize], v: &[u32], p: u32) -> Vec<u32> {
    let mut x = v.to_vec();
    for (i, &c) in piv.iter().enumerate() {
        let f = x[c];
        if f != 0 {
            for j in 0..x.len() {
                x[j] = (x[j] + p - f * rows.get(i, j) % p) % p;
            }
        }
    }
    x
}

/// Module category rep(Q) over F_p together with its caches.
#[derive(Debug)]
pub struct RepCategory {
    quiver: Quiver,
    field: FieldSpec,
    tag: u64,
    proj_paths: Vec<Vec<Vec<Vec<usize>>>>,
    registry: RwLock<HashMap<Rep, IsoClassKey>>,
    known: RwLock<HashMap<Vec<usize>, Vec<(Vec<usize>, IsoClassKey)>>>,
    complete: RwLock<HashMap<Vec<usize>, Vec<IsoClassKey>>>,
}

pub type Cat = Arc<RepCategory>;

impl RepCategory {
    pub fn new(quiver: Quiver, field: FieldSpec) -> Cat {
        let tag = quiver.fingerprint(field.p());
        let proj_paths = (0..quiver.n)
            .map(|i| {
                let mut per = vec![Vec::new(); quiver.n];
                per[i].push(Vec::new());
                for p in quiver.paths_from(i) {
                    per[quiver.path_end(i, &p)].push(p);
                }
                per
            })
            .collect();
        Arc::new(RepCategory {
            quiver,
            field,
            tag,
            proj_paths,
            registry: RwLock::new(HashMap::new()),
            known: RwLock::new(HashMap::new()),
            complete: RwLock::new(HashMap::new()),
        })
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn n(&self) -> usize {
        self.quiver.n
    }

    fn check(&self, m: &Rep) -> Result<()> {
        if m.tag != self.tag {
            return Err(Error::CategoryMismatch);
        }
        Ok(())
    }

    pub fn owns(&self, m: &Rep) -> bool {
        m.tag == self.tag
    }

    /// Build a representation, validating the matrix shapes.
    pub fn rep(&self, dim: Vec<usize>, maps: Vec<FpMatrix>) -> Result<Rep> {
        if dim.len() != self.quiver.n || maps.len() != self.quiver.arrows.len() {
            return Err(Error::ShapeError("dimension vector or arrow count mismatch".into()));
        }
        for (m, &(s, t)) in maps.iter().zip(&self.quiver.arrows) {
            if m.rows() != dim[t] || m.cols() != dim[s] || m.p() != self.p() {
                return Err(Error::ShapeError(format!(
                    "arrow {}->{} needs a {}x{} matrix",
                    s + 1,
                    t + 1,
                    dim[t],
                    dim[s]
                )));
            }
        }
        Ok(Rep { tag: self.tag, dim, maps })
    }

    /// Representation from integer matrices, one per arrow.
    pub fn rep_from_ints(&self, dim: Vec<usize>, maps: &[Vec<Vec<i64>>]) -> Result<Rep> {
        let p = self.p();
        let ms = maps
            .iter()
            .zip(&self.quiver.arrows)
            .map(|(m, &(s, t))| {
                if m.is_empty() {
                    Ok(FpMatrix::zeros(p, dim[t], dim[s]))
                } else {
                    FpMatrix::from_rows(p, m)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        self.rep(dim, ms)
    }

    pub fn zero_rep(&self) -> Rep {
        self.rep_of_dim_with(&vec![0; self.n()], |_, _| 0)
    }

    fn rep_of_dim_with(&self, dim: &[usize], mut f: impl FnMut(usize, usize) -> u32) -> Rep {
        let p = self.p();
        let maps = self
            .quiver
            .arrows
            .iter()
            .enumerate()
            .map(|(a, &(s, t))| {
                let mut m = FpMatrix::zeros(p, dim[t], dim[s]);
                for i in 0..dim[t] * dim[s] {
                    m.set(i / dim[s], i % dim[s], f(a, i));
                }
                m
            })
            .collect();
        Rep { tag: self.tag, dim: dim.to_vec(), maps }
    }

    pub fn simple(&self, i: usize) -> Result<Rep> {
        if i >= self.n() {
            return Err(Error::IndexError(i));
        }
        let mut d = vec![0; self.n()];
        d[i] = 1;
        Ok(self.rep_of_dim_with(&d, |_, _| 0))
    }

    /// Indecomposable projective P_i with basis the paths starting at `i`.
    pub fn projective(&self, i: usize) -> Result<Rep> {
        if i >= self.n() {
            return Err(Error::IndexError(i));
        }
        let paths = &self.proj_paths[i];
        let dim: Vec<usize> = paths.iter().map(|v| v.len()).collect();
        let p = self.p();
        let maps = self
            .quiver
            .arrows
            .iter()
            .enumerate()
            .map(|(a, &(s, t))| {
                let mut m = FpMatrix::zeros(p, dim[t], dim[s]);
                for (col, path) in paths[s].iter().enumerate() {
                    let mut ext = path.clone();
                    ext.push(a);
                    let row = paths[t].iter().position(|x| *x == ext).expect("extended path exists");
                    m.set(row, col, 1);
                }
                m
            })
            .collect();
        Ok(Rep { tag: self.tag, dim, maps })
    }

    pub fn projective_dims(&self) -> Vec<Vec<i64>> {
        (0..self.n()).map(|i| self.proj_paths[i].iter().map(|v| v.len() as i64).collect()).collect()
    }

    pub fn direct_sum(&self, a: &Rep, b: &Rep) -> Rep {
        let dim = a.dim.iter().zip(&b.dim).map(|(x, y)| x + y).collect();
        let maps = a.maps.iter().zip(&b.maps).map(|(x, y)| x.block_diag(y)).collect();
        Rep { tag: self.tag, dim, maps }
    }

    pub fn direct_sum_all<'a>(&self, reps: impl IntoIterator<Item = &'a Rep>) -> Rep {
        reps.into_iter().fold(self.zero_rep(), |acc, r| self.direct_sum(&acc, r))
    }

    pub fn identity(&self, m: &Rep) -> RepMorphism {
        RepMorphism::new(m.dim.iter().map(|&d| FpMatrix::identity(self.p(), d)).collect())
    }

    pub fn zero_morphism(&self, m: &Rep, n: &Rep) -> RepMorphism {
        RepMorphism::new(m.dim.iter().zip(&n.dim).map(|(&a, &b)| FpMatrix::zeros(self.p(), b, a)).collect())
    }

    /// Canonical inclusions and projections of `a ⊕ b`.
    pub fn sum_injections(&self, a: &Rep, b: &Rep) -> (RepMorphism, RepMorphism) {
        let ia = self.identity(a).vstack(&self.zero_morphism(a, b));
        let ib = self.zero_morphism(b, a).vstack(&self.identity(b));
        (ia, ib)
    }

    pub fn sum_projections(&self, a: &Rep, b: &Rep) -> (RepMorphism, RepMorphism) {
        let pa = self.identity(a).hstack(&self.zero_morphism(b, a));
        let pb = self.zero_morphism(a, b).hstack(&self.identity(b));
        (pa, pb)
    }

    pub fn is_morphism(&self, f: &RepMorphism, m: &Rep, n: &Rep) -> bool {
        if f.comps.len() != self.n() {
            return false;
        }
        for (i, c) in f.comps.iter().enumerate() {
            if c.rows() != n.dim[i] || c.cols() != m.dim[i] {
                return false;
            }
        }
        self.quiver
            .arrows
            .iter()
            .enumerate()
            .all(|(a, &(s, t))| f.comps[t].mul(&m.maps[a]) == n.maps[a].mul(&f.comps[s]))
    }

    /// Add the intertwining equations for an unknown morphism `m -> n`
    /// whose vertex blocks start at `first_block`.
    pub(crate) fn add_module_eqs(&self, sys: &mut LinSys, first_block: usize, m: &Rep, n: &Rep) {
        let p = self.p();
        for (a, &(s, t)) in self.quiver.arrows.iter().enumerate() {
            sys.add_eq(
                n.dim[t],
                m.dim[s],
                &[
                    Term::new(first_block + t, 1, None, Some(&m.maps[a])),
                    Term::new(first_block + s, p - 1, Some(&n.maps[a]), None),
                ],
                None,
            );
        }
    }

    /// Basis of Hom(M, N), from the echelonized null space.
    pub fn hom_basis(&self, m: &Rep, n: &Rep) -> Result<Vec<RepMorphism>> {
        self.check(m)?;
        self.check(n)?;
        let shapes = (0..self.n()).map(|i| (n.dim[i], m.dim[i])).collect();
        let mut sys = LinSys::new(self.p(), shapes);
        self.add_module_eqs(&mut sys, 0, m, n);
        Ok(sys.kernel().iter().map(|v| RepMorphism::new(sys.unflatten(v))).collect())
    }

    pub fn hom_dim(&self, m: &Rep, n: &Rep) -> Result<usize> {
        Ok(self.hom_basis(m, n)?.len())
    }

    pub fn euler_form(&self, m: &Rep, n: &Rep) -> i64 {
        self.quiver.euler_form_int(&m.dim_i64(), &n.dim_i64())
    }

    /// dim Ext^1(M, N) = dim Hom(M, N) − ⟨M, N⟩.
    pub fn ext1_dim(&self, m: &Rep, n: &Rep) -> Result<usize> {
        let h = self.hom_dim(m, n)? as i64;
        let e = h - self.euler_form(m, n);
        debug_assert_eq!(Some(e as usize), self.ext1_dim_via_resolution(m, n).ok());
        Ok(e as usize)
    }

    /// dim coker(Hom(P0, N) -> Hom(P1, N)) for the minimal resolution of M.
    pub fn ext1_dim_via_resolution(&self, m: &Rep, n: &Rep) -> Result<usize> {
        let res = self.min_proj_resolution(m)?;
        let h1 = self.hom_basis(&res.p1, n)?;
        let h0 = self.hom_basis(&res.p0, n)?;
        let cols: Vec<Vec<u32>> = h0.iter().map(|g| flatten(&g.after(&res.incl).comps)).collect();
        let len = flatten(&self.zero_morphism(&res.p1, n).comps).len();
        let rank = FpMatrix::from_cols(self.p(), len, &cols).rank();
        Ok(h1.len() - rank)
    }

    /// Subrepresentation spanned by the given column bases.
    pub fn subrep(&self, m: &Rep, basis: &[FpMatrix]) -> Result<(Rep, RepMorphism)> {
        let p = self.p();
        let dim: Vec<usize> = basis.iter().map(|b| b.cols()).collect();
        let mut maps = Vec::with_capacity(m.maps.len());
        for (a, &(s, t)) in self.quiver.arrows.iter().enumerate() {
            let img = m.maps[a].mul(&basis[s]);
            let mut y = FpMatrix::zeros(p, dim[t], dim[s]);
            for c in 0..dim[s] {
                let sol = basis[t].solve_linear(&img.col(c))?.ok_or(Error::NotASubmodule)?;
                for (r, x) in sol.into_iter().enumerate() {
                    y.set(r, c, x);
                }
            }
            maps.push(y);
        }
        Ok((Rep { tag: self.tag, dim, maps }, RepMorphism::new(basis.to_vec())))
    }

    /// Quotient by a subrepresentation, with the projection.
    pub fn quotient(&self, m: &Rep, basis: &[FpMatrix]) -> Result<(Rep, RepMorphism)> {
        self.check(m)?;
        let p = self.p();
        let mut proj = Vec::with_capacity(self.n());
        let mut sect = Vec::with_capacity(self.n());
        for (i, b) in basis.iter().enumerate() {
            let n = m.dim[i];
            let (rows, piv) = row_basis(b);
            let free: Vec<usize> = (0..n).filter(|c| !piv.contains(c)).collect();
            let mut pm = FpMatrix::zeros(p, free.len(), n);
            let mut sm = FpMatrix::zeros(p, n, free.len());
            for j in 0..n {
                let mut e = vec![0; n];
                e[j] = 1;
                let r = reduce_mod(&rows, &piv, &e, p);
                for (k, &f) in free.iter().enumerate() {
                    pm.set(k, j, r[f]);
                }
            }
            for (k, &f) in free.iter().enumerate() {
                sm.set(f, k, 1);
            }
            proj.push(pm);
            sect.push(sm);
        }
        let mut maps = Vec::with_capacity(m.maps.len());
        for (a, &(s, t)) in self.quiver.arrows.iter().enumerate() {
            if !proj[t].mul(&m.maps[a]).mul(&basis[s]).is_zero() {
                return Err(Error::NotASubmodule);
            }
            maps.push(proj[t].mul(&m.maps[a]).mul(&sect[s]));
        }
        let dim = proj.iter().map(|x| x.rows()).collect();
        Ok((Rep { tag: self.tag, dim, maps }, RepMorphism::new(proj)))
    }

    pub fn kernel(&self, f: &RepMorphism, m: &Rep) -> Result<(Rep, RepMorphism)> {
        let basis: Vec<FpMatrix> =
            f.comps.iter().enumerate().map(|(i, c)| FpMatrix::from_cols(self.p(), m.dim[i], &c.kernel_basis())).collect();
        self.subrep(m, &basis)
    }

    pub fn image(&self, f: &RepMorphism, n: &Rep) -> Result<(Rep, RepMorphism)> {
        let basis: Vec<FpMatrix> = f.comps.iter().map(|c| c.column_space()).collect();
        self.subrep(n, &basis)
    }

    pub fn cokernel(&self, f: &RepMorphism, n: &Rep) -> Result<(Rep, RepMorphism)> {
        let basis: Vec<FpMatrix> = f.comps.iter().map(|c| c.column_space()).collect();
        self.quotient(n, &basis)
    }

    /// Map `X_p` of a path (arrows in order of traversal).
    fn path_map(&self, m: &Rep, start: usize, path: &[usize]) -> FpMatrix {
        let mut acc = FpMatrix::identity(self.p(), m.dim[start]);
        for &a in path {
            acc = m.maps[a].mul(&acc);
        }
        acc
    }

    /// The morphism P_i -> M sending the trivial path to `x ∈ M_i`.
    pub fn map_from_projective(&self, i: usize, m: &Rep, x: &[u32]) -> RepMorphism {
        let comps = (0..self.n())
            .map(|j| {
                let cols: Vec<Vec<u32>> =
                    self.proj_paths[i][j].iter().map(|path| self.path_map(m, i, path).mul_vec(x)).collect();
                FpMatrix::from_cols(self.p(), m.dim[j], &cols)
            })
            .collect();
        RepMorphism::new(comps)
    }

    /// Column bases of the radical Σ_a im X_a and the top multiplicities.
    fn radical(&self, m: &Rep) -> Vec<FpMatrix> {
        (0..self.n())
            .map(|j| {
                let mut acc = FpMatrix::zeros(self.p(), m.dim[j], 0);
                for (a, &(_, t)) in self.quiver.arrows.iter().enumerate() {
                    if t == j {
                        acc = acc.hstack(&m.maps[a]);
                    }
                }
                acc.column_space()
            })
            .collect()
    }

    pub fn top_dims(&self, m: &Rep) -> Vec<usize> {
        self.radical(m).iter().enumerate().map(|(j, r)| m.dim[j] - r.cols()).collect()
    }

    /// Dimension vectors of (P1, P0) in the minimal resolution.
    pub fn resolution_dims(&self, m: &Rep) -> (Vec<i64>, Vec<i64>) {
        let top = self.top_dims(m);
        let pd = self.projective_dims();
        let mut p0 = vec![0i64; self.n()];
        for (i, &t) in top.iter().enumerate() {
            for j in 0..self.n() {
                p0[j] += t as i64 * pd[i][j];
            }
        }
        let p1 = p0.iter().zip(m.dim_i64()).map(|(a, b)| a - b).collect();
        (p1, p0)
    }

    pub fn min_proj_resolution(&self, a: &Rep) -> Result<ProjRes> {
        self.check(a)?;
        let rad = self.radical(a);
        let mut p0 = self.zero_rep();
        let mut cover: Option<RepMorphism> = None;
        let mut top = vec![0; self.n()];
        for j in 0..self.n() {
            let (_, piv) = row_basis(&rad[j]);
            for k in (0..a.dim[j]).filter(|k| !piv.contains(k)) {
                let mut x = vec![0; a.dim[j]];
                x[k] = 1;
                let g = self.map_from_projective(j, a, &x);
                let pj = self.projective(j)?;
                cover = Some(match cover {
                    None => g,
                    Some(c) => c.hstack(&g),
                });
                p0 = self.direct_sum(&p0, &pj);
                top[j] += 1;
            }
        }
        let cover = cover.unwrap_or_else(|| self.zero_morphism(&p0, a));
        let (p1, incl) = self.kernel(&cover, &p0)?;
        Ok(ProjRes { p1, p0, incl, cover, top })
    }

    /// Ranks of all path maps: an isomorphism invariant.
    fn rank_signature(&self, m: &Rep) -> Vec<usize> {
        let mut sig = m.dim.clone();
        for i in 0..self.n() {
            for j in 0..self.n() {
                for path in &self.proj_paths[i][j] {
                    if !path.is_empty() {
                        sig.push(self.path_map(m, i, path).rank());
                    }
                }
            }
        }
        sig
    }

    /// An isomorphism `m -> n` if one exists.
    pub fn find_iso(&self, m: &Rep, n: &Rep) -> Result<Option<RepMorphism>> {
        self.check(m)?;
        self.check(n)?;
        if m.dim != n.dim {
            return Ok(None);
        }
        if m == n {
            return Ok(Some(self.identity(m)));
        }
        if self.rank_signature(m) != self.rank_signature(n) {
            return Ok(None);
        }
        let h = self.hom_basis(m, n)?;
        let e = self.hom_dim(m, m)?;
        if h.len() != e || self.hom_dim(n, m)? != e || self.hom_dim(n, n)? != e {
            return Ok(None);
        }
        let zero = self.zero_morphism(m, n);
        let q = self.p();
        let mut rng = ChaCha8Rng::seed_from_u64(0x1505);
        for _ in 0..64 {
            let c: Vec<u32> = (0..h.len()).map(|_| rng.gen_range(0..q)).collect();
            let f = combine(&h, &c, &zero);
            if f.is_invertible() {
                return Ok(Some(f));
            }
        }
        match checked_size(q, h.len()) {
            Some(s) if s <= BUDGET => {}
            _ => return Err(Error::BudgetExceeded(format!("Hom space of dimension {}", h.len()))),
        }
        for c in Counter::new(q, h.len()) {
            let f = combine(&h, &c, &zero);
            if f.is_invertible() {
                return Ok(Some(f));
            }
        }
        Ok(None)
    }

    pub fn is_isomorphic(&self, m: &Rep, n: &Rep) -> Result<bool> {
        Ok(self.find_iso(m, n)?.is_some())
    }

    /// Every representation of dimension vector `d`, in key order.
    pub(crate) fn reps_of_dim(&self, d: &[usize]) -> Result<impl Iterator<Item = Rep> + '_> {
        let entries: usize = self.quiver.arrows.iter().map(|&(s, t)| d[s] * d[t]).sum();
        match checked_size(self.p(), entries) {
            Some(s) if s <= BUDGET => {}
            _ => return Err(Error::BudgetExceeded(format!("{entries} free matrix entries"))),
        }
        let d = d.to_vec();
        Ok(Counter::new(self.p(), entries).map(move |c| {
            let mut it = c.into_iter();
            let mut vals: Vec<Vec<u32>> = Vec::new();
            for &(s, t) in &self.quiver.arrows {
                vals.push(it.by_ref().take(d[s] * d[t]).collect());
            }
            self.rep_of_dim_with(&d, |a, i| vals[a][i])
        }))
    }

    fn remember(&self, m: &Rep, key: &IsoClassKey, sig: Vec<usize>) {
        self.registry.write().unwrap().entry(m.clone()).or_insert_with(|| key.clone());
        let mut known = self.known.write().unwrap();
        let list = known.entry(m.dim.clone()).or_default();
        if !list.iter().any(|(_, k)| k == key) {
            list.push((sig, key.clone()));
            list.sort_by(|a, b| a.1.cmp(&b.1));
        }
    }

    /// Canonical key of the isomorphism class of `m`.
    pub fn canonical(&self, m: &Rep) -> Result<IsoClassKey> {
        self.check(m)?;
        if let Some(k) = self.registry.read().unwrap().get(m) {
            return Ok(k.clone());
        }
        let sig = self.rank_signature(m);
        let known: Vec<(Vec<usize>, IsoClassKey)> =
            self.known.read().unwrap().get(&m.dim).cloned().unwrap_or_default();
        for (s, k) in &known {
            if *s == sig && self.is_isomorphic(m, k)? {
                self.remember(m, k, sig);
                return Ok(k.clone());
            }
        }
        for cand in self.reps_of_dim(&m.dim)? {
            if self.rank_signature(&cand) == sig && self.is_isomorphic(&cand, m)? {
                let key = IsoClassKey(Arc::new(cand));
                self.remember(key.rep(), &key, sig.clone());
                self.remember(m, &key, sig);
                return Ok(key);
            }
        }
        unreachable!("m itself is a candidate")
    }

    /// All isomorphism classes of dimension vector `d`, sorted.
    pub fn iso_classes(&self, d: &[usize]) -> Result<Vec<IsoClassKey>> {
        if let Some(v) = self.complete.read().unwrap().get(d) {
            return Ok(v.clone());
        }
        let mut found: Vec<(Vec<usize>, IsoClassKey)> = Vec::new();
        for r in self.reps_of_dim(d)? {
            let sig = self.rank_signature(&r);
            let mut hit = None;
            for (s, k) in &found {
                if *s == sig && self.is_isomorphic(&r, k)? {
                    hit = Some(k.clone());
                    break;
                }
            }
            let key = match hit {
                Some(k) => k,
                None => {
                    let k = IsoClassKey(Arc::new(r.clone()));
                    found.push((sig.clone(), k.clone()));
                    k
                }
            };
            self.remember(&r, &key, sig);
        }
        let mut keys: Vec<IsoClassKey> = found.into_iter().map(|(_, k)| k).collect();
        keys.sort();
        self.complete.write().unwrap().insert(d.to_vec(), keys.clone());
        Ok(keys)
    }

    /// All dimension vectors with total dimension at most `bound`.
    pub fn dim_vectors_up_to(&self, bound: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..self.n() {
            out = out
                .into_iter()
                .flat_map(|v: Vec<usize>| {
                    let used: usize = v.iter().sum();
                    (0..=bound - used).map(move |k| {
                        let mut w = v.clone();
                        w.push(k);
                        w
                    })
                })
                .collect();
        }
        out.sort_by_key(|v| (v.iter().sum::<usize>(), v.clone()));
        out
    }

    /// Fitting split `m ≅ ker φ^N ⊕ im φ^N` for the first endomorphism φ
    /// that is neither nilpotent nor invertible.
    fn fitting_split(&self, m: &Rep) -> Result<Option<((Rep, RepMorphism), (Rep, RepMorphism))>> {
        let end = self.hom_basis(m, m)?;
        if end.len() <= 1 {
            return Ok(None);
        }
        let zero = self.zero_morphism(m, m);
        let big = m.dim.iter().copied().max().unwrap_or(0) as u32;
        let mut visited: u64 = 0;
        let candidates = end.iter().map(|b| (*b).clone()).chain(Counter::new(self.p(), end.len()).map(|c| combine(&end, &c, &zero)));
        for phi in candidates {
            visited += 1;
            if visited > BUDGET {
                return Err(Error::BudgetExceeded("endomorphism scan".into()));
            }
            let pw = RepMorphism::new(phi.comps.iter().map(|c| c.pow(big)).collect());
            if pw.is_zero() || pw.is_invertible() {
                continue;
            }
            let k = self.kernel(&pw, m)?;
            let i = self.image(&pw, m)?;
            return Ok(Some((k, i)));
        }
        Ok(None)
    }

    /// Indecomposable summands (with multiplicity) as sorted keys.
    pub fn decompose(&self, m: &Rep) -> Result<Vec<IsoClassKey>> {
        self.check(m)?;
        if m.total_dim() > 12 {
            return Err(Error::PreconditionError("decompose needs total dimension <= 12".into()));
        }
        let mut out = Vec::new();
        let mut stack = vec![m.clone()];
        while let Some(x) = stack.pop() {
            if x.is_zero() {
                continue;
            }
            match self.fitting_split(&x)? {
                Some(((a, _), (b, _))) => {
                    stack.push(a);
                    stack.push(b);
                }
                None => out.push(self.canonical(&x)?),
            }
        }
        out.sort();
        Ok(out)
    }

    /// Direct summands of `m` as subrepresentations with their inclusions.
    pub fn summands(&self, m: &Rep) -> Result<Vec<(Rep, RepMorphism)>> {
        let mut out = Vec::new();
        let mut stack = vec![(m.clone(), self.identity(m))];
        while let Some((x, inc)) = stack.pop() {
            if x.is_zero() {
                continue;
            }
            match self.fitting_split(&x)? {
                Some(((a, ia), (b, ib))) => {
                    stack.push((a, inc.after(&ia)));
                    stack.push((b, inc.after(&ib)));
                }
                None => out.push((x, inc)),
            }
        }
        Ok(out)
    }

    /// Number of invertible elements of End(m).
    pub fn aut_count(&self, m: &Rep) -> Result<BigInt> {
        let end = self.hom_basis(m, m)?;
        let q = self.p();
        if checked_size(q, end.len()).is_some_and(|s| s <= 1 << 12) {
            return self.aut_count_by_scan(m, &end);
        }
        let parts = self.decompose(m)?;
        let mut mult: Vec<(IsoClassKey, u32)> = Vec::new();
        for k in parts {
            match mult.iter_mut().find(|(x, _)| *x == k) {
                Some((_, c)) => *c += 1,
                None => mult.push((k, 1)),
            }
        }
        let qb = BigInt::from(q);
        let mut semisimple_dim: i64 = 0;
        let mut gl = BigInt::one();
        for (k, mj) in &mult {
            let ek = self.hom_basis(k, k)?;
            let inv = self.aut_count_by_scan(k, &ek)?;
            let total = num_traits::pow(qb.clone(), ek.len());
            let rad = total - inv;
            let mut r = 0usize;
            let mut t = BigInt::one();
            while t < rad {
                t *= &qb;
                r += 1;
            }
            let dj = (ek.len() - r) as u32;
            let big_q = num_traits::pow(qb.clone(), dj as usize);
            let mq = num_traits::pow(big_q.clone(), *mj as usize);
            for i in 0..*mj {
                gl *= &mq - num_traits::pow(big_q.clone(), i as usize);
            }
            semisimple_dim += (*mj as i64) * (*mj as i64) * dj as i64;
        }
        let rad_dim = end.len() as i64 - semisimple_dim;
        Ok(gl * num_traits::pow(qb, rad_dim as usize))
    }

    fn aut_count_by_scan(&self, m: &Rep, end: &[RepMorphism]) -> Result<BigInt> {
        match checked_size(self.p(), end.len()) {
            Some(s) if s <= BUDGET => {}
            _ => return Err(Error::BudgetExceeded(format!("End of dimension {}", end.len()))),
        }
        let zero = self.zero_morphism(m, m);
        let mut n = BigInt::zero();
        for c in Counter::new(self.p(), end.len()) {
            if combine(end, &c, &zero).is_invertible() {
                n += 1;
            }
        }
        Ok(n)
    }

    /// Subrepresentations of `c` with dimension vector `d`.
    pub fn submodules_with_dim(&self, c: &Rep, d: &[usize]) -> Result<Vec<SubspaceFamily>> {
        self.check(c)?;
        if c.total_dim() > 6 {
            return Err(Error::PreconditionError("submodule enumeration needs total dimension <= 6".into()));
        }
        if d.len() != self.n() || d.iter().zip(&c.dim).any(|(a, b)| a > b) {
            return Ok(Vec::new());
        }
        let p = self.p();
        let per_vertex: Vec<Vec<FpMatrix>> = (0..self.n()).map(|i| subspaces(p, c.dim[i], d[i])).collect();
        let total: u64 = per_vertex.iter().map(|v| v.len() as u64).product();
        if total > BUDGET {
            return Err(Error::BudgetExceeded(format!("{total} subspace tuples")));
        }
        let reduced: Vec<Vec<(FpMatrix, Vec<usize>)>> =
            per_vertex.iter().map(|v| v.iter().map(row_basis).collect()).collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.n()];
        'outer: loop {
            let stable = self.quiver.arrows.iter().enumerate().all(|(a, &(s, t))| {
                let img = c.maps[a].mul(&per_vertex[s][idx[s]]);
                let (rows, piv) = &reduced[t][idx[t]];
                (0..img.cols()).all(|k| reduce_mod(rows, piv, &img.col(k), p).iter().all(|&x| x == 0))
            });
            if stable {
                out.push((0..self.n()).map(|i| per_vertex[i][idx[i]].clone()).collect());
            }
            for i in (0..self.n()).rev() {
                idx[i] += 1;
                if idx[i] < per_vertex[i].len() {
                    continue 'outer;
                }
                idx[i] = 0;
            }
            break;
        }
        Ok(out)
    }

    /// Reflection at the sink `i`: `M_i` becomes the kernel of
    /// `⊕_{a: t(a)=i} M_{s(a)} -> M_i` and the arrows into `i` are reversed.
    pub fn reflect_sink(&self, m: &Rep, i: usize, target: &RepCategory) -> Result<Rep> {
        self.check(m)?;
        if i >= self.n() {
            return Err(Error::IndexError(i));
        }
        if !self.quiver.is_sink(i) || target.quiver != self.quiver.reflect_at(i) || target.p() != self.p() {
            return Err(Error::PreconditionError(format!("vertex {} is not a sink of the source quiver", i + 1)));
        }
        let (phi, blocks) = self.sink_map(m, i);
        if phi.rank() < m.dim[i] {
            return Err(Error::NotInSubcategory);
        }
        let ker = FpMatrix::from_cols(self.p(), phi.cols(), &phi.kernel_basis());
        let mut dim = m.dim.clone();
        dim[i] = ker.cols();
        let maps = self
            .quiver
            .arrows
            .iter()
            .enumerate()
            .map(|(a, &(_, t))| {
                if t == i {
                    let (off, len) = blocks[a].expect("arrow into the sink");
                    ker.submatrix(off, len, 0, ker.cols())
                } else {
                    m.maps[a].clone()
                }
            })
            .collect();
        target.rep(dim, maps)
    }

    fn sink_map(&self, m: &Rep, i: usize) -> (FpMatrix, Vec<Option<(usize, usize)>>) {
        let mut phi = FpMatrix::zeros(self.p(), m.dim[i], 0);
        let mut blocks = vec![None; self.quiver.arrows.len()];
        for (a, &(s, t)) in self.quiver.arrows.iter().enumerate() {
            if t == i {
                blocks[a] = Some((phi.cols(), m.dim[s]));
                phi = phi.hstack(&m.maps[a]);
            }
        }
        (phi, blocks)
    }

    /// The reflection functor on a morphism `f: m -> n`.
    pub fn reflect_sink_morphism(&self, f: &RepMorphism, m: &Rep, n: &Rep, i: usize) -> Result<RepMorphism> {
        let (pm, bm) = self.sink_map(m, i);
        let (pn, bn) = self.sink_map(n, i);
        let km = FpMatrix::from_cols(self.p(), pm.cols(), &pm.kernel_basis());
        let kn = FpMatrix::from_cols(self.p(), pn.cols(), &pn.kernel_basis());
        let mut big = FpMatrix::zeros(self.p(), pn.cols(), pm.cols());
        for (a, &(s, _)) in self.quiver.arrows.iter().enumerate() {
            if let (Some((om, _)), Some((on, _))) = (bm[a], bn[a]) {
                big.paste(on, om, &f.comps[s]);
            }
        }
        let img = big.mul(&km);
        let mut y = FpMatrix::zeros(self.p(), kn.cols(), km.cols());
        for c in 0..km.cols() {
            let sol = kn.solve_linear(&img.col(c))?.ok_or(Error::NotASubmodule)?;
            for (r, x) in sol.into_iter().enumerate() {
                y.set(r, c, x);
            }
        }
        let mut comps = f.comps.clone();
        comps[i] = y;
        Ok(RepMorphism::new(comps))
    }

    /// Human-readable name: summands written as `S{i}`, `P{i}` or their
    /// dimension vector, joined by `+`.
    pub fn label(&self, m: &Rep) -> String {
        if m.is_zero() {
            return "0".into();
        }
        let parts = match self.decompose(m) {
            Ok(p) => p,
            Err(_) => return format!("{:?}", m.dim),
        };
        let names: Vec<String> = parts
            .iter()
            .map(|k| {
                if k.total_dim() == 1 {
                    let i = k.dim.iter().position(|&x| x == 1).unwrap();
                    return format!("S{}", i + 1);
                }
                for i in 0..self.n() {
                    if let Ok(pi) = self.projective(i) {
                        if pi.dim == k.dim && self.is_isomorphic(&pi, k).unwrap_or(false) {
                            return format!("P{}", i + 1);
                        }
                    }
                }
                let ds: Vec<String> = k.dim.iter().map(|d| d.to_string()).collect();
                format!("({})", ds.join(","))
            })
            .collect();
        names.join("+")
    }

    /// Random representation of dimension vector `d`.
    pub fn random_rep(&self, d: &[usize], rng: &mut impl Rng) -> Rep {
        let q = self.p();
        self.rep_of_dim_with(d, |_, _| rng.gen_range(0..q))
    }

    /// Random automorphism of `m` (a random invertible endomorphism).
    pub fn random_automorphism(&self, m: &Rep, rng: &mut impl Rng) -> Result<RepMorphism> {
        let end = self.hom_basis(m, m)?;
        let zero = self.zero_morphism(m, m);
        for _ in 0..4096 {
            let c: Vec<u32> = (0..end.len()).map(|_| rng.gen_range(0..self.p())).collect();
            let f = combine(&end, &c, &zero);
            if f.is_invertible() {
                return Ok(f);
            }
        }
        Ok(self.identity(m))
    }

    /// Transport the structure of `m` along vertexwise invertible matrices `g`.
    pub fn base_change(&self, m: &Rep, g: &[FpMatrix]) -> Result<Rep> {
        let maps = self
            .quiver
            .arrows
            .iter()
            .enumerate()
            .map(|(a, &(s, t))| {
                let gi = g[s].inverse().ok_or(Error::DivisionByZero)?;
                Ok(g[t].mul(&m.maps[a]).mul(&gi))
            })
            .collect::<Result<Vec<_>>>()?;
        self.rep(m.dim.clone(), maps)
    }
}

/// All `k`-dimensional subspaces of `F_p^n`, as `n x k` column bases in
/// reduced echelon form.
pub(crate) fn subspaces(p: u32, n: usize, k: usize) -> Vec<FpMatrix> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut pivots: Vec<usize> = (0..k).collect();
    loop {
        let free: Vec<(usize, usize)> = (0..k)
            .flat_map(|r| {
                let pv = pivots.clone();
                ((pivots[r] + 1)..n).filter(move |c| !pv.contains(c)).map(move |c| (r, c))
            })
            .collect();
        for vals in Counter::new(p, free.len()) {
            let mut rows = FpMatrix::zeros(p, k, n);
            for (r, &c) in pivots.iter().enumerate() {
                rows.set(r, c, 1);
            }
            for (&(r, c), v) in free.iter().zip(vals) {
                rows.set(r, c, v);
            }
            out.push(rows.transpose());
        }
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pivots[i] < n - k + i {
                pivots[i] += 1;
                for j in i + 1..k {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2(p: u32) -> Cat {
        RepCategory::new(Quiver::linear_a(2), FieldSpec::new(p).unwrap())
    }

    #[test]
    fn projectives_and_resolution() {
        let c = a2(2);
        let p1 = c.projective(0).unwrap();
        assert_eq!(p1.dim(), &[1, 1]);
        let s1 = c.simple(0).unwrap();
        let res = c.min_proj_resolution(&s1).unwrap();
        assert_eq!(res.p0.dim(), &[1, 1]);
        assert_eq!(res.p1.dim(), &[0, 1]);
        assert_eq!(c.ext1_dim(&s1, &c.simple(1).unwrap()).unwrap(), 1);
        assert_eq!(c.ext1_dim(&c.simple(1).unwrap(), &s1).unwrap(), 0);
    }

    #[test]
    fn euler_form_example() {
        let q = Quiver::linear_a(2);
        assert_eq!(q.euler_form_int(&[1, 0], &[0, 1]), -1);
        assert_eq!(q.euler_form_int(&[1, 1], &[1, 1]), 1);
    }

    #[test]
    fn subspace_counts_are_gaussian_binomials() {
        assert_eq!(subspaces(2, 4, 2).len(), 35);
        assert_eq!(subspaces(3, 3, 1).len(), 13);
        assert_eq!(subspaces(2, 3, 0).len(), 1);
    }

    #[test]
    fn canonical_and_classes() {
        let c = a2(3);
        let classes = c.iso_classes(&[1, 1]).unwrap();
        assert_eq!(classes.len(), 2);
        let p1 = c.projective(0).unwrap();
        let twisted = c.rep_from_ints(vec![1, 1], &[vec![vec![2]]]).unwrap();
        assert_eq!(c.canonical(&p1).unwrap(), c.canonical(&twisted).unwrap());
        let d = c.decompose(&c.direct_sum(&p1, &c.simple(0).unwrap())).unwrap();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn reflection_of_a2() {
        let c = a2(2);
        let q2 = c.quiver().reflect_at(1);
        let t = RepCategory::new(q2, c.field());
        let s1 = c.simple(0).unwrap();
        let r = c.reflect_sink(&s1, 1, &t).unwrap();
        assert_eq!(r.dim(), &[1, 1]);
        assert_eq!(c.reflect_sink(&c.simple(1).unwrap(), 1, &t), Err(Error::NotInSubcategory));
    }

    #[test]
    fn aut_counts() {
        let vect = RepCategory::new(Quiver::linear_a(1), FieldSpec::new(2).unwrap());
        let k2 = vect.rep(vec![2], vec![]).unwrap();
        assert_eq!(vect.aut_count(&k2).unwrap(), BigInt::from(6));
        let v3 = RepCategory::new(Quiver::linear_a(1), FieldSpec::new(3).unwrap());
        let k4 = v3.rep(vec![4], vec![]).unwrap();
        let gl4: i64 = (81 - 1) * (81 - 3) * (81 - 9) * (81 - 27);
        assert_eq!(v3.aut_count(&k4).unwrap(), BigInt::from(gl4));
    }
}
