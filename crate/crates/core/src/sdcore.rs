//! Semi-derived Hall algebra engine shared by the Z/2 and Z gradings.
//!
//! Elements are combinations of symbols `K^λ ⋄ [R(H)]`, where `λ` is a class
//! of an acyclic complex (dimension vectors of the images of the
//! differentials, one per stored index) and `R(H)` is the minimal
//! projective-component complex with homology `H`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Mutex;

use rand::Rng;

use crate::check::Check;
use crate::complex::{ChainMap, Gcx};
use crate::error::{Error, Result};
use crate::ff::{CoeffScalar, FpMatrix};
use crate::linsys::{LinSys, Term};
use crate::par;
use crate::quiver::{Cat, IsoClassKey, Rep, RepCategory, RepMorphism};

/// Flat lattice point: entry `k * n + i` is the multiplicity of vertex `i` at
/// stored index `k`.
pub type Lat = Vec<i64>;
/// Homology iso class per stored index.
pub type HKey = Vec<IsoClassKey>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdElement {
    q: u32,
    terms: BTreeMap<(Lat, HKey), CoeffScalar>,
}

impl SdElement {
    pub fn zero(q: u32) -> Self {
        SdElement { q, terms: BTreeMap::new() }
    }

    pub fn term(q: u32, lat: Lat, key: HKey, c: CoeffScalar) -> Self {
        let mut x = SdElement::zero(q);
        x.add_term(lat, key, &c);
        x
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn terms(&self) -> &BTreeMap<(Lat, HKey), CoeffScalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, lat: Lat, key: HKey, c: &CoeffScalar) {
        let k = (lat, key);
        let v = match self.terms.remove(&k) {
            Some(old) => &old + c,
            None => c.clone(),
        };
        if !v.is_zero() {
            self.terms.insert(k, v);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for ((l, h), c) in &o.terms {
            r.add_term(l.clone(), h.clone(), c);
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&CoeffScalar::from_int(self.q, -1)))
    }

    pub fn scale(&self, c: &CoeffScalar) -> Self {
        let mut r = SdElement::zero(self.q);
        for ((l, h), v) in &self.terms {
            r.add_term(l.clone(), h.clone(), &(v * c));
        }
        r
    }

    /// Apply `f` to every symbol, keeping coefficients.
    pub fn map_symbols(&self, mut f: impl FnMut(&Lat, &HKey) -> (Lat, HKey, CoeffScalar)) -> Self {
        let mut r = SdElement::zero(self.q);
        for ((l, h), v) in &self.terms {
            let (l2, h2, c) = f(l, h);
            r.add_term(l2, h2, &(v * &c));
        }
        r
    }
}

/// Normal form `coeff · K^lat ⋄ [R(key)]` of a single complex, with
/// `coeff = q^exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nf {
    pub exp: i64,
    pub lat: Lat,
    pub key: HKey,
}

type SymProduct = Vec<(Lat, HKey, CoeffScalar)>;

pub struct SdEngine {
    cat: Cat,
    periodic: bool,
    len: usize,
    zero_key: IsoClassKey,
    rep_cache: Mutex<HashMap<HKey, Gcx>>,
    prod_cache: Mutex<HashMap<(HKey, HKey), SymProduct>>,
}

impl fmt::Debug for SdEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdEngine").field("periodic", &self.periodic).finish()
    }
}

/// Solve `f ∘ g = h` for a morphism `g: src -> mid`, where `f: mid -> tgt`.
pub(crate) fn lift(
    cat: &RepCategory,
    f: &RepMorphism,
    mid: &Rep,
    h: &RepMorphism,
    src: &Rep,
) -> Result<Option<RepMorphism>> {
    let n = cat.n();
    let shapes = (0..n).map(|i| (mid.dim()[i], src.dim()[i])).collect();
    let mut sys = LinSys::new(cat.p(), shapes);
    cat.add_module_eqs(&mut sys, 0, src, mid);
    for i in 0..n {
        sys.add_eq(f.comp(i).rows(), src.dim()[i], &[Term::new(i, 1, Some(f.comp(i)), None)], Some(h.comp(i)));
    }
    if sys.nvars() == 0 {
        let ok = h.is_zero();
        return Ok(ok.then(|| cat.zero_morphism(src, mid)));
    }
    Ok(sys.solve().map(|v| RepMorphism::new(sys.unflatten(&v))))
}

impl SdEngine {
    pub fn new(cat: Cat, periodic: bool) -> Result<SdEngine> {
        let zero_key = cat.canonical(&cat.zero_rep())?;
        let len = Gcx::zero(&cat, periodic).len();
        Ok(SdEngine {
            cat,
            periodic,
            len,
            zero_key,
            rep_cache: Mutex::new(HashMap::new()),
            prod_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn cat(&self) -> &Cat {
        &self.cat
    }

    pub fn q(&self) -> u32 {
        self.cat.p()
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn zero_key(&self) -> &IsoClassKey {
        &self.zero_key
    }

    pub fn zero_hkey(&self) -> HKey {
        vec![self.zero_key.clone(); self.len]
    }

    pub fn zero_lat(&self) -> Lat {
        vec![0; self.len * self.cat.n()]
    }

    fn next(&self, k: usize) -> Option<usize> {
        if self.periodic {
            Some(1 - k)
        } else if k + 1 < self.len {
            Some(k + 1)
        } else {
            None
        }
    }

    fn prev(&self, k: usize) -> Option<usize> {
        if self.periodic {
            Some(1 - k)
        } else {
            k.checked_sub(1)
        }
    }

    pub fn euler(&self, a: &[i64], b: &[i64]) -> i64 {
        self.cat.quiver().euler_form_int(a, b)
    }

    pub fn slot<'a>(&self, lat: &'a [i64], k: usize) -> &'a [i64] {
        let n = self.cat.n();
        &lat[k * n..(k + 1) * n]
    }

    /// Component dimension vectors of the acyclic class `λ`.
    pub fn lat_components(&self, lat: &[i64]) -> Vec<Vec<i64>> {
        (0..self.len)
            .map(|k| {
                let mut v = self.slot(lat, k).to_vec();
                if let Some(j) = self.prev(k) {
                    for (a, b) in v.iter_mut().zip(self.slot(lat, j)) {
                        *a += b;
                    }
                }
                v
            })
            .collect()
    }

    /// Exponent of `⟨K^λ, X⟩` for a complex with component classes `x`.
    pub fn pair_lat_cx(&self, lat: &[i64], x: &[Vec<i64>]) -> i64 {
        (0..self.len).map(|k| self.euler(self.slot(lat, k), &x[k])).sum()
    }

    /// Exponent of `⟨X, K^λ⟩`.
    pub fn pair_cx_lat(&self, x: &[Vec<i64>], lat: &[i64]) -> i64 {
        (0..self.len).filter_map(|k| self.next(k).map(|j| self.euler(&x[j], self.slot(lat, k)))).sum()
    }

    /// Exponent of `⟨K^λ, K^μ⟩`.
    pub fn pair_lat(&self, a: &[i64], b: &[i64]) -> i64 {
        self.pair_lat_cx(a, &self.lat_components(b))
    }

    pub fn add_lat(a: &[i64], b: &[i64]) -> Lat {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn neg_lat(a: &[i64]) -> Lat {
        a.iter().map(|x| -x).collect()
    }

    /// `q^e` as a coefficient.
    pub fn qpow(&self, e: i64) -> CoeffScalar {
        CoeffScalar::q_power(self.q(), e)
    }

    /// Two-term complex `A` at index `a`, `B` at `next(a)`, differential `f`.
    pub fn two_term(&self, a: usize, am: &Rep, bm: &Rep, f: &RepMorphism) -> Result<Gcx> {
        let b = self.next(a).ok_or(Error::WindowExceeded(crate::complex::index_to_degree(a + 1)))?;
        let z = self.cat.zero_rep();
        let mut comps = vec![z.clone(); self.len];
        comps[a] = am.clone();
        comps[b] = bm.clone();
        let nd = if self.periodic { 2 } else { self.len - 1 };
        let diffs = (0..nd)
            .map(|k| if k == a { f.clone() } else { self.cat.zero_morphism(&comps[k], &comps[self.next(k).unwrap()]) })
            .collect();
        Ok(Gcx::new_unchecked(self.periodic, comps, diffs))
    }

    /// Stalk complex with `m` at index `k`.
    pub fn stalk(&self, m: &Rep, k: usize) -> Gcx {
        let z = self.cat.zero_rep();
        let mut comps = vec![z; self.len];
        comps[k] = m.clone();
        let nd = if self.periodic { 2 } else { self.len - 1 };
        let diffs =
            (0..nd).map(|j| self.cat.zero_morphism(&comps[j], &comps[self.next(j).unwrap()])).collect();
        Gcx::new_unchecked(self.periodic, comps, diffs)
    }

    /// `C_{A,k}`: the minimal resolution of `A` placed so that its homology
    /// sits at index `k`.
    pub fn resolution_piece(&self, a: &Rep, k: usize) -> Result<Gcx> {
        let r = self.cat.min_proj_resolution(a)?;
        match self.prev(k) {
            Some(j) => self.two_term(j, &r.p1, &r.p0, &r.incl),
            None if r.p1.is_zero() => Ok(self.stalk(&r.p0, k)),
            None => Err(Error::WindowExceeded(crate::complex::index_to_degree(k) - 1)),
        }
    }

    /// `K(Q, k)`: `Q` at `k` and `next(k)` with identity differential.
    pub fn contractible(&self, qm: &Rep, k: usize) -> Result<Gcx> {
        self.two_term(k, qm, qm, &self.cat.identity(qm))
    }

    /// The minimal projective-component complex with homology `key`.
    pub fn rep_complex(&self, key: &HKey) -> Result<Gcx> {
        if let Some(x) = self.rep_cache.lock().unwrap().get(key) {
            return Ok(x.clone());
        }
        let mut x = Gcx::zero(&self.cat, self.periodic);
        for (k, h) in key.iter().enumerate() {
            if !h.is_zero() {
                x = x.direct_sum(&self.cat, &self.resolution_piece(h.rep(), k)?);
            }
        }
        self.rep_cache.lock().unwrap().insert(key.clone(), x.clone());
        Ok(x)
    }

    pub fn rep_dims(&self, key: &HKey) -> Vec<Vec<i64>> {
        let n = self.cat.n();
        let mut out = vec![vec![0; n]; self.len];
        for (k, h) in key.iter().enumerate() {
            if h.is_zero() {
                continue;
            }
            let (p1, p0) = self.cat.resolution_dims(h.rep());
            for i in 0..n {
                out[k][i] += p0[i];
                if let Some(j) = self.prev(k) {
                    out[j][i] += p1[i];
                }
            }
        }
        out
    }

    /// Component classes of the symbol `K^λ ⋄ [R(key)]`.
    pub fn symbol_dims(&self, lat: &[i64], key: &HKey) -> Vec<Vec<i64>> {
        let a = self.lat_components(lat);
        let b = self.rep_dims(key);
        a.iter().zip(&b).map(|(x, y)| Self::add_lat(x, y)).collect()
    }

    pub fn homology_key(&self, x: &Gcx) -> Result<HKey> {
        (0..self.len)
            .map(|k| {
                if x.comp(k).is_zero() {
                    return Ok(self.zero_key.clone());
                }
                let h = x.homology_at(&self.cat, k)?;
                self.cat.canonical(&h.h)
            })
            .collect()
    }

    pub fn has_projective_components(&self, x: &Gcx) -> bool {
        x.comps().iter().all(|c| self.cat.resolution_dims(c).0.iter().all(|&v| v == 0))
    }

    /// Normal form of a complex whose components are projective.
    pub fn fast_nf(&self, x: &Gcx) -> Result<Nf> {
        let key = self.homology_key(x)?;
        let n = self.cat.n();
        let rep = self.rep_dims(&key);
        let img = x.image_dims();
        let mut lat = vec![0; self.len * n];
        for k in 0..self.len {
            if let Some(j) = self.next(k) {
                let p1 = if key[j].is_zero() { vec![0; n] } else { self.cat.resolution_dims(key[j].rep()).0 };
                for i in 0..n {
                    lat[k * n + i] = img[k][i] - p1[i];
                }
            }
        }
        let exp = self.pair_lat_cx(&lat, &rep);
        Ok(Nf { exp, lat, key })
    }

    /// Normal form of an arbitrary complex, via a surjective
    /// quasi-isomorphism from a projective-component complex.
    pub fn general_nf(&self, x: &Gcx) -> Result<Nf> {
        let cat = &self.cat;
        let mut pieces: Vec<(Gcx, ChainMap)> = Vec::new();
        for k in 0..self.len {
            if x.comp(k).is_zero() {
                continue;
            }
            let hk = x.homology_at(cat, k)?;
            if !hk.h.is_zero() {
                let r = cat.min_proj_resolution(&hk.h)?;
                let g0 = lift(cat, &hk.proj, &hk.z, &r.cover, &r.p0)?.expect("projective lifts through a surjection");
                let big_g0 = hk.z_incl.after(&g0);
                let piece = self.resolution_piece(&hk.h, k)?;
                let mut phi = piece.zero_map(cat, x);
                phi[k] = big_g0.clone();
                if let Some(j) = self.prev(k) {
                    let target = big_g0.after(&r.incl);
                    let d = x.diff(j).expect("previous index has a differential");
                    phi[j] = lift(cat, d, x.comp(j), &target, &r.p1)?.expect("boundaries lift");
                }
                pieces.push((piece, phi));
            }
            let r = cat.min_proj_resolution(x.comp(k))?;
            let piece = self.contractible(&r.p0, k)?;
            let j = self.next(k).unwrap();
            let mut phi = piece.zero_map(cat, x);
            phi[k] = r.cover.clone();
            phi[j] = x.diff(k).unwrap().after(&r.cover);
            pieces.push((piece, phi));
        }
        let mut px = Gcx::zero(cat, self.periodic);
        let mut big_phi = px.zero_map(cat, x);
        for (piece, phi) in &pieces {
            px = px.direct_sum(cat, piece);
            big_phi = big_phi.iter().zip(phi).map(|(a, b)| a.hstack(b)).collect();
        }
        let kb: Vec<Vec<FpMatrix>> = big_phi
            .iter()
            .enumerate()
            .map(|(k, m)| {
                m.comps()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| FpMatrix::from_cols(cat.p(), px.comp(k).dim()[i], &c.kernel_basis()))
                    .collect()
            })
            .collect();
        let (ker, _) = px.subcomplex(cat, &kb)?;
        debug_assert!(ker.is_acyclic(cat)?);
        let n = cat.n();
        let mut a = vec![0; self.len * n];
        for (k, dims) in ker.image_dims().iter().enumerate() {
            a[k * n..(k + 1) * n].copy_from_slice(dims);
        }
        let p_nf = self.fast_nf(&px)?;
        let xd: Vec<Vec<i64>> = x.comps().iter().map(|c| c.dim_i64()).collect();
        let na = Self::neg_lat(&a);
        let exp = -self.pair_lat_cx(&a, &xd) - self.pair_lat(&a, &a) + p_nf.exp - self.pair_lat(&na, &p_nf.lat);
        Ok(Nf { exp, lat: Self::add_lat(&p_nf.lat, &na), key: p_nf.key })
    }

    pub fn nf(&self, x: &Gcx) -> Result<Nf> {
        if self.has_projective_components(x) {
            self.fast_nf(x)
        } else {
            self.general_nf(x)
        }
    }

    /// The class `[X]` as an element.
    pub fn class_of(&self, x: &Gcx) -> Result<SdElement> {
        let f = self.nf(x)?;
        Ok(SdElement::term(self.q(), f.lat, f.key, self.qpow(f.exp)))
    }

    pub fn one(&self) -> SdElement {
        self.basis(self.zero_lat(), self.zero_hkey())
    }

    pub fn basis(&self, lat: Lat, key: HKey) -> SdElement {
        SdElement::term(self.q(), lat, key, CoeffScalar::one(self.q()))
    }

    pub fn torus(&self, lat: Lat) -> SdElement {
        self.basis(lat, self.zero_hkey())
    }

    /// `(K^λ)^{-1} = ⟨λ,λ⟩^{-1} K^{-λ}`.
    pub fn torus_inverse(&self, lat: &[i64]) -> SdElement {
        SdElement::term(self.q(), Self::neg_lat(lat), self.zero_hkey(), self.qpow(-self.pair_lat(lat, lat)))
    }

    /// `[R(L)] ⋄ [R(M)]` expanded in symbols.
    pub fn symbol_product(&self, l: &HKey, m: &HKey) -> Result<SymProduct> {
        let ck = (l.clone(), m.clone());
        if let Some(v) = self.prod_cache.lock().unwrap().get(&ck) {
            return Ok(v.clone());
        }
        let cat = &self.cat;
        let lx = self.rep_complex(l)?;
        let mx = self.rep_complex(m)?;
        let hom = lx.chain_hom_dim(cat, &mx)? as i64;
        let classes = lx.ext_classes(cat, &mx)?;
        let nfs: Vec<Result<Nf>> = par::map(&classes, |f| {
            let e = lx.middle_term(cat, &mx, f)?;
            self.fast_nf(&e)
        });
        let mut acc: BTreeMap<(Lat, HKey), CoeffScalar> = BTreeMap::new();
        for r in nfs {
            let f = r?;
            let c = self.qpow(f.exp - hom);
            let e = acc.entry((f.lat, f.key)).or_insert_with(|| CoeffScalar::zero(self.q()));
            *e = &*e + &c;
        }
        let out: SymProduct = acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|((l, h), c)| (l, h, c)).collect();
        self.prod_cache.lock().unwrap().insert(ck, out.clone());
        Ok(out)
    }

    /// `(K^λ ⋄ [R(L)]) ⋄ (K^μ ⋄ [R(M)])`.
    pub fn basis_product(&self, la: &[i64], l: &HKey, mu: &[i64], m: &HKey) -> Result<SdElement> {
        let ld = self.rep_dims(l);
        let pre = self.pair_lat_cx(mu, &ld) - self.pair_cx_lat(&ld, mu) - self.pair_lat(la, mu);
        let lm = Self::add_lat(la, mu);
        let mut out = SdElement::zero(self.q());
        for (nu, h, c) in self.symbol_product(l, m)? {
            let e = pre - self.pair_lat(&lm, &nu);
            out.add_term(Self::add_lat(&lm, &nu), h, &(&c * &self.qpow(e)));
        }
        Ok(out)
    }

    /// The untwisted product `x ⋄ y`.
    pub fn product(&self, x: &SdElement, y: &SdElement) -> Result<SdElement> {
        let mut out = SdElement::zero(self.q());
        for ((la, l), a) in x.terms() {
            for ((mu, m), b) in y.terms() {
                let p = self.basis_product(la, l, mu, m)?;
                out = out.add(&p.scale(&(a * b)));
            }
        }
        Ok(out)
    }

    /// Product with an extra factor `v^{w(X, Y)}` computed from the component
    /// classes of the two symbols.
    pub fn twisted_by(
        &self,
        x: &SdElement,
        y: &SdElement,
        w: impl Fn(&[Vec<i64>], &[Vec<i64>]) -> i64,
    ) -> Result<SdElement> {
        let mut out = SdElement::zero(self.q());
        for ((la, l), a) in x.terms() {
            let xd = self.symbol_dims(la, l);
            for ((mu, m), b) in y.terms() {
                let yd = self.symbol_dims(mu, m);
                let c = a * b * CoeffScalar::v_power(self.q(), w(&xd, &yd));
                out = out.add(&self.basis_product(la, l, mu, m)?.scale(&c));
            }
        }
        Ok(out)
    }

    /// Random vertexwise change of basis of every component.
    pub fn scramble(&self, x: &Gcx, rng: &mut impl Rng) -> Result<Gcx> {
        let p = self.q();
        let g: Vec<RepMorphism> = x
            .comps()
            .iter()
            .map(|c| {
                RepMorphism::new(
                    c.dim()
                        .iter()
                        .map(|&d| loop {
                            let data = (0..d * d).map(|_| rng.gen_range(0..p)).collect();
                            let m = FpMatrix::from_vec(p, d, d, data).expect("square shape");
                            if m.is_invertible() {
                                break m;
                            }
                        })
                        .collect(),
                )
            })
            .collect();
        x.base_change(&self.cat, &g)
    }

    fn random_module(&self, rng: &mut impl Rng, max_dim: usize) -> Rep {
        let dims: Vec<Vec<usize>> =
            self.cat.dim_vectors_up_to(max_dim).into_iter().filter(|d| d.iter().any(|&x| x > 0)).collect();
        let d = &dims[rng.gen_range(0..dims.len())];
        self.cat.random_rep(d, rng)
    }

    /// Sum of one or two contractible complexes on random modules at indices
    /// from `idx`, scrambled.
    pub fn random_acyclic(&self, rng: &mut impl Rng, idx: &[usize]) -> Result<Gcx> {
        let mut k = Gcx::zero(&self.cat, self.periodic);
        for _ in 0..rng.gen_range(1..=2) {
            let a = self.random_module(rng, 2);
            k = k.direct_sum(&self.cat, &self.contractible(&a, idx[rng.gen_range(0..idx.len())])?);
        }
        self.scramble(&k, rng)
    }

    /// Random complex built from stalks and two-term pieces with a random
    /// differential, at indices from `idx`.
    pub fn random_complex(&self, rng: &mut impl Rng, idx: &[usize]) -> Result<Gcx> {
        let cat = &self.cat;
        let mut x = Gcx::zero(cat, self.periodic);
        for _ in 0..rng.gen_range(1..=2) {
            let k = idx[rng.gen_range(0..idx.len())];
            let a = self.random_module(rng, 2);
            let piece = if rng.gen_bool(0.5) {
                self.stalk(&a, k)
            } else {
                let b = self.random_module(rng, 2);
                let hb = cat.hom_basis(&a, &b)?;
                let c: Vec<u32> = (0..hb.len()).map(|_| rng.gen_range(0..self.q())).collect();
                let f = crate::quiver::combine(&hb, &c, &cat.zero_morphism(&a, &b));
                self.two_term(k, &a, &b, &f)?
            };
            x = x.direct_sum(cat, &piece);
        }
        Ok(x)
    }

    /// A conflation `K ↣ L ↠ M` with `K` acyclic: `L` is the scrambled middle
    /// term of a random chain map `M -> ΣK`.
    pub fn random_conflation(&self, rng: &mut impl Rng, idx: &[usize]) -> Result<(Gcx, Gcx, Gcx)> {
        let cat = &self.cat;
        let k = self.random_acyclic(rng, idx)?;
        let m = self.random_complex(rng, idx)?;
        let sk = k.shift(cat)?;
        let basis = m.chain_map_basis(cat, &sk)?;
        let mut f = m.zero_map(cat, &sk);
        for b in &basis {
            let c = rng.gen_range(0..self.q());
            if c != 0 {
                f = f.iter().zip(b).map(|(x, y)| x.add(&y.scale(c))).collect();
            }
        }
        let l = self.scramble(&m.middle_term(cat, &k, &f)?, rng)?;
        Ok((k, l, m))
    }

    /// `[L]` against `[K ⊕ M]` for a random conflation with acyclic `K`.
    pub fn check_conflation(&self, rng: &mut impl Rng, idx: &[usize], name: String) -> Result<Check> {
        let (k, l, m) = self.random_conflation(rng, idx)?;
        let a = self.class_of(&l)?;
        let b = self.class_of(&k.direct_sum(&self.cat, &m))?;
        Ok(Check::flag(name, a == b, self.show(&a), self.show(&b)))
    }

    /// `[X ⊕ K] = ⟨K, X⟩ [K] ⋄ [X]` for random acyclic `K`.
    pub fn check_freeness(&self, rng: &mut impl Rng, idx: &[usize], name: String) -> Result<Check> {
        let k = self.random_acyclic(rng, idx)?;
        let x = self.random_complex(rng, idx)?;
        let lhs = self.class_of(&x.direct_sum(&self.cat, &k))?;
        let kc = self.class_of(&k)?;
        let lam = &kc.terms().keys().next().expect("acyclic class is one term").0;
        let xd: Vec<Vec<i64>> = x.comps().iter().map(|c| c.dim_i64()).collect();
        let rhs = self.product(&kc, &self.class_of(&x)?)?.scale(&self.qpow(self.pair_lat_cx(lam, &xd)));
        Ok(Check::flag(name, lhs == rhs, self.show(&lhs), self.show(&rhs)))
    }

    /// Render with the nonzero lattice slots and homology labels by index.
    pub fn show(&self, x: &SdElement) -> String {
        let n = self.cat.n();
        self.render(x, |l, h| {
            let lat: Vec<String> = (0..self.len)
                .filter(|&k| l[k * n..(k + 1) * n].iter().any(|&v| v != 0))
                .map(|k| format!("{k}:{:?}", &l[k * n..(k + 1) * n]))
                .collect();
            let hs: Vec<String> = (0..self.len)
                .filter(|&k| !h[k].is_zero())
                .map(|k| format!("{k}:{}", self.cat.label(h[k].rep())))
                .collect();
            format!("K{{{}}}[{}]", lat.join(","), hs.join(","))
        })
    }

    /// Render an element with `label` naming homology keys.
    pub fn render(&self, x: &SdElement, label: impl Fn(&Lat, &HKey) -> String) -> String {
        if x.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = x.terms().iter().map(|((l, h), c)| format!("({c})*{}", label(l, h))).collect();
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::FieldSpec;
    use crate::quiver::Quiver;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn engine(n: usize, q: u32, periodic: bool) -> SdEngine {
        SdEngine::new(RepCategory::new(Quiver::linear_a(n), FieldSpec::new(q).unwrap()), periodic).unwrap()
    }

    fn key_at(e: &SdEngine, k: usize, m: &Rep) -> HKey {
        let mut h = e.zero_hkey();
        h[k] = e.cat().canonical(m).unwrap();
        h
    }

    #[test]
    fn acyclic_stalk_pair_is_a_torus_generator() {
        for periodic in [true, false] {
            let e = engine(2, 2, periodic);
            let c = e.cat().clone();
            let k = if periodic { 0 } else { 12 };
            for i in 0..2 {
                let s = c.simple(i).unwrap();
                let v = e.contractible(&s, k).unwrap();
                let f = e.nf(&v).unwrap();
                let mut lat = e.zero_lat();
                lat[k * 2 + i] = 1;
                assert_eq!(f, Nf { exp: 0, lat, key: e.zero_hkey() });
            }
        }
    }

    #[test]
    fn general_normal_form_matches_fast_on_projective_complexes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for periodic in [true, false] {
            let e = engine(2, 2, periodic);
            let c = e.cat().clone();
            let k = if periodic { 0 } else { 12 };
            let s1 = c.simple(0).unwrap();
            let p1 = c.projective(0).unwrap();
            let p2 = c.projective(1).unwrap();
            let x = e
                .rep_complex(&key_at(&e, k, &s1))
                .unwrap()
                .direct_sum(&c, &e.contractible(&p1, k).unwrap())
                .direct_sum(&c, &e.contractible(&p2, 1 - k % 2 + k - k % 2).unwrap());
            let g: Vec<RepMorphism> =
                x.comps().iter().map(|m| c.random_automorphism(m, &mut rng).unwrap()).collect();
            let y = x.base_change(&c, &g).unwrap();
            assert_eq!(e.fast_nf(&y).unwrap(), e.general_nf(&y).unwrap());
            assert_eq!(e.fast_nf(&x).unwrap(), e.fast_nf(&y).unwrap());
        }
    }

    #[test]
    fn direct_sum_with_acyclic_follows_the_module_rule() {
        for periodic in [true, false] {
            let e = engine(2, 3, periodic);
            let c = e.cat().clone();
            let k = if periodic { 1 } else { 12 };
            let s1 = c.simple(0).unwrap();
            let stalk = e.stalk(&s1, k);
            let kp = e.contractible(&c.projective(0).unwrap(), k).unwrap();
            let lhs = e.class_of(&stalk.direct_sum(&c, &kp)).unwrap();
            let kd = e.nf(&kp).unwrap();
            let xd: Vec<Vec<i64>> = stalk.comps().iter().map(|m| m.dim_i64()).collect();
            let rhs = e
                .product(&e.class_of(&kp).unwrap(), &e.class_of(&stalk).unwrap())
                .unwrap()
                .scale(&e.qpow(e.pair_lat_cx(&kd.lat, &xd)));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn vect_periodic_stalk_product() {
        let e = engine(1, 2, true);
        let c = e.cat().clone();
        let kk = c.simple(0).unwrap();
        let l = e.class_of(&e.stalk(&kk, 1)).unwrap();
        let m = e.class_of(&e.stalk(&kk, 0)).unwrap();
        let prod = e.product(&l, &m).unwrap();
        let split = e.class_of(&e.stalk(&kk, 0).direct_sum(&c, &e.stalk(&kk, 1))).unwrap();
        let expect = split.add(&e.torus(vec![0, 1]).scale(&CoeffScalar::from_int(2, 1)));
        assert_eq!(prod, expect);
    }

    #[test]
    fn symbol_products_associate() {
        for periodic in [true, false] {
            let e = engine(2, 2, periodic);
            let c = e.cat().clone();
            let k = if periodic { 0 } else { 12 };
            let (s1, s2) = (c.simple(0).unwrap(), c.simple(1).unwrap());
            let xs = [
                e.basis(e.zero_lat(), key_at(&e, k, &s1)),
                e.basis(e.zero_lat(), key_at(&e, k + 1, &s2)),
                e.basis(e.zero_lat(), key_at(&e, k, &s2)),
                e.torus({
                    let mut l = e.zero_lat();
                    l[k * 2] = 1;
                    l
                }),
            ];
            for a in &xs {
                for b in &xs {
                    for d in &xs {
                        let l = e.product(&e.product(a, b).unwrap(), d).unwrap();
                        let r = e.product(a, &e.product(b, d).unwrap()).unwrap();
                        assert_eq!(l, r);
                    }
                }
            }
        }
    }
}
