//! The Z-graded semi-derived Hall algebra of bounded complexes of
//! representations, its u/v generators, twists, and relation checks.
//!
//! Degrees are restricted to the window `[-8, 8]`; internally complexes live
//! on a wider stored range so that resolutions of stalks at the window edge
//! still fit.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use rand::Rng;

use crate::check::Check;
use crate::complex::{ChainMap, Gcx, PUBLIC_WINDOW, WIN_LEN, WIN_LO};
use crate::error::{Error, Result};
use crate::ff::{CoeffScalar, FpMatrix};
use crate::hall::{HallAlgebra, HallElement};
use crate::quiver::{Cat, IsoClassKey, Rep, RepCategory, RepMorphism};
use crate::sdcore::{lift, HKey, Lat, SdElement, SdEngine};

pub type SdhzElement = SdElement;

/// Bounded complex with components in degrees `lo..=hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CxB {
    lo: i32,
    hi: i32,
    comps: Vec<Rep>,
    diffs: Vec<RepMorphism>,
}

/// Finitely supported map from degrees to dimension vectors: the class of
/// `⊕_m v_{α_m, m}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TorusEltZ {
    pub coords: BTreeMap<i32, Vec<i64>>,
}

/// A u- or v-generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gen {
    U(Rep, i32),
    V(Vec<i64>, i32),
}

fn in_window(m: i32) -> Result<()> {
    if m < PUBLIC_WINDOW.0 || m > PUBLIC_WINDOW.1 {
        return Err(Error::WindowExceeded(m));
    }
    Ok(())
}

fn index(m: i32) -> usize {
    (m - WIN_LO) as usize
}

fn degree(k: usize) -> i32 {
    k as i32 + WIN_LO
}

impl CxB {
    pub fn new(cat: &RepCategory, lo: i32, hi: i32, comps: Vec<Rep>, diffs: Vec<RepMorphism>) -> Result<CxB> {
        in_window(lo)?;
        in_window(hi)?;
        if hi < lo || comps.len() != (hi - lo + 1) as usize || diffs.len() != comps.len() - 1 {
            return Err(Error::ShapeError("component and differential counts do not match the degrees".into()));
        }
        for (k, d) in diffs.iter().enumerate() {
            if !cat.is_morphism(d, &comps[k], &comps[k + 1]) {
                return Err(Error::ShapeError(format!("differential in degree {} is not a morphism", lo + k as i32)));
            }
        }
        for w in diffs.windows(2) {
            if !w[1].after(&w[0]).is_zero() {
                return Err(Error::ShapeError("differential does not square to zero".into()));
            }
        }
        Ok(CxB { lo, hi, comps, diffs })
    }

    pub fn zero(cat: &RepCategory) -> CxB {
        CxB { lo: 0, hi: 0, comps: vec![cat.zero_rep()], diffs: vec![] }
    }

    pub fn stalk(cat: &RepCategory, a: &Rep, m: i32) -> Result<CxB> {
        CxB::new(cat, m, m, vec![a.clone()], vec![])
    }

    /// `a` in degrees `m` and `m + 1` with identity differential.
    pub fn contractible(cat: &RepCategory, a: &Rep, m: i32) -> Result<CxB> {
        CxB::new(cat, m, m + 1, vec![a.clone(), a.clone()], vec![cat.identity(a)])
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.hi
    }

    pub fn comp(&self, m: i32) -> Option<&Rep> {
        (self.lo..=self.hi).contains(&m).then(|| &self.comps[(m - self.lo) as usize])
    }

    pub fn diff(&self, m: i32) -> Option<&RepMorphism> {
        (self.lo..self.hi).contains(&m).then(|| &self.diffs[(m - self.lo) as usize])
    }

    pub fn total_dim(&self) -> usize {
        self.comps.iter().map(Rep::total_dim).sum()
    }

    pub fn to_gcx(&self, cat: &RepCategory) -> Gcx {
        let z = cat.zero_rep();
        let mut comps = vec![z; WIN_LEN];
        for (k, c) in self.comps.iter().enumerate() {
            comps[index(self.lo) + k] = c.clone();
        }
        let diffs = (0..WIN_LEN - 1)
            .map(|k| match self.diff(degree(k)) {
                Some(d) => d.clone(),
                None => cat.zero_morphism(&comps[k], &comps[k + 1]),
            })
            .collect();
        Gcx::new(cat, false, comps, diffs).expect("window complex is valid")
    }

    pub fn from_gcx(cat: &RepCategory, x: &Gcx) -> Result<CxB> {
        let sup = x.support();
        let (Some(&a), Some(&b)) = (sup.first(), sup.last()) else { return Ok(CxB::zero(cat)) };
        let comps = x.comps()[a..=b].to_vec();
        let diffs = (a..b).map(|k| x.diff(k).unwrap().clone()).collect();
        CxB::new(cat, degree(a), degree(b), comps, diffs)
    }

    pub fn direct_sum(&self, cat: &RepCategory, o: &CxB) -> Result<CxB> {
        CxB::from_gcx(cat, &self.to_gcx(cat).direct_sum(cat, &o.to_gcx(cat)))
    }

    /// Brutal truncation `σ_{≥m}`: a subcomplex.
    pub fn sigma_ge(&self, cat: &RepCategory, m: i32) -> Result<CxB> {
        let x = self.to_gcx(cat);
        let z = cat.zero_rep();
        let comps: Vec<Rep> = (0..WIN_LEN).map(|k| if degree(k) >= m { x.comp(k).clone() } else { z.clone() }).collect();
        let diffs = (0..WIN_LEN - 1)
            .map(|k| if degree(k) >= m { x.diff(k).unwrap().clone() } else { cat.zero_morphism(&comps[k], &comps[k + 1]) })
            .collect();
        CxB::from_gcx(cat, &Gcx::new(cat, false, comps, diffs)?)
    }

    /// Brutal truncation `σ_{<m}`: the quotient by `σ_{≥m}`.
    pub fn sigma_lt(&self, cat: &RepCategory, m: i32) -> Result<CxB> {
        let x = self.to_gcx(cat);
        let z = cat.zero_rep();
        let comps: Vec<Rep> = (0..WIN_LEN).map(|k| if degree(k) < m { x.comp(k).clone() } else { z.clone() }).collect();
        let diffs = (0..WIN_LEN - 1)
            .map(|k| {
                if degree(k) + 1 < m {
                    x.diff(k).unwrap().clone()
                } else {
                    cat.zero_morphism(&comps[k], &comps[k + 1])
                }
            })
            .collect();
        CxB::from_gcx(cat, &Gcx::new(cat, false, comps, diffs)?)
    }

    /// Intelligent truncation `τ_{≤m}`: `… → M^{m−1} → Z^m → 0`.
    pub fn tau_le(&self, cat: &RepCategory, m: i32) -> Result<CxB> {
        let x = self.to_gcx(cat);
        let km = index(m);
        let (zm, incl) = match x.diff(km) {
            Some(d) => cat.kernel(d, x.comp(km))?,
            None => (x.comp(km).clone(), cat.identity(x.comp(km))),
        };
        let z = cat.zero_rep();
        let mut comps: Vec<Rep> = (0..WIN_LEN).map(|k| if k < km { x.comp(k).clone() } else { z.clone() }).collect();
        comps[km] = zm.clone();
        let mut diffs: Vec<RepMorphism> = (0..WIN_LEN - 1)
            .map(|k| if k + 1 < km { x.diff(k).unwrap().clone() } else { cat.zero_morphism(&comps[k], &comps[k + 1]) })
            .collect();
        if km > 0 {
            let d = x.diff(km - 1).unwrap();
            diffs[km - 1] = lift(cat, &incl, &zm, d, x.comp(km - 1))?.expect("boundaries are cycles");
        }
        CxB::from_gcx(cat, &Gcx::new(cat, false, comps, diffs)?)
    }
}

impl TorusEltZ {
    pub fn single(alpha: Vec<i64>, m: i32) -> TorusEltZ {
        TorusEltZ { coords: BTreeMap::from([(m, alpha)]) }
    }

    fn lat(&self, n: usize) -> Result<Lat> {
        let mut l = vec![0; WIN_LEN * n];
        for (&m, a) in &self.coords {
            in_window(m)?;
            let k = index(m);
            l[k * n..(k + 1) * n].copy_from_slice(a);
        }
        Ok(l)
    }

    fn from_lat(l: &[i64], n: usize) -> TorusEltZ {
        let coords = (0..WIN_LEN)
            .filter(|&k| l[k * n..(k + 1) * n].iter().any(|&v| v != 0))
            .map(|k| (degree(k), l[k * n..(k + 1) * n].to_vec()))
            .collect();
        TorusEltZ { coords }
    }
}

#[derive(Debug)]
pub struct Sdhz {
    eng: SdEngine,
    stalk_form: Mutex<HashMap<(usize, usize, i32), i64>>,
}

impl Sdhz {
    pub fn new(cat: Cat) -> Result<Sdhz> {
        Ok(Sdhz { eng: SdEngine::new(cat, false)?, stalk_form: Mutex::new(HashMap::new()) })
    }

    pub fn engine(&self) -> &SdEngine {
        &self.eng
    }

    pub fn cat(&self) -> &Cat {
        self.eng.cat()
    }

    pub fn q(&self) -> u32 {
        self.eng.q()
    }

    fn n(&self) -> usize {
        self.cat().n()
    }

    pub fn one(&self) -> SdhzElement {
        self.eng.one()
    }

    pub fn class(&self, x: &CxB) -> Result<SdhzElement> {
        self.eng.class_of(&x.to_gcx(self.cat()))
    }

    /// Homology key from a degree-indexed map.
    pub fn hkey(&self, h: &BTreeMap<i32, Rep>) -> Result<HKey> {
        let mut key = self.eng.zero_hkey();
        for (&m, a) in h {
            in_window(m)?;
            key[index(m)] = self.cat().canonical(a)?;
        }
        Ok(key)
    }

    /// `K^t ⋄ [R(H)]`.
    pub fn basis(&self, t: &TorusEltZ, h: &BTreeMap<i32, Rep>) -> Result<SdhzElement> {
        Ok(self.eng.basis(t.lat(self.n())?, self.hkey(h)?))
    }

    pub fn torus(&self, t: &TorusEltZ) -> Result<SdhzElement> {
        Ok(self.eng.torus(t.lat(self.n())?))
    }

    /// `[u_{A,m}]`: the class of the stalk complex.
    pub fn u_gen(&self, a: &Rep, m: i32) -> Result<SdhzElement> {
        in_window(m)?;
        self.class(&CxB::stalk(self.cat(), a, m)?)
    }

    fn semisimple(&self, d: &[i64]) -> Result<Rep> {
        let cat = self.cat();
        let mut r = cat.zero_rep();
        for (i, &k) in d.iter().enumerate() {
            for _ in 0..k {
                r = cat.direct_sum(&r, &cat.simple(i)?);
            }
        }
        Ok(r)
    }

    /// `v_{α,m} = [v_{A,m}] ⋄ [v_{B,m}]^{-1}` for `α = A − B` split into its
    /// positive and negative parts.
    pub fn v_gen(&self, alpha: &[i64], m: i32) -> Result<SdhzElement> {
        in_window(m)?;
        let pos: Vec<i64> = alpha.iter().map(|&a| a.max(0)).collect();
        let neg: Vec<i64> = alpha.iter().map(|&a| (-a).max(0)).collect();
        let cat = self.cat();
        let va = self.class(&CxB::contractible(cat, &self.semisimple(&pos)?, m)?)?;
        let vb = self.class(&CxB::contractible(cat, &self.semisimple(&neg)?, m)?)?;
        let ((lb, _), cb) = vb.terms().iter().next().expect("acyclic class is one term");
        let inv = self.eng.torus_inverse(lb).scale(&cb.inv()?);
        self.eng.product(&va, &inv)
    }

    pub fn gen_element(&self, g: &Gen) -> Result<SdhzElement> {
        match g {
            Gen::U(a, m) => self.u_gen(a, *m),
            Gen::V(a, m) => self.v_gen(a, *m),
        }
    }

    fn check_window(&self, x: &SdhzElement) -> Result<()> {
        let n = self.n();
        for (l, h) in x.terms().keys() {
            for k in 0..WIN_LEN {
                if l[k * n..(k + 1) * n].iter().any(|&v| v != 0) || !h[k].is_zero() {
                    in_window(degree(k))?;
                }
            }
        }
        Ok(())
    }

    pub fn product_z(&self, x: &SdhzElement, y: &SdhzElement) -> Result<SdhzElement> {
        let p = self.eng.product(x, y)?;
        self.check_window(&p)?;
        Ok(p)
    }

    /// Exponent of `q` in `∏_p |Ext^p(X, Y)|^{(-1)^p}`, from a projective
    /// resolution of `X` by contractible complexes `K(P, k)`; the alternating
    /// sum of `dim Hom(P_p, Y)` stops once the resolution leaves the support
    /// of `Y`.
    pub fn euler_exponent(&self, x: &Gcx, y: &Gcx) -> Result<i64> {
        let cat = self.cat();
        let Some(&ymax) = y.support().last() else { return Ok(0) };
        let mut omega = x.clone();
        let mut sign = 1;
        let mut total = 0i64;
        for _ in 0..2 * WIN_LEN {
            let sup = omega.support();
            if sup.first().is_none_or(|&a| a > ymax) {
                return Ok(total);
            }
            let mut px = Gcx::zero(cat, false);
            let mut phi: ChainMap = px.zero_map(cat, &omega);
            for &k in &sup {
                let r = cat.min_proj_resolution(omega.comp(k))?;
                let piece = self.eng.contractible(&r.p0, k)?;
                let mut f = piece.zero_map(cat, &omega);
                f[k] = r.cover.clone();
                f[k + 1] = omega.diff(k).unwrap().after(&r.cover);
                total += sign * cat.hom_dim(&r.p0, y.comp(k))? as i64;
                px = px.direct_sum(cat, &piece);
                phi = phi.iter().zip(&f).map(|(a, b)| a.hstack(b)).collect();
            }
            let kb: Vec<Vec<FpMatrix>> = phi
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
            omega = px.subcomplex(cat, &kb)?.0;
            sign = -sign;
        }
        Err(Error::BudgetExceeded("resolution did not leave the support".into()))
    }

    /// Complexes whose classes combine to the generator, with signs.
    fn gen_complexes(&self, g: &Gen) -> Result<Vec<(i64, Gcx)>> {
        let cat = self.cat();
        Ok(match g {
            Gen::U(a, m) => vec![(1, CxB::stalk(cat, a, *m)?.to_gcx(cat))],
            Gen::V(a, m) => {
                let pos: Vec<i64> = a.iter().map(|&x| x.max(0)).collect();
                let neg: Vec<i64> = a.iter().map(|&x| (-x).max(0)).collect();
                vec![
                    (1, CxB::contractible(cat, &self.semisimple(&pos)?, *m)?.to_gcx(cat)),
                    (-1, CxB::contractible(cat, &self.semisimple(&neg)?, *m)?.to_gcx(cat)),
                ]
            }
        })
    }

    /// `⟨g1, g2⟩` by linear algebra.
    pub fn euler_pair_z(&self, g1: &Gen, g2: &Gen) -> Result<CoeffScalar> {
        let mut e = 0;
        for (s, x) in self.gen_complexes(g1)? {
            for (t, y) in self.gen_complexes(g2)? {
                e += s * t * self.euler_exponent(&x, &y)?;
            }
        }
        Ok(self.eng.qpow(e))
    }

    /// The closed forms for `⟨g1, g2⟩` on generators.
    pub fn euler_oracle(&self, g1: &Gen, g2: &Gen) -> CoeffScalar {
        self.euler_oracle_with(g1, g2, false)
    }

    /// `perturb` drops the alternating sign for `u`-pairs of distinct degrees.
    fn euler_oracle_with(&self, g1: &Gen, g2: &Gen, perturb: bool) -> CoeffScalar {
        let eu = |a: &[i64], b: &[i64]| self.eng.euler(a, b);
        let e = match (g1, g2) {
            (Gen::V(a, m), Gen::U(b, n)) => if m == n { eu(a, &b.dim_i64()) } else { 0 },
            (Gen::V(a, m), Gen::V(b, n)) => if m == n || *m == n + 1 { eu(a, b) } else { 0 },
            (Gen::U(b, n), Gen::V(a, m)) => if *m == n - 1 { eu(&b.dim_i64(), a) } else { 0 },
            (Gen::U(a, m), Gen::U(b, n)) => {
                let ab = eu(&a.dim_i64(), &b.dim_i64());
                match n.cmp(m) {
                    std::cmp::Ordering::Greater => if (n - m) % 2 == 0 || perturb { ab } else { -ab },
                    std::cmp::Ordering::Equal => ab,
                    std::cmp::Ordering::Less => 0,
                }
            }
        };
        self.eng.qpow(e)
    }

    /// `⟨S_i at 0, S_j at d⟩` as a power of `q`.
    fn stalk_exponent(&self, i: usize, j: usize, d: i32) -> Result<i64> {
        if let Some(&e) = self.stalk_form.lock().unwrap().get(&(i, j, d)) {
            return Ok(e);
        }
        let cat = self.cat();
        let base = if d >= 0 { 1 } else { (-d) as usize + 1 };
        let x = self.eng.stalk(&cat.simple(i)?, base);
        let y = self.eng.stalk(&cat.simple(j)?, (base as i32 + d) as usize);
        let e = self.euler_exponent(&x, &y)?;
        self.stalk_form.lock().unwrap().insert((i, j, d), e);
        Ok(e)
    }

    fn supports(&self, x: &SdhzElement) -> Vec<Vec<Vec<i64>>> {
        x.terms().keys().map(|(l, h)| self.eng.symbol_dims(l, h)).collect()
    }

    /// `v`-exponent of twist `mode` on component classes.
    fn twist_exponent(&self, mode: u8, x: &[Vec<i64>], y: &[Vec<i64>]) -> i64 {
        let n = self.n();
        let nz = |v: &Vec<Vec<i64>>| -> Vec<usize> { (0..WIN_LEN).filter(|&k| v[k].iter().any(|&a| a != 0)).collect() };
        let (xs, ys) = (nz(&x.to_vec()), nz(&y.to_vec()));
        let mut e = 0;
        for &k in &xs {
            for &l in &ys {
                let d = l as i32 - k as i32;
                e += match mode {
                    1 | 2 => {
                        let form = self.stalk_form.lock().unwrap();
                        let mut s = 0;
                        for i in 0..n {
                            for j in 0..n {
                                s += x[k][i] * y[l][j] * form[&(i, j, d)];
                            }
                        }
                        if mode == 1 { 2 * s } else { s }
                    }
                    3 => if d == 0 { self.eng.euler(&x[k], &y[l]) } else { 0 },
                    _ => if d % 2 == 0 { self.eng.euler(&x[k], &y[l]) } else { -self.eng.euler(&x[k], &y[l]) },
                };
            }
        }
        e
    }

    /// `x *_mode y` for the four twists.
    pub fn twist_mode(&self, mode: u8, x: &SdhzElement, y: &SdhzElement) -> Result<SdhzElement> {
        if !(1..=4).contains(&mode) {
            return Err(Error::Input(format!("twist mode {mode} is not in 1..=4")));
        }
        if mode <= 2 {
            let (sx, sy) = (self.supports(x), self.supports(y));
            let n = self.n();
            let mut offs = BTreeSet::new();
            for a in &sx {
                for b in &sy {
                    for k in (0..WIN_LEN).filter(|&k| a[k].iter().any(|&v| v != 0)) {
                        for l in (0..WIN_LEN).filter(|&l| b[l].iter().any(|&v| v != 0)) {
                            offs.insert(l as i32 - k as i32);
                        }
                    }
                }
            }
            for d in offs {
                for i in 0..n {
                    for j in 0..n {
                        self.stalk_exponent(i, j, d)?;
                    }
                }
            }
        }
        let p = self.eng.twisted_by(x, y, |a, b| self.twist_exponent(mode, a, b))?;
        self.check_window(&p)?;
        Ok(p)
    }

    pub fn render(&self, x: &SdhzElement) -> String {
        let n = self.n();
        self.eng.render(x, |l, h| {
            let t = TorusEltZ::from_lat(l, n);
            let tl: Vec<String> = t.coords.iter().map(|(m, a)| format!("{m}:{a:?}")).collect();
            let hs: Vec<String> = (0..WIN_LEN)
                .filter(|&k| !h[k].is_zero())
                .map(|k| format!("{}:{}", degree(k), self.cat().label(h[k].rep())))
                .collect();
            format!("v{{{}}}u{{{}}}", tl.join(","), hs.join(","))
        })
    }

    fn simple_dims(&self) -> Result<Vec<Vec<i64>>> {
        (0..self.n()).map(|i| Ok(self.cat().simple(i)?.dim_i64())).collect()
    }

    /// Every (U), (V), (UV) relation instance for `m ∈ {0,1}`, `p = m + 2`,
    /// vertices `i, j` and `α, β` among `±` simples. `perturb` drops the
    /// `(q − 1) v_{S_i,m}` term.
    pub fn verify_presentation(&self, perturb: bool) -> Result<Vec<Check>> {
        let cat = self.cat().clone();
        if !cat.quiver().is_dynkin() {
            return Err(Error::PreconditionError("quiver is not simply-laced Dynkin".into()));
        }
        let q = self.q();
        let n = self.n();
        let mut out = Vec::new();
        let m_ = |a: &SdhzElement, b: &SdhzElement| self.product_z(a, b);
        let r = |x: &SdhzElement| self.render(x);
        let simples = self.simple_dims()?;
        let mut roots = Vec::new();
        for s in &simples {
            roots.push(s.clone());
            roots.push(SdEngine::neg_lat(s));
        }
        let qe = |a: &[i64], b: &[i64]| self.eng.qpow(self.eng.euler(a, b));
        let v = CoeffScalar::sqrt_q(q);
        let vinv = v.inv()?;
        for m in 0..=1 {
            let p = m + 2;
            let u = |i: usize, d: i32| self.u_gen(&cat.simple(i).unwrap(), d);
            for i in 0..n {
                for j in 0..n {
                    // (U): relations of I_m(H(A)) through the untwisted Serre form.
                    if i != j {
                        let eij = self.eng.euler(&simples[i], &simples[j]);
                        let eji = self.eng.euler(&simples[j], &simples[i]);
                        let (ui, uj) = (u(i, m)?, u(j, m)?);
                        let res = match cat.quiver().edges_between(i, j) {
                            0 => m_(&ui, &uj)?.sub(&m_(&uj, &ui)?),
                            1 => {
                                let uii = m_(&ui, &ui)?;
                                let t1 = m_(&uii, &uj)?.scale(&CoeffScalar::v_power(q, 2 * eij));
                                let t2 = m_(&m_(&ui, &uj)?, &ui)?.scale(&(&(&v + &vinv) * &CoeffScalar::v_power(q, eij + eji)));
                                let t3 = m_(&uj, &uii)?.scale(&CoeffScalar::v_power(q, 2 * eji));
                                t1.sub(&t2).add(&t3)
                            }
                            _ => return Err(Error::PreconditionError("graph is not simply laced".into())),
                        };
                        out.push(Check::flag(format!("(U) I_{m} i={} j={}", i + 1, j + 1), res.is_zero(), r(&res), "0"));
                    }
                    let lhs = m_(&u(i, m)?, &u(j, m + 1)?)?;
                    let mut rhs = m_(&u(j, m + 1)?, &u(i, m)?)?;
                    if i == j && !perturb {
                        rhs = rhs.add(&self.v_gen(&simples[i], m)?.scale(&CoeffScalar::from_int(q, q as i64 - 1)));
                    }
                    out.push(Check::flag(format!("(U) u{}_{m} u{}_{} ", i + 1, j + 1, m + 1), lhs == rhs, r(&lhs), r(&rhs)));
                    let lhs = m_(&u(i, m)?, &u(j, p)?)?;
                    let rhs = m_(&u(j, p)?, &u(i, m)?)?;
                    out.push(Check::flag(format!("(U) u{}_{m} u{}_{p}", i + 1, j + 1), lhs == rhs, r(&lhs), r(&rhs)));
                    // (UV) with simples.
                    let sj = &simples[j];
                    for (bi, b) in roots.iter().enumerate() {
                        let tag = format!("i={} j={} root={bi}", i + 1, j + 1);
                        if i == 0 {
                            let lhs = m_(&self.v_gen(b, m)?, &u(j, m + 1)?)?;
                            let rhs = m_(&u(j, m + 1)?, &self.v_gen(b, m)?)?.scale(&qe(sj, b));
                            out.push(Check::flag(format!("(UV) v_{m} u_{} {tag}", m + 1), lhs == rhs, r(&lhs), r(&rhs)));
                            let lhs = m_(&self.v_gen(b, m)?, &u(j, p)?)?;
                            let rhs = m_(&u(j, p)?, &self.v_gen(b, m)?)?;
                            out.push(Check::flag(format!("(UV) v_{m} u_{p} {tag}"), lhs == rhs, r(&lhs), r(&rhs)));
                        }
                        if j == 0 {
                            let si = &simples[i];
                            let lhs = m_(&u(i, m)?, &self.v_gen(b, m)?)?;
                            let rhs = m_(&self.v_gen(b, m)?, &u(i, m)?)?.scale(&qe(b, si));
                            out.push(Check::flag(format!("(UV) u_{m} v_{m} {tag}"), lhs == rhs, r(&lhs), r(&rhs)));
                            for t in [m + 1, p] {
                                let lhs = m_(&u(i, m)?, &self.v_gen(b, t)?)?;
                                let rhs = m_(&self.v_gen(b, t)?, &u(i, m)?)?;
                                out.push(Check::flag(format!("(UV) u_{m} v_{t} {tag}"), lhs == rhs, r(&lhs), r(&rhs)));
                            }
                        }
                    }
                }
            }
            // (V).
            for (ai, a) in roots.iter().enumerate() {
                for (bi, b) in roots.iter().enumerate() {
                    let tag = format!("roots={ai},{bi}");
                    let (va, vb) = (self.v_gen(a, m)?, self.v_gen(b, m)?);
                    let lhs = m_(&va, &vb)?;
                    let rhs = m_(&vb, &va)?.scale(&qe(b, a).div(&qe(a, b))?);
                    out.push(Check::flag(format!("(V) v_{m} v_{m} {tag}"), lhs == rhs, r(&lhs), r(&rhs)));
                    let vb1 = self.v_gen(b, m + 1)?;
                    let lhs = m_(&va, &vb1)?;
                    let rhs = m_(&vb1, &va)?.scale(&qe(b, a));
                    out.push(Check::flag(format!("(V) v_{m} v_{} {tag}", m + 1), lhs == rhs, r(&lhs), r(&rhs)));
                    let vbp = self.v_gen(b, p)?;
                    let lhs = m_(&va, &vbp)?;
                    let rhs = m_(&vbp, &va)?;
                    out.push(Check::flag(format!("(V) v_{m} v_{p} {tag}"), lhs == rhs, r(&lhs), r(&rhs)));
                }
            }
            // The middle term of u_{A,m} ⋄ u_{A,m+1} for simple A.
            for i in 0..n {
                let s = cat.simple(i)?;
                let lhs = m_(&u(i, m)?, &u(i, m + 1)?)?;
                let sum = CxB::stalk(&cat, &s, m)?.direct_sum(&cat, &CxB::stalk(&cat, &s, m + 1)?)?;
                let mid = self.class(&CxB::contractible(&cat, &s, m)?)?;
                let rhs = self.class(&sum)?.add(&mid.scale(&CoeffScalar::from_int(q, q as i64 - 1)));
                out.push(Check::flag(
                    format!("u{}_{m} u{}_{} middle term v_(S{},{m})", i + 1, i + 1, m + 1, i + 1),
                    lhs == rhs,
                    r(&lhs),
                    r(&rhs),
                ));
            }
        }
        Ok(out)
    }

    /// `I_m(c [C]) = c [u_{C,m}]`.
    pub fn embed_im(&self, x: &HallElement, m: i32) -> Result<SdhzElement> {
        let mut out = SdElement::zero(self.q());
        for (k, c) in x.terms() {
            out = out.add(&self.u_gen(k.rep(), m)?.scale(c));
        }
        Ok(out)
    }

    /// `I_m` is multiplicative on all pairs with `dim A + dim B ≤ bound`, and
    /// sends distinct classes to distinct keys.
    pub fn embed_im_check(&self, hall: &HallAlgebra, m: i32, bound: usize) -> Result<Vec<Check>> {
        let cat = self.cat();
        let mut classes = Vec::new();
        for d in cat.dim_vectors_up_to(bound) {
            classes.extend(cat.iso_classes(&d)?);
        }
        let mut out = Vec::new();
        for a in &classes {
            for b in &classes {
                if a.total_dim() + b.total_dim() > bound {
                    continue;
                }
                let prod = hall.product(&hall.class(a.rep())?, &hall.class(b.rep())?)?;
                let lhs = self.embed_im(&prod, m)?;
                let rhs = self.product_z(&self.u_gen(a.rep(), m)?, &self.u_gen(b.rep(), m)?)?;
                let name = format!("I_{m}([{}][{}])", cat.label(a.rep()), cat.label(b.rep()));
                out.push(Check::flag(name, lhs == rhs, self.render(&lhs), self.render(&rhs)));
            }
        }
        let mut keys = BTreeSet::new();
        for a in &classes {
            keys.insert(self.u_gen(a.rep(), m)?.terms().keys().next().unwrap().1.clone());
        }
        out.push(Check::flag(
            format!("I_{m} keys distinct"),
            keys.len() == classes.len(),
            keys.len().to_string(),
            classes.len().to_string(),
        ));
        Ok(out)
    }

    /// Euler form by linear algebra against the closed forms on every pair of
    /// generators `u_{A,m}` (`A` indecomposable) and `v_{±S_i,m}`, `m ∈ degs`.
    pub fn euler_lemma_checks(&self, degs: &[i32], perturb: bool) -> Result<Vec<Check>> {
        let cat = self.cat();
        let mut gens = Vec::new();
        let mut labels = Vec::new();
        for &m in degs {
            for d in cat.dim_vectors_up_to(cat.quiver().num_vertices() + 1) {
                for a in cat.iso_classes(&d)? {
                    if !a.is_zero() && cat.decompose(a.rep())?.len() == 1 {
                        labels.push(format!("u[{}]_{m}", cat.label(a.rep())));
                        gens.push(Gen::U(a.rep().clone(), m));
                    }
                }
            }
            for s in self.simple_dims()? {
                for sign in [1, -1] {
                    let a: Vec<i64> = s.iter().map(|x| sign * x).collect();
                    labels.push(format!("v{a:?}_{m}"));
                    gens.push(Gen::V(a, m));
                }
            }
        }
        let mut out = Vec::new();
        for (g1, l1) in gens.iter().zip(&labels) {
            for (g2, l2) in gens.iter().zip(&labels) {
                let lhs = self.euler_pair_z(g1, g2)?;
                let rhs = self.euler_oracle_with(g1, g2, perturb);
                out.push(Check::compare(format!("<{l1},{l2}>"), &lhs, &rhs));
            }
        }
        Ok(out)
    }

    fn random_class(&self, rng: &mut impl Rng, max_dim: usize) -> Result<IsoClassKey> {
        let cat = self.cat();
        let mut all = Vec::new();
        for d in cat.dim_vectors_up_to(max_dim) {
            all.extend(cat.iso_classes(&d)?.into_iter().filter(|k| !k.is_zero()));
        }
        Ok(all[rng.gen_range(0..all.len())].clone())
    }

    /// A random u-generator, v-generator, or basis element in degrees `-1..=2`.
    pub fn random_element(&self, rng: &mut impl Rng) -> Result<(String, SdhzElement)> {
        let m = rng.gen_range(-1..=2);
        Ok(match rng.gen_range(0..3) {
            0 => {
                let a = self.random_class(rng, 2)?;
                (format!("u[{}]_{m}", self.cat().label(a.rep())), self.u_gen(a.rep(), m)?)
            }
            1 => {
                let s = self.simple_dims()?;
                let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                let a: Vec<i64> = s[rng.gen_range(0..s.len())].iter().map(|x| sign * x).collect();
                (format!("v{a:?}_{m}"), self.v_gen(&a, m)?)
            }
            _ => {
                let a = self.random_class(rng, 1)?;
                let h = BTreeMap::from([(m, a.rep().clone())]);
                (format!("b[{}]_{m}", self.cat().label(a.rep())), self.basis(&TorusEltZ::default(), &h)?)
            }
        })
    }

    pub fn associativity_checks(&self, rng: &mut impl Rng, samples: usize) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for s in 0..samples {
            let (na, a) = self.random_element(rng)?;
            let (nb, b) = self.random_element(rng)?;
            let (nc, c) = self.random_element(rng)?;
            let lhs = self.product_z(&self.product_z(&a, &b)?, &c)?;
            let rhs = self.product_z(&a, &self.product_z(&b, &c)?)?;
            out.push(Check::flag(format!("#{s} ({na} {nb}) {nc}"), lhs == rhs, self.render(&lhs), self.render(&rhs)));
        }
        Ok(out)
    }

    /// Random homology in degrees `-1..=2` with total dimension at most 4.
    fn random_homology(&self, rng: &mut impl Rng) -> Result<BTreeMap<i32, Rep>> {
        let mut h = BTreeMap::new();
        let mut budget = 4usize;
        for m in -1..=2 {
            if budget == 0 || rng.gen_bool(0.4) {
                continue;
            }
            let a = self.random_class(rng, budget.min(2))?;
            budget -= a.total_dim();
            h.insert(m, a.rep().clone());
        }
        Ok(h)
    }

    /// Basis elements rebuilt from u-generators taken in decreasing degree
    /// order and an inverse torus factor.
    pub fn generation_checks(&self, rng: &mut impl Rng, samples: usize) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for s in 0..samples {
            let h = self.random_homology(rng)?;
            let target = self.basis(&TorusEltZ::default(), &h)?;
            let mut prod = self.one();
            for (&m, a) in h.iter().rev() {
                prod = self.product_z(&prod, &self.u_gen(a, m)?)?;
            }
            let name = format!("#{s} {}", self.render(&target));
            if prod.terms().len() != 1 {
                out.push(Check::flag(name, false, self.render(&prod), self.render(&target)));
                continue;
            }
            let ((lat, key), c) = prod.terms().iter().next().unwrap();
            let rebuilt = self.eng.product(&self.eng.torus_inverse(lat), &prod)?.scale(&c.inv()?);
            let ok = key == &self.hkey(&h)? && rebuilt == target;
            out.push(Check::flag(name, ok, self.render(&rebuilt), self.render(&target)));
        }
        Ok(out)
    }

    /// Component classes add under the product, and so does the alternating
    /// sum of homology dimensions.
    pub fn additivity_checks(&self, rng: &mut impl Rng, samples: usize) -> Result<Vec<Check>> {
        let n = self.n();
        let chi = |h: &HKey| -> Vec<i64> {
            let mut v = vec![0; n];
            for (k, a) in h.iter().enumerate() {
                let sgn = if degree(k) % 2 == 0 { 1 } else { -1 };
                for (vi, d) in v.iter_mut().zip(a.dim()) {
                    *vi += sgn * *d as i64;
                }
            }
            v
        };
        let mut out = Vec::new();
        for s in 0..samples {
            let (na, a) = self.random_element(rng)?;
            let (nb, b) = self.random_element(rng)?;
            let p = self.product_z(&a, &b)?;
            let ((la, ha), _) = a.terms().iter().next().unwrap();
            let ((lb, hb), _) = b.terms().iter().next().unwrap();
            let want: Vec<Vec<i64>> = self
                .eng
                .symbol_dims(la, ha)
                .iter()
                .zip(&self.eng.symbol_dims(lb, hb))
                .map(|(x, y)| SdEngine::add_lat(x, y))
                .collect();
            let want_chi = SdEngine::add_lat(&chi(ha), &chi(hb));
            let ok = p.terms().keys().all(|(l, h)| self.eng.symbol_dims(l, h) == want && chi(h) == want_chi);
            out.push(Check::flag(format!("#{s} {na} {nb}"), ok, self.render(&p), format!("{want_chi:?}")));
        }
        Ok(out)
    }

    /// `[L] = [K ⊕ M]` on random conflations with acyclic `K`.
    pub fn conflation_checks(&self, rng: &mut impl Rng, samples: usize) -> Result<Vec<Check>> {
        let idx: Vec<usize> = (-1..=2).map(index).collect();
        (0..samples).map(|s| self.eng.check_conflation(rng, &idx, format!("#{s}"))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::FieldSpec;
    use crate::quiver::Quiver;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn alg(n: usize, q: u32) -> Sdhz {
        Sdhz::new(RepCategory::new(Quiver::linear_a(n), FieldSpec::new(q).unwrap())).unwrap()
    }

    fn failures(c: &[Check]) -> Vec<String> {
        c.iter().filter(|c| !c.passed()).map(|c| format!("{}: {} != {}", c.name, c.lhs, c.rhs)).collect()
    }

    #[test]
    fn trivial_generators() {
        let z = alg(2, 2);
        let zero = z.cat().zero_rep();
        assert_eq!(z.u_gen(&zero, 0).unwrap(), z.one());
        assert_eq!(z.v_gen(&[0, 0], 3).unwrap(), z.one());
        assert!(matches!(z.u_gen(&zero, 9), Err(Error::WindowExceeded(9))));
    }

    #[test]
    fn contractible_class_is_torus() {
        let z = alg(2, 3);
        let s1 = z.cat().simple(0).unwrap();
        let t = TorusEltZ::single(vec![1, 0], 1);
        assert_eq!(z.v_gen(&[1, 0], 1).unwrap(), z.torus(&t).unwrap());
        assert_eq!(z.class(&CxB::contractible(z.cat(), &s1, 1).unwrap()).unwrap(), z.torus(&t).unwrap());
    }

    #[test]
    fn hom_free_stalks_commute_to_sum() {
        let z = alg(2, 2);
        let c = z.cat();
        let (s1, s2) = (c.simple(0).unwrap(), c.simple(1).unwrap());
        let lhs = z.product_z(&z.u_gen(&s1, 0).unwrap(), &z.u_gen(&s2, 1).unwrap()).unwrap();
        let sum = CxB::stalk(c, &s1, 0).unwrap().direct_sum(c, &CxB::stalk(c, &s2, 1).unwrap()).unwrap();
        assert_eq!(lhs, z.class(&sum).unwrap());
    }

    #[test]
    fn euler_example_a2() {
        let z = alg(2, 2);
        let s2 = z.cat().simple(1).unwrap();
        let e = z.euler_pair_z(&Gen::V(vec![1, 0], 0), &Gen::U(s2, 0)).unwrap();
        assert_eq!(e, CoeffScalar::q_power(2, -1));
        assert_eq!(failures(&z.euler_lemma_checks(&[0, 1, 2], false).unwrap()), Vec::<String>::new());
    }

    #[test]
    fn twists() {
        let z = alg(2, 2);
        let c = z.cat();
        let (s1, s2) = (c.simple(0).unwrap(), c.simple(1).unwrap());
        let (a, b) = (z.u_gen(&s1, 0).unwrap(), z.u_gen(&s2, 1).unwrap());
        let plain = z.product_z(&a, &b).unwrap();
        let e = z.engine().euler(&s1.dim_i64(), &s2.dim_i64());
        assert_eq!(z.twist_mode(2, &a, &b).unwrap(), plain.scale(&CoeffScalar::v_power(2, -e)));
        assert_eq!(z.twist_mode(3, &a, &b).unwrap(), plain);
        assert_eq!(z.twist_mode(1, &z.one(), &a).unwrap(), a);
        assert!(z.twist_mode(5, &a, &b).is_err());
    }

    #[test]
    fn twisted_products_associate() {
        use rand::SeedableRng;
        let z = alg(2, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..8 {
            let (_, a) = z.random_element(&mut rng).unwrap();
            let (_, b) = z.random_element(&mut rng).unwrap();
            let (_, c) = z.random_element(&mut rng).unwrap();
            for mode in 1..=4 {
                let l = z.twist_mode(mode, &z.twist_mode(mode, &a, &b).unwrap(), &c).unwrap();
                let r = z.twist_mode(mode, &a, &z.twist_mode(mode, &b, &c).unwrap()).unwrap();
                assert_eq!(l, r, "twist {mode}");
            }
        }
    }

    #[test]
    fn truncations() {
        let z = alg(2, 2);
        let c = z.cat();
        let p1 = c.projective(0).unwrap();
        let x = CxB::contractible(c, &p1, 0).unwrap();
        assert_eq!(x.sigma_ge(c, 1).unwrap(), CxB::stalk(c, &p1, 1).unwrap());
        assert_eq!(x.sigma_lt(c, 1).unwrap(), CxB::stalk(c, &p1, 0).unwrap());
        assert_eq!(x.tau_le(c, 0).unwrap().total_dim(), 0);
        assert_eq!(x.tau_le(c, 1).unwrap(), x);
    }

    #[test]
    fn presentation_a2() {
        let z = alg(2, 2);
        assert_eq!(failures(&z.verify_presentation(false).unwrap()), Vec::<String>::new());
        assert!(!failures(&z.verify_presentation(true).unwrap()).is_empty());
    }

    #[test]
    fn embedding_and_properties() {
        let z = alg(2, 2);
        let hall = HallAlgebra::new(z.cat().clone());
        assert_eq!(failures(&z.embed_im_check(&hall, 0, 4).unwrap()), Vec::<String>::new());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(failures(&z.associativity_checks(&mut rng, 10).unwrap()), Vec::<String>::new());
        assert_eq!(failures(&z.generation_checks(&mut rng, 10).unwrap()), Vec::<String>::new());
        assert_eq!(failures(&z.additivity_checks(&mut rng, 10).unwrap()), Vec::<String>::new());
        assert_eq!(failures(&z.conflation_checks(&mut rng, 10).unwrap()), Vec::<String>::new());
    }
}
