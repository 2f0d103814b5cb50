//! The Z/2-graded semi-derived Hall algebra of a quiver, its twisted and
//! reduced twisted forms, Bridgeland's generators, and the reflection
//! isomorphisms.
//!
//! Unreduced elements are written in the symbols `K^{(α,β)} ⋄ [C(H0,H1)]`;
//! reduced elements carry one lattice vector `γ = α − β` and are written in
//! the symbols `K̃_γ * [C(H0,H1)]` of the twisted product.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use crate::check::Check;
use crate::complex::Gcx;
use crate::cx2::{self, Cx2, QisKey2, Summand2};
use crate::error::{Error, Result};
use crate::ff::{CoeffScalar, FpMatrix};
use crate::hall::{HallAlgebra, HallElement};
use crate::quiver::{checked_size, Cat, Counter, IsoClassKey, Rep, RepCategory, RepMorphism, BUDGET};
use crate::sdcore::{HKey, Lat, SdElement, SdEngine};

/// Element of the unreduced algebra.
pub type Sdh2Element = SdElement;
/// Element of the reduced twisted algebra; lattice entries are `γ ∈ Z^n`.
pub type Reduced2 = SdElement;

/// `K^{(α,β)}`: `α` counts `K_P`-type classes, `β` counts `K_P*`-type
/// classes, both as dimension vectors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TorusElt2 {
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm2 {
    pub coeff: CoeffScalar,
    pub torus: TorusElt2,
    pub key: QisKey2,
}

/// Images of the quantum group generators.
#[derive(Debug, Clone)]
pub struct QgImages {
    pub e: Vec<Reduced2>,
    pub f: Vec<Reduced2>,
    pub k: Vec<Reduced2>,
    pub kinv: Vec<Reduced2>,
}

#[derive(Debug)]
pub struct Sdh2 {
    eng: SdEngine,
}

impl TorusElt2 {
    pub fn zero(n: usize) -> Self {
        TorusElt2 { alpha: vec![0; n], beta: vec![0; n] }
    }

    pub fn lat(&self) -> Lat {
        [self.alpha.clone(), self.beta.clone()].concat()
    }

    pub fn from_lat(l: &[i64]) -> Self {
        let n = l.len() / 2;
        TorusElt2 { alpha: l[..n].to_vec(), beta: l[n..].to_vec() }
    }
}

fn hkey(k: &QisKey2) -> HKey {
    vec![k.h0.clone(), k.h1.clone()]
}

fn qkey(h: &HKey) -> QisKey2 {
    QisKey2 { h0: h[0].clone(), h1: h[1].clone() }
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl Sdh2 {
    pub fn new(cat: Cat) -> Result<Sdh2> {
        Ok(Sdh2 { eng: SdEngine::new(cat, true)? })
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

    pub fn zero_key(&self) -> QisKey2 {
        qkey(&self.eng.zero_hkey())
    }

    pub fn key_of(&self, h0: &Rep, h1: &Rep) -> Result<QisKey2> {
        Ok(QisKey2 { h0: self.cat().canonical(h0)?, h1: self.cat().canonical(h1)? })
    }

    /// `⟨K^s, K^t⟩`.
    pub fn torus_euler(&self, s: &TorusElt2, t: &TorusElt2) -> CoeffScalar {
        self.eng.qpow(self.eng.pair_lat(&s.lat(), &t.lat()))
    }

    pub fn normal_form(&self, x: &Cx2) -> Result<NormalForm2> {
        let f = self.eng.nf(x.gcx())?;
        Ok(NormalForm2 { coeff: self.eng.qpow(f.exp), torus: TorusElt2::from_lat(&f.lat), key: qkey(&f.key) })
    }

    /// Normal form read off a Krull–Schmidt decomposition: the acyclic
    /// summands give the torus part, the rest is the minimal complex.
    pub fn normal_form_by_decomposition(&self, x: &Cx2) -> Result<NormalForm2> {
        let cat = self.cat();
        if !x.has_projective_components(cat) {
            return Err(Error::PreconditionError("components are not projective".into()));
        }
        let mut t = TorusElt2::zero(self.n());
        let mut rest = Cx2::zero(cat);
        for s in cx2::decompose2(cat, x)? {
            match s {
                Summand2::Kp(p) => t.alpha = SdEngine::add_lat(&t.alpha, &p.dim_i64()),
                Summand2::KpStar(p) => t.beta = SdEngine::add_lat(&t.beta, &p.dim_i64()),
                Summand2::Other(y) => rest = rest.direct_sum(cat, &y),
            }
        }
        let dims: Vec<Vec<i64>> = rest.gcx().comps().iter().map(|c| c.dim_i64()).collect();
        let coeff = self.eng.qpow(self.eng.pair_lat_cx(&t.lat(), &dims));
        Ok(NormalForm2 { coeff, torus: t, key: cx2::qis_key(cat, &rest)? })
    }

    pub fn element(&self, nf: &NormalForm2) -> Sdh2Element {
        SdElement::term(self.q(), nf.torus.lat(), hkey(&nf.key), nf.coeff.clone())
    }

    pub fn class(&self, x: &Cx2) -> Result<Sdh2Element> {
        self.eng.class_of(x.gcx())
    }

    pub fn basis(&self, t: &TorusElt2, key: &QisKey2) -> Sdh2Element {
        self.eng.basis(t.lat(), hkey(key))
    }

    pub fn one(&self) -> Sdh2Element {
        self.eng.one()
    }

    pub fn representative(&self, key: &QisKey2) -> Result<Cx2> {
        Ok(Cx2::from_gcx(self.eng.rep_complex(&hkey(key))?))
    }

    pub fn product2(&self, x: &Sdh2Element, y: &Sdh2Element) -> Result<Sdh2Element> {
        self.eng.product(x, y)
    }

    /// Exponent of `v` in `⟨X, Y⟩_cw` for component classes `x`, `y`.
    pub fn cw_exponent(&self, x: &[Vec<i64>], y: &[Vec<i64>]) -> i64 {
        self.eng.euler(&x[0], &y[0]) + self.eng.euler(&x[1], &y[1])
    }

    pub fn twisted_product2(&self, x: &Sdh2Element, y: &Sdh2Element) -> Result<Sdh2Element> {
        self.eng.twisted_by(x, y, |a, b| self.cw_exponent(a, b))
    }

    fn cw_symbol(&self, lat: &[i64], key: &HKey) -> i64 {
        self.cw_exponent(&self.eng.lat_components(lat), &self.eng.rep_dims(key))
    }

    /// Pass to the quotient by `K_α * K_α* = 1`.
    pub fn reduce(&self, x: &Sdh2Element) -> Reduced2 {
        let n = self.n();
        x.map_symbols(|l, h| {
            let c = CoeffScalar::v_power(self.q(), -self.cw_symbol(l, h));
            (sub(&l[..n], &l[n..]), h.clone(), c)
        })
    }

    /// The preimage with `β = 0` of a reduced element.
    pub fn lift(&self, x: &Reduced2) -> Sdh2Element {
        let n = self.n();
        x.map_symbols(|g, h| {
            let lat = [g.clone(), vec![0; n]].concat();
            let c = CoeffScalar::v_power(self.q(), self.cw_symbol(&lat, h));
            (lat, h.clone(), c)
        })
    }

    pub fn reduced_product(&self, x: &Reduced2, y: &Reduced2) -> Result<Reduced2> {
        Ok(self.reduce(&self.twisted_product2(&self.lift(x), &self.lift(y))?))
    }

    pub fn reduced_one(&self) -> Reduced2 {
        SdElement::term(self.q(), vec![0; self.n()], self.eng.zero_hkey(), CoeffScalar::one(self.q()))
    }

    /// `K̃_γ` in the reduced algebra.
    pub fn reduced_torus(&self, g: &[i64]) -> Reduced2 {
        SdElement::term(self.q(), g.to_vec(), self.eng.zero_hkey(), CoeffScalar::one(self.q()))
    }

    /// `[0 ⇄ A]`.
    pub fn e_class(&self, a: &Rep) -> Result<Sdh2Element> {
        self.class(&Cx2::stalk1(self.cat(), a))
    }

    /// `[A ⇄ 0]`.
    pub fn f_class(&self, a: &Rep) -> Result<Sdh2Element> {
        self.class(&Cx2::stalk0(self.cat(), a))
    }

    pub fn k_class(&self, alpha: &[i64]) -> Sdh2Element {
        self.eng.torus([alpha.to_vec(), vec![0; self.n()]].concat())
    }

    pub fn kstar_class(&self, alpha: &[i64]) -> Sdh2Element {
        self.eng.torus([vec![0; self.n()], alpha.to_vec()].concat())
    }

    /// The shift involution on unreduced elements.
    pub fn star(&self, x: &Sdh2Element) -> Sdh2Element {
        let n = self.n();
        let one = CoeffScalar::one(self.q());
        x.map_symbols(|l, h| ([l[n..].to_vec(), l[..n].to_vec()].concat(), vec![h[1].clone(), h[0].clone()], one.clone()))
    }

    /// The shift involution on reduced elements.
    pub fn star_reduced(&self, x: &Reduced2) -> Reduced2 {
        let one = CoeffScalar::one(self.q());
        x.map_symbols(|g, h| (SdEngine::neg_lat(g), vec![h[1].clone(), h[0].clone()], one.clone()))
    }

    fn label_key(&self, h: &HKey) -> String {
        format!("[{}|{}]", self.cat().label(h[0].rep()), self.cat().label(h[1].rep()))
    }

    pub fn render(&self, x: &Sdh2Element) -> String {
        let n = self.n();
        self.eng.render(x, |l, h| format!("K({:?};{:?}){}", &l[..n], &l[n..], self.label_key(h)))
    }

    pub fn render_reduced(&self, x: &Reduced2) -> String {
        self.eng.render(x, |g, h| format!("K({g:?}){}", self.label_key(h)))
    }

    /// Bridgeland's assignment `E_i ↦ [0⇄S_i]/(q−1)`, `F_i ↦ −√q [S_i⇄0]/(q−1)`,
    /// `K_i ↦ K̃_{S_i}`. `perturb` drops the `−√q`.
    pub fn quantum_group_images(&self, perturb: bool) -> Result<QgImages> {
        let q = self.q();
        let inv = CoeffScalar::from_frac(q, 1, q as i64 - 1)?;
        let fpre = if perturb { inv.clone() } else { &(-&CoeffScalar::sqrt_q(q)) * &inv };
        let mut out = QgImages { e: vec![], f: vec![], k: vec![], kinv: vec![] };
        for i in 0..self.n() {
            let s = self.cat().simple(i)?;
            out.e.push(self.reduce(&self.e_class(&s)?).scale(&inv));
            out.f.push(self.reduce(&self.f_class(&s)?).scale(&fpre));
            let d = s.dim_i64();
            out.k.push(self.reduced_torus(&d));
            out.kinv.push(self.reduced_torus(&SdEngine::neg_lat(&d)));
        }
        Ok(out)
    }

    /// Quantum group relations for the images of the generators.
    pub fn verify_quantum_group(&self, perturb: bool) -> Result<Vec<Check>> {
        let cat = self.cat();
        if !cat.quiver().is_dynkin() {
            return Err(Error::PreconditionError("quiver is not simply-laced Dynkin".into()));
        }
        let g = self.quantum_group_images(perturb)?;
        let q = self.q();
        let n = self.n();
        let v = CoeffScalar::sqrt_q(q);
        let vinv = v.inv()?;
        let m = |a: &Reduced2, b: &Reduced2| self.reduced_product(a, b);
        let r = |x: &Reduced2| self.render_reduced(x);
        let sym = |i: usize, j: usize| -> i64 {
            let (a, b) = (cat.simple(i).unwrap().dim_i64(), cat.simple(j).unwrap().dim_i64());
            self.eng.euler(&a, &b) + self.eng.euler(&b, &a)
        };
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let a = sym(i, j);
                let lhs = m(&m(&g.k[i], &g.e[j])?, &g.kinv[i])?;
                let rhs = g.e[j].scale(&CoeffScalar::v_power(q, a));
                out.push(Check::flag(format!("KEK^-1 i={} j={}", i + 1, j + 1), lhs == rhs, r(&lhs), r(&rhs)));
                let lhs = m(&m(&g.k[i], &g.f[j])?, &g.kinv[i])?;
                let rhs = g.f[j].scale(&CoeffScalar::v_power(q, -a));
                out.push(Check::flag(format!("KFK^-1 i={} j={}", i + 1, j + 1), lhs == rhs, r(&lhs), r(&rhs)));
                let lhs = m(&g.e[i], &g.f[j])?.sub(&m(&g.f[j], &g.e[i])?);
                let rhs = if i == j {
                    g.k[i].sub(&g.kinv[i]).scale(&(&v - &vinv).inv()?)
                } else {
                    SdElement::zero(q)
                };
                out.push(Check::flag(format!("[E,F] i={} j={}", i + 1, j + 1), lhs == rhs, r(&lhs), r(&rhs)));
                if i == j {
                    continue;
                }
                for (name, x) in [("E", &g.e), ("F", &g.f)] {
                    let res = match a {
                        0 => m(&x[i], &x[j])?.sub(&m(&x[j], &x[i])?),
                        -1 => {
                            let xi2 = m(&x[i], &x[i])?;
                            let t1 = m(&xi2, &x[j])?;
                            let t2 = m(&m(&x[i], &x[j])?, &x[i])?.scale(&(&v + &vinv));
                            let t3 = m(&x[j], &xi2)?;
                            t1.sub(&t2).add(&t3)
                        }
                        _ => return Err(Error::PreconditionError("graph is not simply laced".into())),
                    };
                    out.push(Check::flag(
                        format!("Serre {name} i={} j={}", i + 1, j + 1),
                        res.is_zero(),
                        r(&res),
                        "0".to_string(),
                    ));
                }
            }
        }
        Ok(out)
    }

    /// `K^λ ⋄ K^μ = ⟨λ,μ⟩^{-1} K^{λ+μ}` and the commutation rule between an
    /// inverse torus generator and a torus generator, on all pairs of simple
    /// projective-class generators.
    pub fn verify_torus_commutation(&self) -> Result<Vec<Check>> {
        let n = self.n();
        let mut gens: Vec<Lat> = Vec::new();
        for i in 0..n {
            let p = self.cat().projective(i)?.dim_i64();
            gens.push([p.clone(), vec![0; n]].concat());
            gens.push([vec![0; n], p].concat());
        }
        let e = &self.eng;
        let mut out = Vec::new();
        for (a, la) in gens.iter().enumerate() {
            for (b, lb) in gens.iter().enumerate() {
                let k1inv = e.torus_inverse(la);
                let k2inv = e.torus_inverse(lb);
                let lhs = e.product(&k1inv, &k2inv)?;
                let sum = SdEngine::add_lat(la, lb);
                let rhs = e.torus_inverse(&sum).scale(&e.qpow(e.pair_lat(lb, la)));
                out.push(Check::flag(format!("inverse product {a},{b}"), lhs == rhs, self.render(&lhs), self.render(&rhs)));
                let k2 = e.torus(lb.clone());
                let lhs = e.product(&k1inv, &k2)?;
                let rhs = e.product(&k2, &k1inv)?.scale(&e.qpow(e.pair_lat(la, lb) - e.pair_lat(lb, la)));
                out.push(Check::flag(format!("inverse commutation {a},{b}"), lhs == rhs, self.render(&lhs), self.render(&rhs)));
            }
        }
        Ok(out)
    }

    /// Indecomposable complexes with projective components: stalks of
    /// indecomposable projectives, `C_A`, `ΣC_A`, `K_P`, `K_P*`.
    pub fn indecomposable_projective_complexes(&self, max_dim: usize) -> Result<Vec<Cx2>> {
        let cat = self.cat();
        let mut out = Vec::new();
        let mut seen: Vec<IsoClassKey> = Vec::new();
        for d in cat.dim_vectors_up_to(max_dim) {
            for a in cat.iso_classes(&d)? {
                if a.is_zero() || cat.decompose(a.rep())?.len() != 1 || seen.contains(&a) {
                    continue;
                }
                seen.push(a.clone());
                let projective = cat.resolution_dims(a.rep()).0.iter().all(|&x| x == 0);
                let c = cx2::minimal_complex(cat, a.rep(), &cat.zero_rep())?;
                if c.total_dim() <= max_dim {
                    out.push(c.clone());
                    out.push(c.shift(cat));
                }
                if projective && 2 * a.total_dim() <= max_dim {
                    out.push(cx2::make_kp(cat, a.rep()));
                    out.push(cx2::make_kp_star(cat, a.rep()));
                }
            }
        }
        Ok(out)
    }

    /// All projective-component complexes up to isomorphism with total
    /// dimension at most `max_dim`, as direct sums of indecomposables.
    pub fn projective_complexes(&self, max_dim: usize) -> Result<Vec<Cx2>> {
        let ind = self.indecomposable_projective_complexes(max_dim)?;
        let mut out = Vec::new();
        let mut stack: Vec<(usize, Cx2)> = vec![(0, Cx2::zero(self.cat()))];
        while let Some((start, x)) = stack.pop() {
            out.push(x.clone());
            for (j, y) in ind.iter().enumerate().skip(start) {
                if x.total_dim() + y.total_dim() <= max_dim {
                    stack.push((j, x.direct_sum(self.cat(), y)));
                }
            }
        }
        Ok(out)
    }

    /// `[L] ⋄ [M]` in the localized Hall algebra of projective-component
    /// complexes, by counting subcomplexes of every complex structure on
    /// `M ⊕ L`.
    pub fn hall_product_by_counting(&self, l: &Cx2, m: &Cx2) -> Result<Sdh2Element> {
        let cat = self.cat();
        let x0 = cat.direct_sum(m.m0(), l.m0());
        let x1 = cat.direct_sum(m.m1(), l.m1());
        let h01 = cat.hom_basis(&x0, &x1)?;
        let h10 = cat.hom_basis(&x1, &x0)?;
        match checked_size(cat.p(), h01.len() + h10.len()) {
            Some(s) if s <= BUDGET => {}
            _ => return Err(Error::BudgetExceeded("differential enumeration".into())),
        }
        let a_l = l.gcx().aut_count(cat)?;
        let a_m = m.gcx().aut_count(cat)?;
        let aut = cat.aut_count(&x0)? * cat.aut_count(&x1)?;
        let subs0 = cat.submodules_with_dim(&x0, m.m0().dim())?;
        let subs1 = cat.submodules_with_dim(&x1, m.m1().dim())?;
        let z01 = cat.zero_morphism(&x0, &x1);
        let z10 = cat.zero_morphism(&x1, &x0);
        let comb = |b: &[RepMorphism], c: &[u32], z: &RepMorphism| {
            let mut f = z.clone();
            for (x, &k) in b.iter().zip(c) {
                if k != 0 {
                    f = f.add(&x.scale(k));
                }
            }
            f
        };
        let mut acc = SdElement::zero(self.q());
        for c0 in Counter::new(cat.p(), h01.len()) {
            let d0 = comb(&h01, &c0, &z01);
            for c1 in Counter::new(cat.p(), h10.len()) {
                let d1 = comb(&h10, &c1, &z10);
                if !d1.after(&d0).is_zero() || !d0.after(&d1).is_zero() {
                    continue;
                }
                let x = Cx2::new(cat, x0.clone(), x1.clone(), d0.clone(), d1.clone())?;
                let mut g: u64 = 0;
                for u0 in &subs0 {
                    for u1 in &subs1 {
                        let stable = (0..cat.n()).all(|i| {
                            let a = d0.comp(i).mul(&u0[i]);
                            let b = d1.comp(i).mul(&u1[i]);
                            in_span(&u1[i], &a) && in_span(&u0[i], &b)
                        });
                        if !stable {
                            continue;
                        }
                        let bases = vec![u0.clone(), u1.clone()];
                        let (sc, _) = x.gcx().subcomplex(cat, &bases)?;
                        if !sc.is_isomorphic(cat, m.gcx())? {
                            continue;
                        }
                        let qc = quotient_complex(cat, x.gcx(), &bases)?;
                        if qc.is_isomorphic(cat, l.gcx())? {
                            g += 1;
                        }
                    }
                }
                if g == 0 {
                    continue;
                }
                let w = BigRational::new(BigInt::from(g) * BigInt::from(a_l) * BigInt::from(a_m), aut.clone());
                let c = CoeffScalar::new(self.q(), w, BigRational::zero());
                acc = acc.add(&self.class(&x)?.scale(&c));
            }
        }
        Ok(acc)
    }

    /// `product2` against [`Self::hall_product_by_counting`] on all pairs of
    /// projective-component complexes with total dimension at most `bound`.
    pub fn bridgeland_compare(&self, bound: usize) -> Result<Vec<Check>> {
        let all = self.projective_complexes(bound)?;
        let mut out = Vec::new();
        for l in &all {
            for m in &all {
                if l.total_dim() + m.total_dim() > bound {
                    continue;
                }
                let lhs = self.product2(&self.class(l)?, &self.class(m)?)?;
                let rhs = self.hall_product_by_counting(l, m)?;
                out.push(Check::flag(
                    format!("{} * {}", l.render(self.cat()), m.render(self.cat())),
                    lhs == rhs,
                    self.render(&lhs),
                    self.render(&rhs),
                ));
            }
        }
        Ok(out)
    }

    /// `J_+`: the image of a Hall algebra element under `[A] ↦ E_A`.
    pub fn embed_plus(&self, x: &HallElement) -> Result<Sdh2Element> {
        let mut out = SdElement::zero(self.q());
        for (k, c) in x.terms() {
            out = out.add(&self.e_class(k.rep())?.scale(c));
        }
        Ok(out)
    }
}

impl Sdh2 {
    fn random_class(&self, rng: &mut impl Rng, max_dim: usize) -> Result<IsoClassKey> {
        let cat = self.cat();
        let mut all = Vec::new();
        for d in cat.dim_vectors_up_to(max_dim) {
            all.extend(cat.iso_classes(&d)?.into_iter().filter(|k| !k.is_zero()));
        }
        Ok(all[rng.gen_range(0..all.len())].clone())
    }

    /// A random `E_A`, `F_A`, torus generator `K^{(±S_i, 0)}` or
    /// `K^{(0, ±S_i)}`, or basis element.
    pub fn random_element(&self, rng: &mut impl Rng) -> Result<(String, Sdh2Element)> {
        let cat = self.cat();
        Ok(match rng.gen_range(0..4) {
            0 => {
                let a = self.random_class(rng, 2)?;
                (format!("E[{}]", cat.label(a.rep())), self.e_class(a.rep())?)
            }
            1 => {
                let a = self.random_class(rng, 2)?;
                (format!("F[{}]", cat.label(a.rep())), self.f_class(a.rep())?)
            }
            2 => {
                let i = rng.gen_range(0..self.n());
                let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                let mut a = vec![0; self.n()];
                a[i] = sign;
                if rng.gen_bool(0.5) {
                    (format!("K{a:?}"), self.k_class(&a))
                } else {
                    (format!("K*{a:?}"), self.kstar_class(&a))
                }
            }
            _ => {
                let a = self.random_class(rng, 1)?;
                let b = self.random_class(rng, 1)?;
                let k = QisKey2 { h0: a.clone(), h1: b.clone() };
                let name = format!("b[{}|{}]", cat.label(a.rep()), cat.label(b.rep()));
                (name, self.basis(&TorusElt2::zero(self.n()), &k))
            }
        })
    }

    pub fn associativity_checks(&self, rng: &mut impl Rng, samples: usize, twisted: bool) -> Result<Vec<Check>> {
        let m = |a: &Sdh2Element, b: &Sdh2Element| {
            if twisted {
                self.twisted_product2(a, b)
            } else {
                self.product2(a, b)
            }
        };
        let mut out = Vec::new();
        for s in 0..samples {
            let (na, a) = self.random_element(rng)?;
            let (nb, b) = self.random_element(rng)?;
            let (nc, c) = self.random_element(rng)?;
            let lhs = m(&m(&a, &b)?, &c)?;
            let rhs = m(&a, &m(&b, &c)?)?;
            out.push(Check::flag(format!("#{s} ({na} {nb}) {nc}"), lhs == rhs, self.render(&lhs), self.render(&rhs)));
        }
        Ok(out)
    }

    /// `[L] = [K ⊕ M]` on random conflations with acyclic `K`.
    pub fn conflation_checks(&self, rng: &mut impl Rng, samples: usize) -> Result<Vec<Check>> {
        (0..samples).map(|s| self.eng.check_conflation(rng, &[0, 1], format!("#{s}"))).collect()
    }

    /// `[X ⊕ K] = ⟨K, X⟩ [K] ⋄ [X]` on random acyclic `K`.
    pub fn freeness_checks(&self, rng: &mut impl Rng, samples: usize) -> Result<Vec<Check>> {
        (0..samples).map(|s| self.eng.check_freeness(rng, &[0, 1], format!("#{s}"))).collect()
    }

    /// The reduction is multiplicative and kills `K_α * K_α* − 1`.
    pub fn reduce_checks(&self, rng: &mut impl Rng, samples: usize) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for s in 0..samples {
            let (na, a) = self.random_element(rng)?;
            let (nb, b) = self.random_element(rng)?;
            let lhs = self.reduce(&self.twisted_product2(&a, &b)?);
            let rhs = self.reduced_product(&self.reduce(&a), &self.reduce(&b))?;
            let mut ok = lhs == rhs;
            let i = rng.gen_range(0..self.n());
            let mut al = vec![0; self.n()];
            al[i] = 1;
            let kk = self.twisted_product2(&self.k_class(&al), &self.kstar_class(&al))?;
            ok &= self.reduce(&self.twisted_product2(&a, &kk)?) == self.reduce(&a);
            out.push(Check::flag(format!("#{s} {na} {nb}"), ok, self.render_reduced(&lhs), self.render_reduced(&rhs)));
        }
        Ok(out)
    }

    /// `E_A * E_B` against the image of `[A] * [B]` from the twisted Hall
    /// algebra, for `dim A + dim B ≤ bound`.
    pub fn jplus_checks(&self, hall: &HallAlgebra, bound: usize) -> Result<Vec<Check>> {
        let cat = self.cat();
        let mut classes = Vec::new();
        for d in cat.dim_vectors_up_to(bound) {
            classes.extend(cat.iso_classes(&d)?.into_iter().filter(|k| !k.is_zero()));
        }
        let mut out = Vec::new();
        for a in &classes {
            for b in &classes {
                if a.total_dim() + b.total_dim() > bound {
                    continue;
                }
                let lhs = self.twisted_product2(&self.e_class(a.rep())?, &self.e_class(b.rep())?)?;
                let h = hall.twisted_product(&hall.class(a.rep())?, &hall.class(b.rep())?)?;
                let rhs = self.embed_plus(&h)?;
                let name = format!("E[{}] * E[{}]", cat.label(a.rep()), cat.label(b.rep()));
                out.push(Check::flag(name, lhs == rhs, self.render(&lhs), self.render(&rhs)));
            }
        }
        Ok(out)
    }
}

fn in_span(basis: &FpMatrix, m: &FpMatrix) -> bool {
    (0..m.cols()).all(|c| matches!(basis.solve_linear(&m.col(c)), Ok(Some(_))))
}

/// Quotient of a complex by the subcomplex spanned by `bases`.
pub(crate) fn quotient_complex(cat: &RepCategory, x: &Gcx, bases: &[Vec<FpMatrix>]) -> Result<Gcx> {
    let mut comps = Vec::new();
    let mut projs = Vec::new();
    for k in 0..x.len() {
        let (qr, pr) = cat.quotient(x.comp(k), &bases[k])?;
        comps.push(qr);
        projs.push(pr);
    }
    let mut diffs = Vec::new();
    for k in 0..x.len() {
        let Some(j) = x.next(k) else { continue };
        let d = x.diff(k).unwrap();
        let blocks = (0..cat.n())
            .map(|i| {
                let p = projs[k].comp(i);
                let cols: Vec<Vec<u32>> = (0..p.rows())
                    .map(|r| {
                        let mut e = vec![0; p.rows()];
                        e[r] = 1;
                        p.solve_linear(&e).unwrap().expect("quotient map is surjective")
                    })
                    .collect();
                let sec = FpMatrix::from_cols(cat.p(), p.cols(), &cols);
                projs[j].comp(i).mul(d.comp(i)).mul(&sec)
            })
            .collect();
        diffs.push(RepMorphism::new(blocks));
    }
    Gcx::new(cat, x.periodic(), comps, diffs)
}

/// The reflection isomorphism `t_i` between reduced twisted algebras of a
/// quiver and of its reflection at the sink `i`.
#[derive(Debug)]
pub struct Reflection {
    src: Sdh2,
    dst: Sdh2,
    sink: usize,
    /// Complex `⊕_{j→i} P_j ⇄ τ⁻S_i` with `d0 = π`, `d1 = 0`.
    pi: Cx2,
}

impl Reflection {
    pub fn new(src: Sdh2, sink: usize) -> Result<Reflection> {
        let cat = src.cat().clone();
        let quiver = cat.quiver();
        if sink >= cat.n() || !quiver.is_sink(sink) {
            return Err(Error::PreconditionError(format!("vertex {} is not a sink", sink + 1)));
        }
        let dst = Sdh2::new(RepCategory::new(quiver.reflect_at(sink), cat.field()))?;
        let si = cat.simple(sink)?;
        let mut e = cat.zero_rep();
        let mut iota: Option<RepMorphism> = None;
        for &(s, t) in quiver.arrows() {
            if t != sink {
                continue;
            }
            let pj = cat.projective(s)?;
            let h = cat.hom_basis(&si, &pj)?;
            let f = h.into_iter().next().ok_or(Error::PreconditionError("no map into P_j".into()))?;
            e = cat.direct_sum(&e, &pj);
            iota = Some(match iota {
                None => f,
                Some(g) => g.vstack(&f),
            });
        }
        let iota = iota.ok_or(Error::PreconditionError("isolated sink".into()))?;
        let (tau, pi_map) = cat.cokernel(&iota, &e)?;
        let pi = Cx2::new(&cat, e.clone(), tau.clone(), pi_map, cat.zero_morphism(&tau, &e))?;
        Ok(Reflection { src, dst, sink, pi })
    }

    pub fn source(&self) -> &Sdh2 {
        &self.src
    }

    pub fn target(&self) -> &Sdh2 {
        &self.dst
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// `s_i` on a dimension vector of the source quiver.
    pub fn reflect_dim(&self, d: &[i64]) -> Vec<i64> {
        let q = self.src.cat().quiver();
        let i = self.sink;
        let mut out = d.to_vec();
        out[i] = (0..d.len()).map(|j| q.edges_between(i, j) as i64 * d[j]).sum::<i64>() - d[i];
        out
    }

    fn reflect_lat(&self, l: &[i64]) -> Lat {
        let n = self.src.cat().n();
        l.chunks(n).flat_map(|c| self.reflect_dim(c)).collect()
    }

    /// Complex with components in `Fac T` and homology `key`.
    pub fn fac_representative(&self, key: &QisKey2) -> Result<Cx2> {
        let cat = self.src.cat();
        let mut x = Cx2::zero(cat);
        for (deg, h) in [&key.h0, &key.h1].into_iter().enumerate() {
            let mut piece = Cx2::zero(cat);
            let mut rest = cat.zero_rep();
            for s in cat.decompose(h.rep())? {
                if s.total_dim() == 1 && s.dim()[self.sink] == 1 {
                    piece = piece.direct_sum(cat, &self.pi);
                } else {
                    rest = cat.direct_sum(&rest, s.rep());
                }
            }
            piece = piece.direct_sum(cat, &Cx2::stalk0(cat, &rest));
            if deg == 1 {
                piece = piece.shift(cat);
            }
            x = x.direct_sum(cat, &piece);
        }
        Ok(x)
    }

    /// Componentwise reflection of a complex with components in `Fac T`.
    pub fn reflect_complex(&self, x: &Cx2) -> Result<Cx2> {
        let (c, d) = (self.src.cat(), self.dst.cat());
        let i = self.sink;
        let m0 = c.reflect_sink(x.m0(), i, d)?;
        let m1 = c.reflect_sink(x.m1(), i, d)?;
        let d0 = c.reflect_sink_morphism(x.d0(), x.m0(), x.m1(), i)?;
        let d1 = c.reflect_sink_morphism(x.d1(), x.m1(), x.m0(), i)?;
        Cx2::new(d, m0, m1, d0, d1)
    }

    /// `t_i` on one unreduced symbol `K^λ ⋄ [C(key)]`.
    fn apply_symbol(&self, lat: &[i64], key: &HKey) -> Result<Sdh2Element> {
        let (se, de) = (self.src.engine(), self.dst.engine());
        let m = self.fac_representative(&qkey(key))?;
        let nf = se.nf(m.gcx())?;
        debug_assert_eq!(&nf.key, key);
        let sm = self.reflect_complex(&m)?;
        let t1 = de.torus(self.reflect_lat(lat));
        let t2 = de.torus_inverse(&self.reflect_lat(&nf.lat));
        let x = de.product(&de.product(&t1, &t2)?, &self.dst.class(&sm)?)?;
        Ok(x.scale(&de.qpow(-nf.exp)))
    }

    /// `t_i` on unreduced elements.
    pub fn apply(&self, x: &Sdh2Element) -> Result<Sdh2Element> {
        let mut out = SdElement::zero(self.src.q());
        for ((l, h), c) in x.terms() {
            out = out.add(&self.apply_symbol(l, h)?.scale(c));
        }
        Ok(out)
    }

    /// `t_i` on reduced elements.
    pub fn apply_reduced(&self, x: &Reduced2) -> Result<Reduced2> {
        Ok(self.dst.reduce(&self.apply(&self.src.lift(x))?))
    }

    /// Generators `E_{S_j}`, `F_{S_j}` and `K̃_α` for `|α| ≤ 2`, with their
    /// total dimensions.
    fn generators(&self) -> Result<Vec<(String, usize, Reduced2)>> {
        let s = &self.src;
        let cat = s.cat();
        let n = cat.n();
        let mut out = Vec::new();
        for j in 0..n {
            let sj = cat.simple(j)?;
            out.push((format!("E{}", j + 1), 1, s.reduce(&s.e_class(&sj)?)));
            out.push((format!("F{}", j + 1), 1, s.reduce(&s.f_class(&sj)?)));
        }
        let mut lats: Vec<Vec<i64>> = Vec::new();
        for j in 0..n {
            for sign in [1, -1] {
                let mut g = vec![0; n];
                g[j] = sign;
                lats.push(g);
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                let mut g = vec![0; n];
                g[a] = 1;
                g[b] = 1;
                lats.push(g);
            }
        }
        for g in lats {
            let w = g.iter().map(|x| x.unsigned_abs() as usize).sum();
            out.push((format!("K{g:?}"), w, s.reduced_torus(&g)));
        }
        Ok(out)
    }

    /// The displayed value on `[S_i ⇄ 0]`, multiplicativity on generator pairs
    /// with total dimension at most 3, compatibility with `*`, and
    /// `t_i(K_α) = K_{s_i α}`.
    pub fn verify(&self) -> Result<Vec<Check>> {
        let (s, d) = (&self.src, &self.dst);
        let i = self.sink;
        let mut out = Vec::new();
        let si = s.cat().simple(i)?;
        let lhs = self.apply_reduced(&s.reduce(&s.f_class(&si)?))?;
        let si2 = d.cat().simple(i)?;
        let e = d.reduce(&d.e_class(&si2)?);
        let kstar = d.reduced_torus(&SdEngine::neg_lat(&si2.dim_i64()));
        let rhs = d.reduced_product(&e, &kstar)?.scale(&CoeffScalar::v_power(s.q(), -1));
        out.push(Check::flag("t_i[S_i⇄0]", lhs == rhs, d.render_reduced(&lhs), d.render_reduced(&rhs)));
        let gens = self.generators()?;
        for (na, wa, a) in &gens {
            let ta = self.apply_reduced(a)?;
            let l = self.apply_reduced(&s.star_reduced(a))?;
            let r = d.star_reduced(&ta);
            out.push(Check::flag(format!("*t_i = t_i* on {na}"), l == r, d.render_reduced(&l), d.render_reduced(&r)));
            for (nb, wb, b) in &gens {
                if wa + wb > 3 {
                    continue;
                }
                let l = self.apply_reduced(&s.reduced_product(a, b)?)?;
                let r = d.reduced_product(&ta, &self.apply_reduced(b)?)?;
                out.push(Check::flag(format!("t_i({na}*{nb})"), l == r, d.render_reduced(&l), d.render_reduced(&r)));
            }
        }
        let n = s.cat().n();
        for j in 0..n {
            let mut g = vec![0; n];
            g[j] = 1;
            let l = self.apply_reduced(&s.reduced_torus(&g))?;
            let r = d.reduced_torus(&self.reflect_dim(&g));
            out.push(Check::flag(format!("t_i(K_{})", j + 1), l == r, d.render_reduced(&l), d.render_reduced(&r)));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::FieldSpec;
    use crate::quiver::Quiver;

    fn alg(n: usize, q: u32) -> Sdh2 {
        Sdh2::new(RepCategory::new(Quiver::linear_a(n), FieldSpec::new(q).unwrap())).unwrap()
    }

    fn failures(c: &[Check]) -> Vec<String> {
        c.iter().filter(|c| !c.passed()).map(|c| format!("{}: {} != {}", c.name, c.lhs, c.rhs)).collect()
    }

    #[test]
    fn e_class_of_simple_projective_is_basis() {
        let s = alg(2, 2);
        let s2 = s.cat().simple(1).unwrap();
        let k = s.key_of(&s.cat().zero_rep(), &s2).unwrap();
        assert_eq!(s.e_class(&s2).unwrap(), s.basis(&TorusElt2::zero(2), &k));
    }

    #[test]
    fn reduce_kills_k_kstar() {
        let s = alg(2, 3);
        let a = vec![1, 1];
        let x = s.twisted_product2(&s.k_class(&a), &s.kstar_class(&a)).unwrap();
        let r = s.reduce(&x);
        assert_eq!(s.render_reduced(&r), s.render_reduced(&s.reduced_one()));
    }

    #[test]
    fn normal_forms_agree() {
        let s = alg(2, 2);
        let c = s.cat();
        let (p1, p2, s1) = (c.projective(0).unwrap(), c.projective(1).unwrap(), c.simple(0).unwrap());
        let cs1 = cx2::minimal_complex(c, &s1, &c.zero_rep()).unwrap();
        let x = cx2::make_kp(c, &p1).direct_sum(c, &cs1.shift(c)).direct_sum(c, &cx2::make_kp_star(c, &p2));
        let x = x.direct_sum(c, &Cx2::stalk0(c, &p1));
        assert_eq!(s.normal_form(&x).unwrap(), s.normal_form_by_decomposition(&x).unwrap());
        assert!(s.normal_form_by_decomposition(&Cx2::stalk0(c, &s1)).is_err());
    }

    #[test]
    fn quantum_group_a1_a2() {
        for n in [1, 2] {
            let s = alg(n, 2);
            assert!(failures(&s.verify_quantum_group(false).unwrap()).is_empty());
            assert!(s.verify_quantum_group(true).unwrap().iter().any(|c| !c.passed()));
        }
    }

    #[test]
    fn torus_commutation_a2() {
        let s = alg(2, 3);
        assert_eq!(failures(&s.verify_torus_commutation().unwrap()), Vec::<String>::new());
    }

    #[test]
    fn bridgeland_a2_small() {
        let s = alg(2, 2);
        assert_eq!(failures(&s.bridgeland_compare(3).unwrap()), Vec::<String>::new());
    }

    #[test]
    fn seeded_properties() {
        use rand::SeedableRng;
        let s = alg(2, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        assert_eq!(failures(&s.associativity_checks(&mut rng, 8, false).unwrap()), Vec::<String>::new());
        assert_eq!(failures(&s.associativity_checks(&mut rng, 8, true).unwrap()), Vec::<String>::new());
        assert_eq!(failures(&s.conflation_checks(&mut rng, 8).unwrap()), Vec::<String>::new());
        assert_eq!(failures(&s.freeness_checks(&mut rng, 8).unwrap()), Vec::<String>::new());
        assert_eq!(failures(&s.reduce_checks(&mut rng, 8).unwrap()), Vec::<String>::new());
        let hall = HallAlgebra::new(s.cat().clone());
        assert_eq!(failures(&s.jplus_checks(&hall, 4).unwrap()), Vec::<String>::new());
    }

    #[test]
    fn reflection_a2_sink() {
        let s = alg(2, 2);
        assert!(matches!(Reflection::new(alg(2, 2), 0), Err(Error::PreconditionError(_))));
        let r = Reflection::new(s, 1).unwrap();
        assert_eq!(failures(&r.verify().unwrap()), Vec::<String>::new());
    }
}
