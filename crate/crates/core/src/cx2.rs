//! Z/2-graded complexes `M0 ⇄ M1` over a quiver category.

use std::fmt;

use rand::Rng;

use crate::check::Check;
use crate::complex::{ChainMap, Gcx};
use crate::error::{Error, Result};
use crate::ff::FpMatrix;
use crate::quiver::{IsoClassKey, Rep, RepCategory, RepMorphism};

/// A 2-periodic complex with `d0: M0 -> M1` and `d1: M1 -> M0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cx2(Gcx);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cx2Morphism {
    pub s0: RepMorphism,
    pub s1: RepMorphism,
}

/// Homology pair `(H^0, H^1)` up to isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QisKey2 {
    pub h0: IsoClassKey,
    pub h1: IsoClassKey,
}

/// One indecomposable summand found by [`decompose2`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Summand2 {
    /// `K_P` with `P` indecomposable projective.
    Kp(IsoClassKey),
    /// `K_P*`.
    KpStar(IsoClassKey),
    Other(Cx2),
}

impl Cx2 {
    pub fn new(cat: &RepCategory, m0: Rep, m1: Rep, d0: RepMorphism, d1: RepMorphism) -> Result<Cx2> {
        Ok(Cx2(Gcx::new(cat, true, vec![m0, m1], vec![d0, d1])?))
    }

    pub(crate) fn from_gcx(g: Gcx) -> Cx2 {
        debug_assert!(g.periodic());
        Cx2(g)
    }

    pub fn gcx(&self) -> &Gcx {
        &self.0
    }

    pub fn m0(&self) -> &Rep {
        self.0.comp(0)
    }

    pub fn m1(&self) -> &Rep {
        self.0.comp(1)
    }

    pub fn d0(&self) -> &RepMorphism {
        self.0.diff(0).unwrap()
    }

    pub fn d1(&self) -> &RepMorphism {
        self.0.diff(1).unwrap()
    }

    pub fn zero(cat: &RepCategory) -> Cx2 {
        Cx2(Gcx::zero(cat, true))
    }

    /// `A` in degree 0.
    pub fn stalk0(cat: &RepCategory, a: &Rep) -> Cx2 {
        let z = cat.zero_rep();
        Cx2(Gcx::new_unchecked(true, vec![a.clone(), z.clone()], vec![cat.zero_morphism(a, &z), cat.zero_morphism(&z, a)]))
    }

    /// `A` in degree 1.
    pub fn stalk1(cat: &RepCategory, a: &Rep) -> Cx2 {
        Cx2::stalk0(cat, a).shift(cat)
    }

    pub fn shift(&self, cat: &RepCategory) -> Cx2 {
        Cx2(self.0.shift(cat).expect("periodic shift is total"))
    }

    pub fn direct_sum(&self, cat: &RepCategory, o: &Cx2) -> Cx2 {
        Cx2(self.0.direct_sum(cat, &o.0))
    }

    pub fn total_dim(&self) -> usize {
        self.0.total_dim()
    }

    pub fn is_acyclic(&self, cat: &RepCategory) -> Result<bool> {
        self.0.is_acyclic(cat)
    }

    pub fn has_projective_components(&self, cat: &RepCategory) -> bool {
        [self.m0(), self.m1()].iter().all(|m| cat.resolution_dims(m).0.iter().all(|&v| v == 0))
    }

    pub fn is_isomorphic(&self, cat: &RepCategory, o: &Cx2) -> Result<bool> {
        self.0.is_isomorphic(cat, &o.0)
    }

    /// Transport along vertexwise invertible matrices on both components.
    pub fn base_change(&self, cat: &RepCategory, g0: &[FpMatrix], g1: &[FpMatrix]) -> Result<Cx2> {
        let m0 = cat.base_change(self.m0(), g0)?;
        let m1 = cat.base_change(self.m1(), g1)?;
        let (a, b) = (RepMorphism::new(g0.to_vec()), RepMorphism::new(g1.to_vec()));
        let (ai, bi) = (a.inverse().ok_or(Error::DivisionByZero)?, b.inverse().ok_or(Error::DivisionByZero)?);
        Cx2::new(cat, m0, m1, b.after(self.d0()).after(&ai), a.after(self.d1()).after(&bi))
    }

    pub fn render(&self, cat: &RepCategory) -> String {
        format!("[{} ⇄ {}]", cat.label(self.m0()), cat.label(self.m1()))
    }
}

impl fmt::Display for Cx2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?} ⇄ {:?}]", self.m0().dim(), self.m1().dim())
    }
}

impl Cx2Morphism {
    fn from_chain(c: ChainMap) -> Cx2Morphism {
        let mut it = c.into_iter();
        Cx2Morphism { s0: it.next().unwrap(), s1: it.next().unwrap() }
    }

    pub(crate) fn to_chain(&self) -> ChainMap {
        vec![self.s0.clone(), self.s1.clone()]
    }

    pub fn is_invertible(&self) -> bool {
        self.s0.is_invertible() && self.s1.is_invertible()
    }
}

pub fn chain_maps_basis(cat: &RepCategory, l: &Cx2, m: &Cx2) -> Result<Vec<Cx2Morphism>> {
    Ok(l.0.chain_map_basis(cat, &m.0)?.into_iter().map(Cx2Morphism::from_chain).collect())
}

/// Basis of the maps `d'h + hd`.
pub fn homotopy_subspace(cat: &RepCategory, l: &Cx2, m: &Cx2) -> Result<Vec<Cx2Morphism>> {
    Ok(l.0.null_homotopic_basis(cat, &m.0)?.into_iter().map(Cx2Morphism::from_chain).collect())
}

/// `(H^0, H^1)`.
pub fn homology(cat: &RepCategory, x: &Cx2) -> Result<(Rep, Rep)> {
    let h = x.0.homology(cat)?;
    Ok((h[0].h.clone(), h[1].h.clone()))
}

pub fn qis_key(cat: &RepCategory, x: &Cx2) -> Result<QisKey2> {
    let (h0, h1) = homology(cat, x)?;
    Ok(QisKey2 { h0: cat.canonical(&h0)?, h1: cat.canonical(&h1)? })
}

/// `K_P = (P ⇄ P, d0 = id, d1 = 0)`.
pub fn make_kp(cat: &RepCategory, p: &Rep) -> Cx2 {
    Cx2(Gcx::new_unchecked(true, vec![p.clone(), p.clone()], vec![cat.identity(p), cat.zero_morphism(p, p)]))
}

/// `K_P* = (P ⇄ P, d0 = 0, d1 = id)`.
pub fn make_kp_star(cat: &RepCategory, p: &Rep) -> Cx2 {
    Cx2(Gcx::new_unchecked(true, vec![p.clone(), p.clone()], vec![cat.zero_morphism(p, p), cat.identity(p)]))
}

/// `C_A ⊕ Σ C_B`: minimal projective-component complex with homology `(A, B)`.
pub fn minimal_complex(cat: &RepCategory, a: &Rep, b: &Rep) -> Result<Cx2> {
    let ra = cat.min_proj_resolution(a)?;
    let rb = cat.min_proj_resolution(b)?;
    let ca = Cx2(Gcx::new_unchecked(
        true,
        vec![ra.p0.clone(), ra.p1.clone()],
        vec![cat.zero_morphism(&ra.p0, &ra.p1), ra.incl.clone()],
    ));
    let cb = Cx2(Gcx::new_unchecked(
        true,
        vec![rb.p0.clone(), rb.p1.clone()],
        vec![cat.zero_morphism(&rb.p0, &rb.p1), rb.incl.clone()],
    ));
    Ok(ca.direct_sum(cat, &cb.shift(cat)))
}

/// One chain map per class of Hom_K(L, ΣM), with its middle term.
pub fn ext1_classes_proj(cat: &RepCategory, l: &Cx2, m: &Cx2) -> Result<Vec<(Cx2Morphism, Cx2)>> {
    if !l.has_projective_components(cat) {
        return Err(Error::PreconditionError("first argument needs projective components".into()));
    }
    l.0.ext_classes(cat, &m.0)?
        .into_iter()
        .map(|f| {
            let e = l.0.middle_term(cat, &m.0, &f)?;
            Ok((Cx2Morphism::from_chain(f), Cx2(e)))
        })
        .collect()
}

/// Middle term of the extension given by `f: L -> ΣM`.
pub fn middle_term(cat: &RepCategory, l: &Cx2, m: &Cx2, f: &Cx2Morphism) -> Result<Cx2> {
    Ok(Cx2(l.0.middle_term(cat, &m.0, &f.to_chain())?))
}

/// Krull–Schmidt decomposition by Fitting splits of chain endomorphisms.
pub fn decompose2(cat: &RepCategory, x: &Cx2) -> Result<Vec<Summand2>> {
    if x.total_dim() > 12 {
        return Err(Error::PreconditionError("decomposition needs total dimension <= 12".into()));
    }
    x.0.indecomposable_summands(cat)?
        .into_iter()
        .map(|g| {
            let y = Cx2(g);
            let proj = y.has_projective_components(cat);
            if proj && y.m0().dim() == y.m1().dim() {
                if y.d0().is_invertible() {
                    return Ok(Summand2::Kp(cat.canonical(y.m0())?));
                }
                if y.d1().is_invertible() {
                    return Ok(Summand2::KpStar(cat.canonical(y.m0())?));
                }
            }
            Ok(Summand2::Other(y))
        })
        .collect()
}

/// Scrambled `K_P ⊕ K_Q*` for random projectives `P`, `Q` decomposes back to
/// the same pair, twice over with independent scrambles.
pub fn acyclic_decomposition_checks(cat: &RepCategory, rng: &mut impl Rng, samples: usize) -> Result<Vec<Check>> {
    let n = cat.n();
    let random_proj = |rng: &mut dyn rand::RngCore| -> Result<Rep> {
        let mut p = cat.zero_rep();
        for _ in 0..rng.gen_range(1..=2) {
            p = cat.direct_sum(&p, &cat.projective(rng.gen_range(0..n))?);
        }
        Ok(p)
    };
    let scramble = |x: &Cx2, rng: &mut dyn rand::RngCore| -> Result<Cx2> {
        let gl = |m: &Rep, rng: &mut dyn rand::RngCore| -> Vec<FpMatrix> {
            m.dim()
                .iter()
                .map(|&d| loop {
                    let data = (0..d * d).map(|_| rng.gen_range(0..cat.p())).collect();
                    let g = FpMatrix::from_vec(cat.p(), d, d, data).expect("square shape");
                    if g.is_invertible() {
                        break g;
                    }
                })
                .collect()
        };
        let (g0, g1) = (gl(x.m0(), rng), gl(x.m1(), rng));
        x.base_change(cat, &g0, &g1)
    };
    let split = |x: &Cx2| -> Result<(Rep, Rep, usize)> {
        let (mut p, mut q, mut other) = (cat.zero_rep(), cat.zero_rep(), 0);
        for s in decompose2(cat, x)? {
            match s {
                Summand2::Kp(k) => p = cat.direct_sum(&p, k.rep()),
                Summand2::KpStar(k) => q = cat.direct_sum(&q, k.rep()),
                Summand2::Other(_) => other += 1,
            }
        }
        Ok((p, q, other))
    };
    let mut out = Vec::new();
    for s in 0..samples {
        let (p, q) = loop {
            let (p, q) = (random_proj(rng)?, random_proj(rng)?);
            if 2 * (p.total_dim() + q.total_dim()) <= 12 {
                break (p, q);
            }
        };
        let x = make_kp(cat, &p).direct_sum(cat, &make_kp_star(cat, &q));
        let (p1, q1, o1) = split(&scramble(&x, rng)?)?;
        let (p2, q2, o2) = split(&scramble(&x, rng)?)?;
        let ok = o1 == 0
            && o2 == 0
            && cat.is_isomorphic(&p1, &p)?
            && cat.is_isomorphic(&q1, &q)?
            && cat.is_isomorphic(&p2, &p)?
            && cat.is_isomorphic(&q2, &q)?;
        out.push(Check::flag(
            format!("#{s} K_{} + K*_{}", cat.label(&p), cat.label(&q)),
            ok,
            format!("({}, {}) / ({}, {})", cat.label(&p1), cat.label(&q1), cat.label(&p2), cat.label(&q2)),
            format!("({}, {})", cat.label(&p), cat.label(&q)),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use crate::ff::FieldSpec;
    use crate::quiver::{Cat, Quiver};

    fn cat(n: usize, q: u32) -> Cat {
        RepCategory::new(Quiver::linear_a(n), FieldSpec::new(q).unwrap())
    }

    #[test]
    fn chain_maps_and_homotopies() {
        let c = cat(2, 2);
        let (s1, p1) = (c.simple(0).unwrap(), c.projective(0).unwrap());
        let x = minimal_complex(&c, &s1, &c.simple(1).unwrap()).unwrap();
        let basis = chain_maps_basis(&c, &x, &x).unwrap();
        let id = Cx2Morphism { s0: c.identity(x.m0()), s1: c.identity(x.m1()) };
        let flat = |m: &Cx2Morphism| crate::complex::flat(&m.to_chain());
        let mut rows: Vec<Vec<u32>> = basis.iter().map(flat).collect();
        let r0 = FpMatrix::from_vec(2, rows.len(), rows[0].len(), rows.concat()).unwrap().rank();
        rows.push(flat(&id));
        let r1 = FpMatrix::from_vec(2, rows.len(), rows[0].len(), rows.concat()).unwrap().rank();
        assert_eq!(r0, r1);
        for (a, b) in [(&s1, &p1), (&p1, &s1), (&p1, &p1)] {
            let n = chain_maps_basis(&c, &make_kp(&c, a), &make_kp(&c, b)).unwrap().len();
            assert_eq!(n, c.hom_dim(a, b).unwrap());
        }
        let kp = make_kp(&c, &p1);
        assert_eq!(homotopy_subspace(&c, &kp, &kp).unwrap().len(), c.hom_dim(&p1, &p1).unwrap());
    }

    #[test]
    fn homology_examples() {
        let c = cat(2, 3);
        let (s1, s2, p1) = (c.simple(0).unwrap(), c.simple(1).unwrap(), c.projective(0).unwrap());
        let (h0, h1) = homology(&c, &make_kp(&c, &p1)).unwrap();
        assert!(h0.is_zero() && h1.is_zero());
        let (h0, h1) = homology(&c, &Cx2::stalk0(&c, &s1)).unwrap();
        assert!(c.is_isomorphic(&h0, &s1).unwrap() && h1.is_zero());
        let cs1 = minimal_complex(&c, &s1, &c.zero_rep()).unwrap();
        assert_eq!(cs1.m0().dim(), &[1, 1]);
        assert_eq!(cs1.m1().dim(), &[0, 1]);
        let (h0, h1) = homology(&c, &cs1).unwrap();
        assert!(c.is_isomorphic(&h0, &s1).unwrap() && h1.is_zero());
        let m = minimal_complex(&c, &s1, &s2).unwrap();
        let (h0, h1) = homology(&c, &m).unwrap();
        assert!(c.is_isomorphic(&h0, &s1).unwrap() && c.is_isomorphic(&h1, &s2).unwrap());
        assert_eq!(minimal_complex(&c, &c.zero_rep(), &c.zero_rep()).unwrap(), Cx2::zero(&c));
        let st = minimal_complex(&c, &s2, &c.zero_rep()).unwrap();
        assert!(st.is_isomorphic(&c, &Cx2::stalk0(&c, &c.projective(1).unwrap())).unwrap());
    }

    #[test]
    fn contractible_blocks() {
        let c = cat(2, 2);
        let (p1, p2) = (c.projective(0).unwrap(), c.projective(1).unwrap());
        assert!(make_kp(&c, &p1).shift(&c).is_isomorphic(&c, &make_kp_star(&c, &p1)).unwrap());
        let x = make_kp(&c, &p1).direct_sum(&c, &make_kp_star(&c, &p2));
        let mut d = decompose2(&c, &x).unwrap();
        d.sort_by_key(|s| matches!(s, Summand2::KpStar(_)));
        assert_eq!(d, vec![Summand2::Kp(c.canonical(&p1).unwrap()), Summand2::KpStar(c.canonical(&p2).unwrap())]);
        let y = make_kp(&c, &c.direct_sum(&p1, &p2));
        let d = decompose2(&c, &y).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|s| matches!(s, Summand2::Kp(_))));
    }

    #[test]
    fn extension_classes() {
        let c = cat(1, 2);
        let k = c.simple(0).unwrap();
        let (l, m) = (Cx2::stalk0(&c, &k), Cx2::stalk1(&c, &k));
        let ext = ext1_classes_proj(&c, &l, &m).unwrap();
        assert_eq!(ext.len(), 2);
        let split = ext.iter().find(|(f, _)| f.s0.is_zero() && f.s1.is_zero()).unwrap();
        assert!(split.1.is_isomorphic(&c, &l.direct_sum(&c, &m)).unwrap());
        let cone = ext.iter().find(|(f, _)| !f.s0.is_zero()).unwrap();
        assert_eq!(decompose2(&c, &cone.1).unwrap(), vec![Summand2::Kp(c.canonical(&k).unwrap())]);

        let c = cat(2, 3);
        let cs1 = minimal_complex(&c, &c.simple(0).unwrap(), &c.zero_rep()).unwrap();
        let cs2 = minimal_complex(&c, &c.simple(1).unwrap(), &c.zero_rep()).unwrap();
        let n = ext1_classes_proj(&c, &cs1, &cs2).unwrap().len();
        let sm = cs2.shift(&c);
        let dk = chain_maps_basis(&c, &cs1, &sm).unwrap().len() - homotopy_subspace(&c, &cs1, &sm).unwrap().len();
        assert_eq!(n, 3usize.pow(dk as u32));
    }

    #[test]
    fn scrambled_acyclics_decompose_stably() {
        let c = cat(2, 3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        assert!(acyclic_decomposition_checks(&c, &mut rng, 6).unwrap().iter().all(|x| x.passed()));
    }
}
