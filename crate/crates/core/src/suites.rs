//! Named verification suites shared by the command line and the tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::check::Check;
use crate::error::{Error, Result};
use crate::hall::HallAlgebra;
use crate::quiver::Cat;
use crate::sdh2::{Reflection, Sdh2};
use crate::sdhz::Sdhz;

pub const SUITES: [&str; 10] = [
    "ringel",
    "presentation-uv",
    "euler-lemmas",
    "assoc-z",
    "assoc-z2",
    "bridgeland-compare",
    "quantum-group",
    "reflection",
    "torus-commutation",
    "quotient-relations",
];

/// Suites with a negative control.
pub const PERTURBABLE: [&str; 4] = ["ringel", "presentation-uv", "euler-lemmas", "quantum-group"];

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub samples: usize,
    pub seed: u64,
    pub perturb: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { samples: 20, seed: 0, perturb: false }
    }
}

pub fn run(name: &str, cat: &Cat, opts: SuiteOptions) -> Result<Vec<Check>> {
    if !SUITES.contains(&name) {
        return Err(Error::Input(format!("unknown suite {name}")));
    }
    if opts.perturb && !PERTURBABLE.contains(&name) {
        return Err(Error::Input(format!("suite {name} has no negative control")));
    }
    if opts.samples == 0 {
        return Err(Error::Input("samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.samples;
    match name {
        "ringel" => HallAlgebra::new(cat.clone()).verify_ringel_with(opts.perturb),
        "presentation-uv" => Sdhz::new(cat.clone())?.verify_presentation(opts.perturb),
        "euler-lemmas" => Sdhz::new(cat.clone())?.euler_lemma_checks(&[0, 1, 2], opts.perturb),
        "assoc-z" => Sdhz::new(cat.clone())?.associativity_checks(&mut rng, n),
        "assoc-z2" => Sdh2::new(cat.clone())?.associativity_checks(&mut rng, n, false),
        "bridgeland-compare" => Sdh2::new(cat.clone())?.bridgeland_compare(4),
        "quantum-group" => Sdh2::new(cat.clone())?.verify_quantum_group(opts.perturb),
        "reflection" => {
            let mut out = Vec::new();
            for i in (0..cat.n()).filter(|&i| cat.quiver().is_sink(i)) {
                let r = Reflection::new(Sdh2::new(cat.clone())?, i)?;
                out.extend(r.verify()?.into_iter().map(|mut c| {
                    c.name = format!("sink {}: {}", i + 1, c.name);
                    c
                }));
            }
            Ok(out)
        }
        "torus-commutation" => Sdh2::new(cat.clone())?.verify_torus_commutation(),
        "quotient-relations" => {
            let mut out = Vec::new();
            for mut c in Sdhz::new(cat.clone())?.conflation_checks(&mut rng, n)? {
                c.name = format!("Z {}", c.name);
                out.push(c);
            }
            for mut c in Sdh2::new(cat.clone())?.conflation_checks(&mut rng, n)? {
                c.name = format!("Z/2 {}", c.name);
                out.push(c);
            }
            Ok(out)
        }
        _ => unreachable!("suite names are checked above"),
    }
}
