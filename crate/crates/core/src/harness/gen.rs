use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::labelled::{LabConst, LTerm};
use crate::systems::{ConversionSequence, Dir, Fuel, Oracle, Step, SystemId};
use crate::term::{Const, Position, Term};

/// Random generation parameters. Generation is a pure function of the
/// config.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    /// Node count bound for generated terms.
    pub max_size: usize,
    /// Number of conversion steps for [`gen_convertible_to_f`].
    pub max_expansions: usize,
    pub const_weight: u32,
    pub var_weight: u32,
    pub vars: Vec<String>,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            seed: 0,
            max_size: 25,
            max_expansions: 8,
            const_weight: 3,
            var_weight: 1,
            vars: vec!["x".into(), "y".into(), "z".into()],
        }
    }
}

impl GenConfig {
    pub fn with_seed(&self, seed: u64) -> GenConfig {
        GenConfig {
            seed,
            ..self.clone()
        }
    }

    /// Independent seed for case `index`.
    pub fn split(&self, index: u64) -> GenConfig {
        self.with_seed(mix(self.seed, index))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// SplitMix64 finalizer over a combined seed.
pub fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn random_leaf(rng: &mut impl Rng, cfg: &GenConfig) -> Term {
    let total = cfg.const_weight + if cfg.vars.is_empty() { 0 } else { cfg.var_weight };
    if total == 0 || rng.gen_range(0..total) < cfg.const_weight {
        Term::Const(*Const::ALL.choose(rng).expect("constants"))
    } else {
        Term::var(cfg.vars.choose(rng).expect("vars"))
    }
}

fn random_shape(rng: &mut impl Rng, cfg: &GenConfig, leaves: usize) -> Term {
    if leaves <= 1 {
        return random_leaf(rng, cfg);
    }
    let left = rng.gen_range(1..leaves);
    Term::app(
        random_shape(rng, cfg, left),
        random_shape(rng, cfg, leaves - left),
    )
}

/// A random term of at most `max_nodes` nodes.
pub fn random_term(rng: &mut impl Rng, cfg: &GenConfig, max_nodes: usize) -> Term {
    let max_leaves = max_nodes.div_ceil(2).max(1);
    let leaves = rng.gen_range(1..=max_leaves);
    random_shape(rng, cfg, leaves)
}

pub fn gen_term(cfg: &GenConfig) -> Term {
    random_term(&mut cfg.rng(), cfg, cfg.max_size)
}

/// A random term of at most `max_nodes` nodes built mostly from CLC redex
/// shapes, so that it has several overlapping and nested redexes.
pub fn random_redex_term(rng: &mut impl Rng, cfg: &GenConfig, max_nodes: usize) -> Term {
    for _ in 0..64 {
        let t = redex_rich(rng, cfg, max_nodes);
        if t.size() <= max_nodes {
            return t;
        }
    }
    random_leaf(rng, cfg)
}

fn redex_rich(rng: &mut impl Rng, cfg: &GenConfig, budget: usize) -> Term {
    if budget < 5 {
        return random_term(rng, cfg, budget.max(1));
    }
    let c = |x: Const| Term::Const(x);
    let b = (budget - 4) / 3;
    let b2 = (budget - 4) / 2;
    match rng.gen_range(0..7) {
        0 => Term::apply(c(Const::K), [redex_rich(rng, cfg, b2), redex_rich(rng, cfg, b2)]),
        1 | 2 => {
            let z = match rng.gen_range(0..3) {
                0 => c(Const::T),
                1 => c(Const::F),
                _ => redex_rich(rng, cfg, b),
            };
            Term::apply(c(Const::C), [z, redex_rich(rng, cfg, b), redex_rich(rng, cfg, b)])
        }
        3 => {
            let x = redex_rich(rng, cfg, b);
            Term::apply(c(Const::C), [redex_rich(rng, cfg, b), x.clone(), x])
        }
        4 => Term::apply(
            c(Const::S),
            [redex_rich(rng, cfg, b), redex_rich(rng, cfg, b), redex_rich(rng, cfg, b)],
        ),
        _ => {
            let left = rng.gen_range(1..budget - 1);
            Term::app(redex_rich(rng, cfg, left), redex_rich(rng, cfg, budget - 1 - left))
        }
    }
}

/// One random CLC0 expansion of `cur`, or `None` if the attempt failed.
fn random_expansion(
    rng: &mut impl Rng,
    cfg: &GenConfig,
    oracle: &Oracle,
    cur: &Term,
) -> Option<(Step, Term)> {
    let rule: u8 = rng.gen_range(1..=5);
    let positions: Vec<Position> = if rule == 5 {
        cur.subterms()
            .into_iter()
            .filter(|(_, s)| s_contractum_parts(s).is_some())
            .map(|(p, _)| p)
            .collect()
    } else {
        cur.positions()
    };
    let pos = positions.choose(rng)?.clone();
    let s = cur.subterm_at(&pos).ok()?.clone();
    let small = random_term(rng, cfg, 3);
    let c = |x: Const| Term::Const(x);
    let redex = match rule {
        1 => Term::apply(c(Const::C), [c(Const::T), s, small]),
        2 => Term::apply(c(Const::C), [c(Const::F), small, s]),
        3 => Term::apply(c(Const::C), [small, s.clone(), s]),
        4 => Term::apply(c(Const::K), [s, small]),
        _ => {
            let (a, b, z) = s_contractum_parts(&s)?;
            Term::apply(c(Const::S), [a, b, z])
        }
    };
    let next = cur.replace_at(&pos, redex).ok()?;
    if next.size() > cfg.max_size {
        return None;
    }
    match oracle.contract(SystemId::Clc0, &next, &pos, rule) {
        Ok(back) if &back == cur => Some((Step::new(SystemId::Clc0, rule, pos, 0), next)),
        _ => None,
    }
}

/// `a c (b c)` as `(a, b, c)`.
fn s_contractum_parts(t: &Term) -> Option<(Term, Term, Term)> {
    let Term::App(l, r) = t else { return None };
    let (Term::App(a, c1), Term::App(b, c2)) = (&**l, &**r) else {
        return None;
    };
    (c1 == c2).then(|| ((**a).clone(), (**b).clone(), (**c1).clone()))
}

/// A CLC0 conversion from a random term to `F`, built by random expansions
/// and occasional contractions starting from `F`. At most
/// `cfg.max_expansions` steps; every term has at most `cfg.max_size` nodes.
pub fn gen_convertible_to_f(cfg: &GenConfig) -> ConversionSequence {
    let mut rng = cfg.rng();
    let oracle = Oracle::new(Fuel::default());
    let mut conv = ConversionSequence::empty(Term::Const(Const::F));
    let mut attempts = 0;
    while conv.len() < cfg.max_expansions && attempts < 50 * cfg.max_expansions {
        attempts += 1;
        let cur = conv.end().clone();
        if rng.gen_ratio(1, 4) {
            let scan = oracle.redexes(SystemId::Clc0, &cur);
            if let Some(r) = scan.redexes.choose(&mut rng) {
                if let Ok((step, next)) = oracle.step(SystemId::Clc0, &cur, &r.position, r.rule) {
                    if next.size() <= cfg.max_size {
                        conv.push(Dir::Forward, step, next);
                        continue;
                    }
                }
            }
        }
        if let Some((step, next)) = random_expansion(&mut rng, cfg, &oracle, &cur) {
            conv.push(Dir::Backward, step, next);
        }
    }
    conv.reversed()
}

/// A random CLC reduction of at most `steps` steps from `t`.
pub fn random_reduction(
    rng: &mut impl Rng,
    oracle: &Oracle,
    sys: SystemId,
    t: &Term,
    steps: usize,
) -> crate::systems::Trace {
    let mut tr = crate::systems::Trace::empty(t.clone());
    for _ in 0..steps {
        let cur = tr.end().clone();
        let scan = oracle.redexes(sys, &cur);
        let Some(r) = scan.redexes.choose(rng) else {
            break;
        };
        match oracle.step(sys, &cur, &r.position, r.rule) {
            Ok((step, next)) => tr.push(step, next),
            Err(_) => break,
        }
    }
    tr
}

const LABELLED_LEAVES: [LabConst; 5] = [
    LabConst::C1,
    LabConst::C2,
    LabConst::T1,
    LabConst::F1,
    LabConst::K1,
];

fn random_lleaf(rng: &mut impl Rng, cfg: &GenConfig) -> LTerm {
    if rng.gen_ratio(1, 2) {
        LTerm::from(random_leaf(rng, cfg))
    } else {
        LTerm::Lab(LABELLED_LEAVES.choose(rng).expect("labels").clone())
    }
}

/// A random labelled term of at most `max_nodes` nodes, biased towards
/// s-redexes whose arguments contain i-redexes.
pub fn random_lterm(rng: &mut impl Rng, cfg: &GenConfig, max_nodes: usize) -> LTerm {
    for _ in 0..64 {
        let t = random_lterm_raw(rng, cfg, max_nodes);
        if t.size() <= max_nodes {
            return t;
        }
    }
    random_lleaf(rng, cfg)
}

fn random_lterm_raw(rng: &mut impl Rng, cfg: &GenConfig, budget: usize) -> LTerm {
    if budget <= 2 {
        return random_lleaf(rng, cfg);
    }
    let lab = |l: LabConst| LTerm::Lab(l);
    let sub = |rng: &mut ChaCha8Rng, b: usize| random_lterm_raw(rng, cfg, b);
    let mut r = ChaCha8Rng::seed_from_u64(rng.gen());
    let b = budget / 3;
    match rng.gen_range(0..10) {
        0 => {
            let z = if rng.gen() { lab(LabConst::T1) } else { lab(LabConst::F1) };
            LTerm::apply(lab(LabConst::C1), [z, sub(&mut r, b), sub(&mut r, b)])
        }
        1 => {
            let z = match rng.gen_range(0..3) {
                0 => LTerm::from(Term::Const(Const::T)),
                1 => LTerm::from(Term::Const(Const::F)),
                _ => LTerm::from(random_term(&mut r, cfg, b.max(1))),
            };
            let x = sub(&mut r, b);
            let y = if rng.gen() { x.clone() } else { sub(&mut r, b) };
            LTerm::apply(lab(LabConst::C2), [z, x, y])
        }
        2 => LTerm::apply(lab(LabConst::K1), [sub(&mut r, b), sub(&mut r, b)]),
        3 => {
            let z = sub(&mut r, b / 2);
            LTerm::apply(
                lab(LabConst::s(&[1, 1])),
                [sub(&mut r, b / 2), sub(&mut r, b / 2), LTerm::Tuple(vec![z.clone(), z].into())],
            )
        }
        4 | 5 => LTerm::from(random_iredexy(&mut r, cfg, budget)),
        _ => {
            let left = rng.gen_range(1..budget - 1);
            LTerm::app(sub(&mut r, left), sub(&mut r, budget - 1 - left))
        }
    }
}

/// A random i-term, often headed by a CLC redex.
fn random_iredexy(rng: &mut impl Rng, cfg: &GenConfig, max_nodes: usize) -> Term {
    let c = |x: Const| Term::Const(x);
    let b = (max_nodes / 4).max(1);
    match rng.gen_range(0..4) {
        0 => Term::apply(c(Const::K), [random_term(rng, cfg, b), random_term(rng, cfg, b)]),
        1 => {
            let z = if rng.gen() { c(Const::T) } else { c(Const::F) };
            Term::apply(c(Const::C), [z, random_term(rng, cfg, b), random_term(rng, cfg, b)])
        }
        2 => Term::apply(
            c(Const::S),
            [
                random_term(rng, cfg, b),
                random_term(rng, cfg, b),
                random_term(rng, cfg, b),
            ],
        ),
        _ => random_term(rng, cfg, max_nodes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_expansions_is_empty() {
        let cfg = GenConfig {
            seed: 1,
            max_expansions: 0,
            ..GenConfig::default()
        };
        let c = gen_convertible_to_f(&cfg);
        assert!(c.is_empty());
        assert_eq!(c.start, Term::Const(Const::F));
    }

    #[test]
    fn conversions_replay_and_end_at_f() {
        let oracle = Oracle::new(Fuel::default());
        for seed in 0..40 {
            let cfg = GenConfig {
                seed,
                max_expansions: 2 + (seed as usize % 7),
                ..GenConfig::default()
            };
            let c = gen_convertible_to_f(&cfg);
            assert_eq!(c.end(), &Term::Const(Const::F));
            oracle.replay_conversion(&c).unwrap();
            assert!(c.terms().iter().all(|t| t.size() <= cfg.max_size));
            assert_eq!(c, gen_convertible_to_f(&cfg));
        }
    }

    #[test]
    fn single_k_expansion() {
        let mut found = false;
        for seed in 0..200 {
            let cfg = GenConfig {
                seed,
                max_expansions: 1,
                ..GenConfig::default()
            };
            let c = gen_convertible_to_f(&cfg);
            if c.len() == 1 && c.steps[0].step.rule == 4 {
                let (head, args) = c.start.spine();
                assert!(head.is_const(Const::K));
                assert_eq!(args[0], &Term::Const(Const::F));
                found = true;
            }
        }
        assert!(found);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GenConfig::default().with_seed(7);
        assert_eq!(gen_term(&cfg), gen_term(&cfg));
        let mut a = cfg.rng();
        let mut b = cfg.rng();
        assert_eq!(random_lterm(&mut a, &cfg, 10), random_lterm(&mut b, &cfg, 10));
    }
}
