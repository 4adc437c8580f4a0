//! Seeded random generators for queries, expressions and databases.
//!
//! Everything here is deterministic in the seed, which keeps property tests
//! and the acceptance suite reproducible.

use crate::alphabet::Alphabet;
use crate::automata::regex::Regex;
use crate::query::{Atom, Crpq, Label, Ucrpq, VarId};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random regex AST of at most `max_size` nodes. `epsilon_free` restricts to
/// operators that cannot accept the empty word.
pub fn random_regex(
    alphabet: &Alphabet,
    max_size: usize,
    epsilon_free: bool,
    rng: &mut ChaCha8Rng,
) -> Regex {
    fn letter(alphabet: &Alphabet, rng: &mut ChaCha8Rng) -> Regex {
        let k = rng.gen_range(0..alphabet.len()) as u16;
        Regex::Letter(crate::alphabet::Symbol(k))
    }
    if max_size <= 1 {
        return letter(alphabet, rng);
    }
    let choice = rng.gen_range(0..if epsilon_free { 5 } else { 8 });
    match choice {
        0 | 1 => letter(alphabet, rng),
        2 => {
            let n = rng.gen_range(2..=3.min(max_size.saturating_sub(1)).max(2));
            let parts = (0..n)
                .map(|_| random_regex(alphabet, (max_size - 1) / n, epsilon_free, rng))
                .collect();
            Regex::concat(parts)
        }
        3 => {
            let n = rng.gen_range(2..=3.min(max_size.saturating_sub(1)).max(2));
            let parts = (0..n)
                .map(|_| random_regex(alphabet, (max_size - 1) / n, epsilon_free, rng))
                .collect();
            Regex::union(parts)
        }
        4 => Regex::plus(random_regex(alphabet, max_size - 1, epsilon_free, rng)),
        5 => Regex::star(random_regex(alphabet, max_size - 1, false, rng)),
        6 => Regex::opt(random_regex(alphabet, max_size - 1, false, rng)),
        _ => Regex::AnyLetter,
    }
}

/// Random simple-expression regex: 1..=`max_factors` factors, each `a+` or a
/// letter set of 1..=2 letters.
pub fn random_sre_regex(alphabet: &Alphabet, max_factors: usize, rng: &mut ChaCha8Rng) -> Regex {
    let n = rng.gen_range(1..=max_factors.max(1));
    let parts = (0..n)
        .map(|_| {
            let a = crate::alphabet::Symbol(rng.gen_range(0..alphabet.len()) as u16);
            if rng.gen_bool(0.5) {
                Regex::plus(Regex::Letter(a))
            } else if rng.gen_bool(0.4) && alphabet.len() > 1 {
                let b = crate::alphabet::Symbol(rng.gen_range(0..alphabet.len()) as u16);
                Regex::union(vec![Regex::Letter(a), Regex::Letter(b)])
            } else {
                Regex::Letter(a)
            }
        })
        .collect();
    Regex::concat(parts)
}

fn assemble(
    name: &str,
    alphabet: &Alphabet,
    n_vars: usize,
    arity: usize,
    labels: Vec<Regex>,
    rng: &mut ChaCha8Rng,
) -> Crpq {
    let var_names: Vec<String> = (0..n_vars).map(|i| format!("v{i}")).collect();
    let outputs: Vec<VarId> =
        (0..arity).map(|_| VarId(rng.gen_range(0..n_vars) as u32)).collect();
    let atoms = labels
        .into_iter()
        .map(|regex| Atom {
            src: VarId(rng.gen_range(0..n_vars) as u32),
            label: Label::from_regex(regex, alphabet),
            dst: VarId(rng.gen_range(0..n_vars) as u32),
        })
        .collect();
    Crpq::new(name, alphabet.clone(), var_names, outputs, atoms)
}

/// Random CRPQ whose labels are drawn from a small stock of shapes.
pub fn random_crpq(
    alphabet: &Alphabet,
    max_atoms: usize,
    arity: usize,
    rng: &mut ChaCha8Rng,
) -> Crpq {
    let n_atoms = rng.gen_range(1..=max_atoms.max(1));
    let n_vars = rng.gen_range(2..=(n_atoms + 2));
    let labels = (0..n_atoms)
        .map(|_| {
            // Mix plain letters with recursive shapes.
            match rng.gen_range(0..6) {
                0 | 1 => random_regex(alphabet, 3, true, rng),
                2 => Regex::plus(random_regex(alphabet, 2, true, rng)),
                3 => random_sre_regex(alphabet, 2, rng),
                4 => Regex::star(random_regex(alphabet, 2, true, rng)),
                _ => random_regex(alphabet, 5, false, rng),
            }
        })
        .collect();
    assemble("rand", alphabet, n_vars, arity, labels, rng)
}

/// Random conjunctive query: every label a single letter.
pub fn random_cq(alphabet: &Alphabet, max_atoms: usize, arity: usize, rng: &mut ChaCha8Rng) -> Crpq {
    let n_atoms = rng.gen_range(1..=max_atoms.max(1));
    let n_vars = rng.gen_range(2..=(n_atoms + 2));
    let labels = (0..n_atoms)
        .map(|_| Regex::Letter(crate::alphabet::Symbol(rng.gen_range(0..alphabet.len()) as u16)))
        .collect();
    assemble("cq", alphabet, n_vars, arity, labels, rng)
}

/// Random union of simple-expression CRPQs.
pub fn random_sre_ucrpq(
    alphabet: &Alphabet,
    max_disjuncts: usize,
    max_atoms: usize,
    max_factors: usize,
    arity: usize,
    rng: &mut ChaCha8Rng,
) -> Ucrpq {
    let n = rng.gen_range(1..=max_disjuncts.max(1));
    let disjuncts: Vec<Crpq> = (0..n)
        .map(|i| {
            let n_atoms = rng.gen_range(1..=max_atoms.max(1));
            let n_vars = rng.gen_range(2..=(n_atoms + 2));
            let labels = (0..n_atoms)
                .map(|_| random_sre_regex(alphabet, max_factors, rng))
                .collect();
            assemble(&format!("d{i}"), alphabet, n_vars, arity, labels, rng)
        })
        .collect();
    Ucrpq::new(disjuncts).expect("same arity by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::sre::classify_sre;

    #[test]
    fn generators_are_seed_deterministic() {
        let ab = Alphabet::new(["a", "b"]);
        let q1 = random_crpq(&ab, 4, 2, &mut rng(42));
        let q2 = random_crpq(&ab, 4, 2, &mut rng(42));
        assert_eq!(format!("{q1}"), format!("{q2}"));
    }

    #[test]
    fn sre_generator_stays_in_fragment() {
        let ab = Alphabet::new(["a", "b"]);
        let mut r = rng(7);
        for _ in 0..50 {
            let regex = random_sre_regex(&ab, 2, &mut r);
            assert!(classify_sre(&regex, &ab, false).is_some(), "{regex:?}");
        }
    }

    #[test]
    fn epsilon_free_regexes_reject_the_empty_word() {
        let ab = Alphabet::new(["a", "b"]);
        let mut r = rng(3);
        for _ in 0..60 {
            let regex = random_regex(&ab, 6, true, &mut r);
            let nfa = crate::automata::nfa::compile_nfa(&regex, &ab);
            assert!(!nfa.has_epsilon(), "{regex:?}");
        }
    }
}
