//! Seeded generation of random cyclically reduced relators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::freegroup::{GeneratorId, Letter, Registry, Word};
use crate::presentation::Presentation;

/// `a, b, …, z`, then `x26, x27, …`.
pub fn generator_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("x{i}")
            }
        })
        .collect()
}

/// A uniformly random freely reduced word of length `len`, redrawn until it
/// is cyclically reduced.
pub fn random_cyclically_reduced<R: Rng + ?Sized>(
    rng: &mut R,
    gens: &[GeneratorId],
    len: usize,
) -> Word {
    assert!(!gens.is_empty(), "need at least one generator");
    let alphabet: Vec<Letter> = gens
        .iter()
        .flat_map(|g| [g.pos(), g.neg()])
        .collect();
    loop {
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        while letters.len() < len {
            let next = alphabet.choose(rng).expect("nonempty alphabet");
            if letters.last().is_some_and(|l| l.cancels(next)) {
                continue;
            }
            letters.push(next.clone());
        }
        let w = Word::new(letters);
        if w.is_cyclically_reduced() {
            return w.reduce();
        }
    }
}

/// Random presentations over `gens` generators with relator length drawn
/// uniformly from `1..=max_len`.
pub struct RandomPresentations {
    rng: ChaCha8Rng,
    gens: usize,
    max_len: usize,
}

impl RandomPresentations {
    pub fn new(seed: u64, gens: usize, max_len: usize) -> Self {
        assert!(gens >= 1 && max_len >= 1);
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            gens,
            max_len,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Draws one presentation, declaring its generators in `registry`.
    pub fn next_in(&mut self, registry: &Registry) -> Presentation {
        let gens: Vec<GeneratorId> = generator_names(self.gens)
            .into_iter()
            .map(|n| registry.declare(n))
            .collect();
        let len = self.rng.gen_range(1..=self.max_len);
        let w = random_cyclically_reduced(&mut self.rng, &gens, len);
        Presentation::new(gens, w).expect("relator uses declared generators")
    }

    /// Draws one presentation as grammar text.
    pub fn next_text(&mut self) -> String {
        self.next_in(&Registry::new()).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        let n = generator_names(28);
        assert_eq!(n[0], "a");
        assert_eq!(n[25], "z");
        assert_eq!(n[27], "x27");
    }

    #[test]
    fn seeded_and_cyclically_reduced() {
        let mut a = RandomPresentations::new(7, 3, 10);
        let mut b = RandomPresentations::new(7, 3, 10);
        for _ in 0..200 {
            let reg = Registry::new();
            let p = a.next_in(&reg);
            assert!(p.relator().is_cyclically_reduced());
            assert!((1..=10).contains(&p.relator_len()));
            assert_eq!(p.to_string(), b.next_text());
        }
    }
}
