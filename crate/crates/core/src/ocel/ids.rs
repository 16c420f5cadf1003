use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ObjectId;

const ALPHABET: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";
const LEN: usize = 5;

/// Seeded generator of short base-36 object ids in the style of `uih13`.
#[derive(Clone, Debug)]
pub struct IdGenerator {
    rng: ChaCha8Rng,
}

impl IdGenerator {
    pub fn seeded(seed: u64) -> Self {
        IdGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn draw(&mut self) -> String {
        let mut v = self.rng.next_u64();
        let mut s = String::with_capacity(LEN);
        for _ in 0..LEN {
            s.push(ALPHABET[(v % 36) as usize] as char);
            v /= 36;
        }
        s
    }

    /// Next id for which `taken` is false.
    pub fn fresh(&mut self, taken: impl Fn(&str) -> bool) -> ObjectId {
        loop {
            let s = self.draw();
            if !taken(&s) {
                return ObjectId(s);
            }
        }
    }
}
