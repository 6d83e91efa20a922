//! Keyed random streams.
//!
//! A root seed is expanded into one ChaCha8 key per named domain
//! (`"ue-placement"`, `"shadowing"`, `"fading"`). Inside a domain, the
//! 64-bit ChaCha stream id addresses an individual draw sequence, so every
//! draw is reachable directly from its key without replaying any other
//! stream. Evaluation order and thread count therefore never affect values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub const UE_PLACEMENT: &str = "ue-placement";
pub const SHADOWING: &str = "shadowing";
pub const FADING: &str = "fading";

/// Key material for one named domain under a root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFamily {
    key: [u8; 32],
}

impl StreamFamily {
    pub fn new(root_seed: u64, domain: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(root_seed.to_le_bytes());
        hasher.update((domain.len() as u64).to_le_bytes());
        hasher.update(domain.as_bytes());
        Self {
            key: hasher.finalize().into(),
        }
    }

    /// Independent generator for stream `id`, positioned at its start.
    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(id);
        rng
    }
}

/// Stream id for a shadowing draw.
pub fn shadowing_stream_id(ue: u32, ru: u32) -> u64 {
    (u64::from(ue) << 32) | u64::from(ru)
}

pub const MAX_TTI: u64 = 1 << 28;
pub const MAX_RB: u64 = 1 << 12;
pub const MAX_RU: u64 = 1 << 8;
pub const MAX_UE: u64 = 1 << 16;

/// Stream id for a small-scale fading vector. Field widths: tti 28 bits,
/// rb 12 bits, ru 8 bits, ue 16 bits. Config validation keeps every
/// component in range.
pub fn fading_stream_id(tti: u64, rb: u32, ru: u32, ue: u32) -> u64 {
    debug_assert!(tti < MAX_TTI);
    debug_assert!(u64::from(rb) < MAX_RB);
    debug_assert!(u64::from(ru) < MAX_RU);
    debug_assert!(u64::from(ue) < MAX_UE);
    (tti << 36) | (u64::from(rb) << 24) | (u64::from(ru) << 16) | u64::from(ue)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_key_same_sequence() {
        let fam = StreamFamily::new(7, FADING);
        let (mut r1, mut r2) = (fam.stream(3), fam.stream(3));
        for _ in 0..8 {
            assert_eq!(r1.random::<u64>(), r2.random::<u64>());
        }
    }

    #[test]
    fn domains_and_streams_are_distinct() {
        let f1 = StreamFamily::new(7, FADING);
        let f2 = StreamFamily::new(7, SHADOWING);
        let f3 = StreamFamily::new(8, FADING);
        assert_ne!(f1, f2);
        assert_ne!(f1, f3);
        let x: u64 = f1.stream(0).random();
        let y: u64 = f1.stream(1).random();
        assert_ne!(x, y);
    }

    #[test]
    fn fading_ids_do_not_collide() {
        let a = fading_stream_id(1, 0, 0, 0);
        let b = fading_stream_id(0, 1, 0, 0);
        let c = fading_stream_id(0, 0, 1, 0);
        let d = fading_stream_id(0, 0, 0, 1);
        let all = [a, b, c, d];
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert_ne!(all[i], all[j]);
            }
        }
        assert_eq!(
            fading_stream_id(MAX_TTI - 1, (MAX_RB - 1) as u32, (MAX_RU - 1) as u32, (MAX_UE - 1) as u32),
            u64::MAX
        );
    }
}
