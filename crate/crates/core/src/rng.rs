//! Seeding hierarchy.
//!
//! Every random stream in the lab is a ChaCha8 generator whose 64-bit seed is
//! derived from its parent by mixing in a label and an index:
//!
//! ```text
//! experiment seed
//!   └─ instance seed      (label "instance", instance index)
//!        └─ noise seed    (label "noise",    η in micro-units)
//!             └─ gauge seed   (label "gauge", gauge index)
//!                  └─ solver seed (label "solver", 0)
//! ```
//!
//! Derivation is a pure function of (parent, label, index), so the result of
//! any task depends only on its position in the tree and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type LabRng = ChaCha8Rng;

/// A node in the seed tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl Seed {
    pub fn child(self, label: &str, index: u64) -> Seed {
        let a = splitmix64(self.0 ^ fnv1a(label));
        Seed(splitmix64(a ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D))))
    }

    pub fn rng(self) -> LabRng {
        LabRng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Quantises a noise level so it can serve as a seed-tree index.
pub fn eta_index(eta: f64) -> u64 {
    (eta * 1e6).round() as u64
}
