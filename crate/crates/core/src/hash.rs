//! 64-bit FNV-1a, used for hash partitioning and candidate bit vectors.

pub const FNV_OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
pub const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Seed folded into the offset basis of the candidate hash so it is
/// decorrelated from the partition hash.
pub const CANDIDATE_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    fnv1a64_seeded(0, bytes)
}

/// FNV-1a with the offset basis XORed by `seed`. A zero seed is plain FNV-1a.
pub fn fnv1a64_seeded(seed: u64, bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET_BASIS ^ seed, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn seed_changes_output() {
        assert_ne!(fnv1a64(b"x"), fnv1a64_seeded(CANDIDATE_SEED, b"x"));
    }
}
