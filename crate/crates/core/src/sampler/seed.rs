use rand::SeedableRng;

/// The generator behind every ABC run.
pub type AbcRng = rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replicate `index` of an experiment seeded with `base_seed`.
///
/// For a fixed base seed the map from index to seed is injective: both
/// `i ↦ i·odd` and the splitmix finaliser are bijections on `u64`.
pub fn derive_replicate_seed(base_seed: u64, replicate_index: u64) -> u64 {
    splitmix64(splitmix64(base_seed) ^ replicate_index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn rng_from_seed(seed: u64) -> AbcRng {
    AbcRng::seed_from_u64(seed)
}
