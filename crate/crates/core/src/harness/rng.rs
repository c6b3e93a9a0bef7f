use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every trial.
pub type TrialRng = ChaCha8Rng;

/// One step of SplitMix64: a bijective mixer used to derive independent seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of grid cell `cell` under `master`.
pub fn cell_seed(master: u64, cell: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(cell.wrapping_add(1)))
}

/// Seed of trial `trial` within a cell.
pub fn trial_seed(cell_seed: u64, trial: u64) -> u64 {
    splitmix64(cell_seed ^ splitmix64(trial.wrapping_add(0x5DEE_CE66)))
}

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}
