//! Per-game seeds.
//!
//! Game `i` of team size `n` in a sweep with base seed `b` uses
//! `splitmix64(b ^ splitmix64((n << 32) | i))`. The mix depends only on
//! `(b, n, i)`, so growing a sweep keeps the seeds of its earlier games.

/// One step of the SplitMix64 generator, used as a 64-bit mixing function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn game_seed(base: u64, players: usize, index: usize) -> u64 {
    splitmix64(base ^ splitmix64(((players as u64) << 32) | index as u64))
}
