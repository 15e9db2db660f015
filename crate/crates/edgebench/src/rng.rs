//! Small deterministic RNG so synthesized traces are reproducible across
//! platforms and language ports.
//!
//! The generator is SplitMix64 (Steele, Lea, Flood 2014; same constants as
//! `java.util.SplittableRandom`). Uniforms take the top 53 bits of each
//! output; normals come from the Box-Muller transform. Reference values for
//! both are pinned in the tests, so any port can check itself against them.

/// SplitMix64: passes BigCrush, one u64 of state, trivially portable.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in (0, 1]: top 53 bits, shifted into (0, 2^53], scaled.
    /// The open lower bound keeps `ln` in Box-Muller finite.
    pub fn next_unit_open(&mut self) -> f64 {
        (((self.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0)
    }

    /// Uniform in [0, 1): top 53 bits, scaled.
    pub fn next_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64) * (1.0 / 9007199254740992.0)
    }

    /// Standard normal via Box-Muller: sqrt(-2 ln u1) * cos(2 pi u2).
    /// One draw consumes exactly two generator outputs.
    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_unit_open();
        let u2 = self.next_unit();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Derives an independent child stream, e.g. one per synthesized run.
    pub fn child(&mut self) -> SplitMix64 {
        SplitMix64::new(self.next_u64())
    }
}
