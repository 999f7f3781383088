//! Counter-based random numbers (Philox4x32-10).
//!
//! Every draw is a pure function of `(seed, path, step, lane)`, so a path
//! is reproducible no matter which worker simulates it or in what order.

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// Ten-round Philox block function on a 128-bit counter with a 64-bit key.
#[inline]
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

#[inline(always)]
fn unit_f64(hi: u32, lo: u32) -> f64 {
    let bits = ((hi as u64) << 21) ^ ((lo as u64) >> 11);
    bits as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Keyed stream for one path. Cheap to copy; holds no mutable state.
#[derive(Debug, Clone, Copy)]
pub struct PathRng {
    key: [u32; 2],
    path: u64,
}

impl PathRng {
    pub fn new(seed: u64, path: u64) -> PathRng {
        PathRng { key: [seed as u32, (seed >> 32) as u32], path }
    }

    #[inline]
    fn block(&self, step: u32, lane: u32) -> [u32; 4] {
        philox4x32([step, lane, self.path as u32, (self.path >> 32) as u32], self.key)
    }

    /// Two independent uniforms on `[0, 1)`.
    #[inline]
    pub fn uniforms(&self, step: u32, lane: u32) -> [f64; 2] {
        let b = self.block(step, lane);
        [unit_f64(b[0], b[1]), unit_f64(b[2], b[3])]
    }

    /// Standard normal via Box–Muller (cosine branch).
    #[inline]
    pub fn normal(&self, step: u32, lane: u32) -> f64 {
        let [u1, u2] = self.uniforms(step, lane);
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        r * (std::f64::consts::TAU * u2).cos()
    }
}
