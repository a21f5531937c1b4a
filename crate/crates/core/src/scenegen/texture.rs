use serde::{Deserialize, Serialize};

use crate::seeds::splitmix64;

/// Procedural plane texture, evaluated analytically at any plane point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Background {
    /// Octaves of value noise, each with half the period and amplitude of the
    /// previous one: a shared luminance field plus a weaker per-channel tint.
    ValueNoise {
        octaves: u32,
        base_period: f64,
        /// Half-range of each channel around mid-gray.
        contrast: f64,
    },
    Checker {
        cell: f64,
        low: [u8; 3],
        high: [u8; 3],
    },
}

impl Default for Background {
    fn default() -> Self {
        Background::ValueNoise {
            octaves: 5,
            base_period: 64.0,
            contrast: 80.0,
        }
    }
}

impl Background {
    pub(crate) fn validate(&self) -> Result<(), String> {
        match self {
            Background::ValueNoise {
                octaves,
                base_period,
                contrast,
            } => {
                if *octaves < 3 {
                    return Err(format!("value noise needs at least 3 octaves, got {octaves}"));
                }
                if !(*base_period >= 2.0) {
                    return Err("base_period must be at least 2".into());
                }
                if !(0.0..=127.0).contains(contrast) {
                    return Err("contrast must lie in [0, 127]".into());
                }
            }
            Background::Checker { cell, .. } => {
                if !(*cell > 0.0) {
                    return Err("checker cell must be positive".into());
                }
            }
        }
        Ok(())
    }

    pub(crate) fn sample(&self, x: f64, y: f64, seed: u64) -> [f64; 3] {
        match self {
            Background::ValueNoise {
                octaves,
                base_period,
                contrast,
            } => {
                let field = |layer: u64| {
                    let (mut sum, mut norm, mut amp, mut period) = (0.0, 0.0, 1.0, *base_period);
                    for oct in 0..*octaves {
                        let lattice = seed ^ (u64::from(oct) << 40) ^ (layer << 56);
                        sum += amp * value_noise(x / period, y / period, lattice);
                        norm += amp;
                        amp *= 0.5;
                        period *= 0.5;
                    }
                    2.0 * sum / norm - 1.0
                };
                let luma = field(0);
                let mut out = [0.0; 3];
                for (c, o) in out.iter_mut().enumerate() {
                    *o = 127.5 + contrast * (0.7 * luma + 0.3 * field(c as u64 + 1));
                }
                out
            }
            Background::Checker { cell, low, high } => {
                let parity = ((x / cell).floor() as i64 + (y / cell).floor() as i64).rem_euclid(2);
                let c = if parity == 0 { low } else { high };
                c.map(f64::from)
            }
        }
    }
}

fn lattice_value(ix: i64, iy: i64, seed: u64) -> f64 {
    let h = splitmix64(seed ^ splitmix64((ix as u64).wrapping_mul(0x9E37_79B9) ^ (iy as u64).rotate_left(32)));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn quintic(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

/// Smoothly interpolated lattice noise in `[0, 1]`.
fn value_noise(x: f64, y: f64, seed: u64) -> f64 {
    let (fx, fy) = (x.floor(), y.floor());
    let (ix, iy) = (fx as i64, fy as i64);
    let (tx, ty) = (quintic(x - fx), quintic(y - fy));
    let v00 = lattice_value(ix, iy, seed);
    let v10 = lattice_value(ix + 1, iy, seed);
    let v01 = lattice_value(ix, iy + 1, seed);
    let v11 = lattice_value(ix + 1, iy + 1, seed);
    let top = v00 + (v10 - v00) * tx;
    let bottom = v01 + (v11 - v01) * tx;
    top + (bottom - top) * ty
}
