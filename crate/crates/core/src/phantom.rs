//! Synthetic fundus-like images with known ground truth, for tests and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imgcore::ImageBuffer;
use crate::vessel_erosion::VesselMask;

/// A straight vessel segment. Endpoints are fractions of the frame size,
/// width is in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vessel {
    pub from: (f64, f64),
    pub to: (f64, f64),
    pub width: f64,
}

impl Vessel {
    pub fn new(from: (f64, f64), to: (f64, f64), width: f64) -> Self {
        Self { from, to, width }
    }

    fn distance(&self, x: f64, y: f64, w: f64, h: f64) -> f64 {
        let (ax, ay) = (self.from.0 * w, self.from.1 * h);
        let (bx, by) = (self.to.0 * w, self.to.1 * h);
        let (dx, dy) = (bx - ax, by - ay);
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((x - ax) * dx + (y - ay) * dy) / len2).clamp(0.0, 1.0)
        };
        ((x - ax - t * dx).powi(2) + (y - ay - t * dy).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    pub background: [f64; 3],
    pub vessel_color: [f64; 3],
    pub vessels: Vec<Vessel>,
    /// Black out everything outside a centred circular field of view.
    pub disc: bool,
    /// Radial darkening strength; 0 disables.
    pub vignette: f64,
    /// Additive white haze fraction in `[0, 1)`.
    pub veil: f64,
    /// Bright blob `(cx, cy, radius, strength)`, position and radius as frame fractions.
    pub glare: Option<(f64, f64, f64, f64)>,
    /// Half-width of uniform per-pixel noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
            background: [0.75, 0.42, 0.08],
            vessel_color: [0.5, 0.22, 0.05],
            vessels: vec![
                Vessel::new((0.1, 0.5), (0.9, 0.45), 3.0),
                Vessel::new((0.5, 0.1), (0.45, 0.9), 2.0),
                Vessel::new((0.2, 0.2), (0.8, 0.75), 2.0),
                Vessel::new((0.25, 0.8), (0.75, 0.25), 1.5),
            ],
            disc: false,
            vignette: 0.0,
            veil: 0.0,
            glare: None,
            noise: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Phantom {
    /// Vessels on a flat background, no degradation.
    pub clean: ImageBuffer,
    /// `clean` with vignette, veil, glare and noise applied.
    pub observed: ImageBuffer,
    pub vessel_mask: VesselMask,
}

impl PhantomSpec {
    pub fn build(&self) -> Phantom {
        let (w, h) = (self.width, self.height);
        let (wf, hf) = (w as f64, h as f64);
        let centre = |x: usize, y: usize| (x as f64 + 0.5 - 0.5 * wf, y as f64 + 0.5 - 0.5 * hf);
        let disc_r = 0.45 * wf.min(hf);
        let inside = |x: usize, y: usize| {
            let (dx, dy) = centre(x, y);
            !self.disc || dx * dx + dy * dy <= disc_r * disc_r
        };

        let vessel_mask = VesselMask::from_fn(w, h, |x, y| {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let hit = inside(x, y) && self.vessels.iter().any(|v| v.distance(px, py, wf, hf) <= 0.5 * v.width);
            if hit {
                1.0
            } else {
                0.0
            }
        })
        .expect("binary mask values are in range");

        let clean = ImageBuffer::from_fn(w, h, 3, |x, y, c| {
            if !inside(x, y) {
                0.0
            } else if vessel_mask.is_vessel(x, y) {
                self.vessel_color[c]
            } else {
                self.background[c]
            }
        })
        .expect("dimensions are non-zero");

        let half_diag = 0.5 * (wf * wf + hf * hf).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut data = Vec::with_capacity(w * h * 3);
        for y in 0..h {
            for x in 0..w {
                let (dx, dy) = centre(x, y);
                let d2 = (dx * dx + dy * dy) / (half_diag * half_diag);
                let gain = (-3.0 * self.vignette * d2).exp();
                let glare = self.glare.map_or(0.0, |(gx, gy, r, s)| {
                    let ex = x as f64 + 0.5 - gx * wf;
                    let ey = y as f64 + 0.5 - gy * hf;
                    let rr = r * wf;
                    s * (-(ex * ex + ey * ey) / (2.0 * rr * rr)).exp()
                });
                for c in 0..3 {
                    let v = if inside(x, y) {
                        let mut v = clean.get(x, y, c) * gain;
                        v = v * (1.0 - self.veil) + self.veil;
                        v += glare;
                        if self.noise > 0.0 {
                            v += rng.gen_range(-self.noise..=self.noise);
                        }
                        v
                    } else {
                        0.0
                    };
                    data.push(v);
                }
            }
        }
        let observed = ImageBuffer::from_clamped(w, h, 3, data).expect("dimensions match");
        Phantom {
            clean,
            observed,
            vessel_mask,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_undegraded() {
        let ph = PhantomSpec::default().build();
        assert_eq!(ph.clean, ph.observed);
        assert!(ph.vessel_mask.vessel_count() > 100);
        assert_eq!(ph.observed.get(100, 20, 1), 0.42);
    }

    #[test]
    fn disc_blacks_out_corners() {
        let ph = PhantomSpec {
            disc: true,
            veil: 0.3,
            ..PhantomSpec::default()
        }
        .build();
        assert_eq!(ph.observed.pixel(0, 0), &[0.0, 0.0, 0.0]);
        assert!(!ph.vessel_mask.is_vessel(0, 0));
        assert!(ph.observed.get(64, 64, 0) > 0.0);
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let spec = PhantomSpec {
            noise: 0.05,
            seed: 9,
            ..PhantomSpec::default()
        };
        assert_eq!(spec.build().observed, spec.build().observed);
        let other = PhantomSpec { seed: 10, ..spec.clone() };
        assert_ne!(spec.build().observed, other.build().observed);
    }
}
