//! Spatial filters on scalar planes: box means, min filters, Gaussian blur
//! and the guided filter.

use serde::{Deserialize, Serialize};

use crate::imgcore::Plane;

/// How out-of-frame samples are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Periodic: index `-1` reads the last row/column.
    #[default]
    Wrap,
    /// Edge replication.
    Clamp,
}

impl Boundary {
    #[inline]
    fn index(self, i: isize, len: usize) -> usize {
        match self {
            Boundary::Wrap => i.rem_euclid(len as isize) as usize,
            Boundary::Clamp => i.clamp(0, len as isize - 1) as usize,
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wrap" => Ok(Boundary::Wrap),
            "clamp" => Ok(Boundary::Clamp),
            other => Err(format!("unknown boundary `{other}` (expected wrap|clamp)")),
        }
    }
}

/// Mean over the `(2r+1)^2` window clipped to the frame (integral image).
pub fn box_mean(p: &Plane, radius: usize) -> Plane {
    let (w, h) = p.dims();
    let stride = w + 1;
    let mut integral = vec![0.0; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += p.get(x, y);
            integral[(y + 1) * stride + x + 1] = integral[y * stride + x + 1] + row;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let y0 = y.saturating_sub(radius);
        let y1 = (y + radius + 1).min(h);
        for x in 0..w {
            let x0 = x.saturating_sub(radius);
            let x1 = (x + radius + 1).min(w);
            let sum = integral[y1 * stride + x1] - integral[y0 * stride + x1] - integral[y1 * stride + x0]
                + integral[y0 * stride + x0];
            out[y * w + x] = sum / ((x1 - x0) * (y1 - y0)) as f64;
        }
    }
    Plane::new(w, h, out).expect("same dims")
}

/// Minimum over a `patch x patch` window with edge replication. `patch` must be odd.
pub fn min_filter(p: &Plane, patch: usize) -> Plane {
    debug_assert!(patch % 2 == 1);
    let r = patch / 2;
    if r == 0 {
        return p.clone();
    }
    let (w, h) = p.dims();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let lo = x.saturating_sub(r);
            let hi = (x + r).min(w - 1);
            tmp[y * w + x] = (lo..=hi).map(|i| p.get(i, y)).fold(f64::INFINITY, f64::min);
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(h - 1);
        for x in 0..w {
            out[y * w + x] = (lo..=hi).map(|j| tmp[j * w + x]).fold(f64::INFINITY, f64::min);
        }
    }
    Plane::new(w, h, out).expect("same dims")
}

/// Sum over the window `[i + lo, i + lo + len)` in both axes, one axis at a time.
pub fn box_sum(p: &Plane, len: usize, lo: isize, boundary: Boundary) -> Plane {
    let (w, h) = p.dims();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for k in 0..len as isize {
                acc += p.get(boundary.index(x as isize + lo + k, w), y);
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for k in 0..len as isize {
                acc += tmp[boundary.index(y as isize + lo + k, h) * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    Plane::new(w, h, out).expect("same dims")
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian blur. A non-positive sigma returns the input.
pub fn gaussian_blur(p: &Plane, sigma: f64, boundary: Boundary) -> Plane {
    if sigma <= 0.0 {
        return p.clone();
    }
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as isize;
    let (w, h) = p.dims();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * p.get(boundary.index(x as isize + i as isize - r, w), y))
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * tmp[boundary.index(y as isize + i as isize - r, h) * w + x])
                .sum();
        }
    }
    Plane::new(w, h, out).expect("same dims")
}

/// Guided filter (He et al.): edge-preserving smoothing of `input`
/// steered by `guide`, with window radius `radius` and regularizer `eps`.
pub fn guided_filter(guide: &Plane, input: &Plane, radius: usize, eps: f64) -> Plane {
    let mean_i = box_mean(guide, radius);
    let mean_p = box_mean(input, radius);
    let corr_ip = box_mean(&guide.zip_map(input, |a, b| a * b), radius);
    let corr_ii = box_mean(&guide.map(|a| a * a), radius);

    let var_i = corr_ii.zip_map(&mean_i, |c, m| (c - m * m).max(0.0));
    let cov_ip = corr_ip.zip_map(&mean_i.zip_map(&mean_p, |mi, mp| mi * mp), |c, m| c - m);

    let a = cov_ip.zip_map(&var_i, |c, v| c / (v + eps));
    let b = mean_p.zip_map(&a.zip_map(&mean_i, |a, m| a * m), |mp, am| mp - am);
    let mean_a = box_mean(&a, radius);
    let mean_b = box_mean(&b, radius);
    mean_a.zip_map(guide, |a, g| a * g).zip_map(&mean_b, |ag, b| ag + b)
}
