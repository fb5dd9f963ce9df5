use crate::raster::BinaryMask;

/// Normalized 1-D Gaussian taps, `size` odd.
pub fn gaussian_kernel_1d(size: usize, sigma: f64) -> Vec<f64> {
    assert!(size % 2 == 1 && sigma > 0.0, "kernel needs odd size and positive sigma");
    let half = (size / 2) as f64;
    let taps: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Normalized `size x size` Gaussian, row-major.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let k = gaussian_kernel_1d(size, sigma);
    let mut out = Vec::with_capacity(size * size);
    for a in &k {
        for b in &k {
            out.push(a * b);
        }
    }
    out
}

/// Per-pixel blending weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matte {
    pub width: u32,
    pub height: u32,
    pub alpha: Vec<f64>,
}

impl Matte {
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.alpha[y as usize * self.width as usize + x as usize]
    }

    pub fn uniform(width: u32, height: u32, alpha: f64) -> Self {
        Matte {
            width,
            height,
            alpha: vec![alpha; width as usize * height as usize],
        }
    }
}

pub const BLUR_SIZE: usize = 5;
pub const BLUR_SIGMA: f64 = 0.5;

/// Convolves the mask indicator with the 5x5, sigma 0.5 Gaussian (zero outside the raster).
pub fn blur_boundary(mask: &BinaryMask) -> Matte {
    let k = gaussian_kernel_1d(BLUR_SIZE, BLUR_SIGMA);
    let half = (BLUR_SIZE / 2) as i64;
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut rows = vec![0.0; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &t) in k.iter().enumerate() {
                if mask.get_signed(x + i as i64 - half, y) {
                    acc += t;
                }
            }
            rows[(y * w + x) as usize] = acc;
        }
    }
    let mut alpha = vec![0.0; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &t) in k.iter().enumerate() {
                let yy = y + i as i64 - half;
                if (0..h).contains(&yy) {
                    acc += t * rows[(yy * w + x) as usize];
                }
            }
            alpha[(y * w + x) as usize] = acc.min(1.0);
        }
    }
    Matte {
        width: mask.width(),
        height: mask.height(),
        alpha,
    }
}
