#![allow(dead_code)]

use hogdet::imageio::{encode_pgm, GrayWindow, WINDOW_HEIGHT, WINDOW_WIDTH};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

fn clamp(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Upright figure: head, torso and two legs over a textured background.
pub fn person_like(seed: u64) -> GrayWindow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bg: f64 = rng.random_range(20.0..120.0);
    let fg: f64 = bg + rng.random_range(60.0..130.0);
    let cx = 33.0 + rng.random_range(-3.0..3.0);
    let noise = rng.random_range(2.0..12.0);
    let mut n = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    GrayWindow::from_fn(|x, y| {
        let (x, y) = (x as f64, y as f64);
        let head = ((x - cx) / 7.0).powi(2) + ((y - 20.0) / 9.0).powi(2) <= 1.0;
        let torso = (x - cx).abs() <= 11.0 && (30.0..75.0).contains(&y);
        let legs = (75.0..122.0).contains(&y) && ((x - (cx - 6.0)).abs() <= 4.0 || (x - (cx + 6.0)).abs() <= 4.0);
        let base = if head || torso || legs { fg } else { bg };
        clamp(base + n.random_range(-noise..noise))
    })
}

/// Clutter: oriented stripes, blobs and noise with no upright figure.
pub fn background_like(seed: u64) -> GrayWindow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let period = rng.random_range(6.0..30.0);
    let amp = rng.random_range(20.0..90.0);
    let mean = rng.random_range(60.0..190.0);
    let blobs: Vec<(f64, f64, f64, f64)> = (0..rng.random_range(1..5))
        .map(|_| {
            (
                rng.random_range(0.0..WINDOW_WIDTH as f64),
                rng.random_range(0.0..WINDOW_HEIGHT as f64),
                rng.random_range(5.0..25.0),
                rng.random_range(-80.0..80.0),
            )
        })
        .collect();
    let mut n = ChaCha8Rng::seed_from_u64(seed ^ 0xb10b);
    GrayWindow::from_fn(|x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let phase = (xf * theta.cos() + yf * theta.sin()) * std::f64::consts::TAU / period;
        let mut v = mean + amp * phase.sin();
        for &(bx, by, r, d) in &blobs {
            if (xf - bx).powi(2) + (yf - by).powi(2) <= r * r {
                v += d;
            }
        }
        clamp(v + n.random_range(-6.0..6.0))
    })
}

pub fn noise(seed: u64) -> GrayWindow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayWindow::from_fn(|_, _| rng.random())
}

/// Linear ramp at a random angle.
pub fn ramp(seed: u64) -> GrayWindow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let slope = rng.random_range(0.3..3.0);
    GrayWindow::from_fn(|x, y| {
        clamp(128.0 + slope * ((x as f64 - 33.0) * theta.cos() + (y as f64 - 65.0) * theta.sin()))
    })
}

/// Axis-aligned rectangles: many gradients exactly on the 0 and 90 degree
/// axes.
pub fn rectangles(seed: u64) -> GrayWindow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rects: Vec<(usize, usize, usize, usize, u8)> = (0..rng.random_range(2..8))
        .map(|_| {
            let x0 = rng.random_range(0..60);
            let y0 = rng.random_range(0..120);
            (
                x0,
                y0,
                x0 + rng.random_range(3..30),
                y0 + rng.random_range(3..60),
                rng.random(),
            )
        })
        .collect();
    let bg = rng.random();
    GrayWindow::from_fn(|x, y| {
        rects
            .iter()
            .rev()
            .find(|&&(x0, y0, x1, y1, _)| (x0..x1).contains(&x) && (y0..y1).contains(&y))
            .map_or(bg, |r| r.4)
    })
}

/// Mixed corpus of `n` windows covering every generator.
pub fn corpus(n: usize, seed: u64) -> Vec<GrayWindow> {
    (0..n as u64)
        .map(|i| {
            let s = seed.wrapping_mul(1_000_003).wrapping_add(i);
            match i % 5 {
                0 => person_like(s),
                1 => background_like(s),
                2 => noise(s),
                3 => ramp(s),
                _ => rectangles(s),
            }
        })
        .collect()
}

pub fn write_pgm(path: &Path, w: &GrayWindow) {
    std::fs::write(path, encode_pgm(&w.to_gray_image())).unwrap();
}
