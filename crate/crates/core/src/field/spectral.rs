use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Axis;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    })
}

/// Integer wavenumber of DFT bin `k` on a `2π`-periodic grid, with the
/// Nyquist bin dropped (its derivative is not representable as a real field).
fn wavenumber(k: usize, n: usize) -> f64 {
    if k < n / 2 {
        k as f64
    } else if k == n / 2 {
        0.0
    } else {
        k as f64 - n as f64
    }
}

pub(super) fn derivative(values: &[f64], n: usize, axis: Axis) -> Vec<f64> {
    let (fwd, inv) = plans(n);
    let mut buf: Vec<Complex64> = match axis {
        Axis::Y => values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        Axis::X => {
            let mut t = vec![Complex64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for j in 0..n {
                    t[j * n + i] = Complex64::new(values[i * n + j], 0.0);
                }
            }
            t
        }
    };
    fwd.process(&mut buf);
    let scale = 1.0 / n as f64;
    for line in buf.chunks_mut(n) {
        for (k, c) in line.iter_mut().enumerate() {
            let kk = wavenumber(k, n) * scale;
            *c = Complex64::new(-c.im * kk, c.re * kk);
        }
    }
    inv.process(&mut buf);
    match axis {
        Axis::Y => buf.iter().map(|c| c.re).collect(),
        Axis::X => {
            let mut out = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] = buf[j * n + i].re;
                }
            }
            out
        }
    }
}
