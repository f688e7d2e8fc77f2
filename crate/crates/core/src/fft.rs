//! Three-dimensional centered DFT used by the position↔momentum transform.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft(n, FftDirection::Forward),
                inverse: planner.plan_fft(n, FftDirection::Inverse),
            })
        })
        .clone()
}

/// Cyclic axis rotation `(i, j, k) -> (j, k, i)` of an `n³` cube.
fn rotate(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 8;
    let nn = n * n;
    // out[(j*n + k)*n + i] = in[i*nn + j*n + k]; treat as an n × nn transpose.
    for i0 in (0..n).step_by(B) {
        for c0 in (0..nn).step_by(B) {
            for i in i0..(i0 + B).min(n) {
                for c in c0..(c0 + B).min(nn) {
                    dst[c * n + i] = src[i * nn + c];
                }
            }
        }
    }
}

thread_local! {
    static SCRATCH: std::cell::RefCell<(Vec<Complex64>, Vec<Complex64>)> =
        const { std::cell::RefCell::new((Vec::new(), Vec::new())) };
}

/// Unnormalized 3-D DFT in place: `X[m] = Σ_k exp(∓2πi m·k/n) x[k]`.
pub(crate) fn dft3(data: &mut Vec<Complex64>, n: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n * n * n);
    let p = plans(n);
    let fft = if inverse { &p.inverse } else { &p.forward };
    SCRATCH.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (scratch, other) = &mut *guard;
        scratch.resize(fft.get_inplace_scratch_len(), Complex64::default());
        let mut buf = std::mem::take(other);
        buf.resize(data.len(), Complex64::default());
        for _ in 0..3 {
            fft.process_with_scratch(data, scratch);
            rotate(data, &mut buf, n);
            std::mem::swap(data, &mut buf);
        }
        *other = buf;
    });
}

/// Cyclic shift by `n/2` along every axis (an involution for even `n`).
pub(crate) fn half_shift(data: &mut [Complex64], n: usize) {
    debug_assert!(n.is_multiple_of(2));
    let h = n / 2;
    let (lo, hi) = data.split_at_mut(h * n * n);
    for i in 0..h {
        for j in 0..n {
            let jj = (j + h) % n;
            let a = &mut lo[(i * n + j) * n..(i * n + j + 1) * n];
            let b = &mut hi[(i * n + jj) * n..(i * n + jj + 1) * n];
            let (a0, a1) = a.split_at_mut(h);
            let (b0, b1) = b.split_at_mut(h);
            a0.swap_with_slice(b1);
            a1.swap_with_slice(b0);
        }
    }
}
