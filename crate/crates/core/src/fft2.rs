//! Row/column 2-D FFT on square row-major complex arrays.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft2 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub(crate) fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            forward: planner.plan_fft_forward(m),
        }
    }

    /// Unnormalized forward transform in place.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    fn run(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        assert_eq!(data.len(), m * m);
        transform_rows(data, m, fft);
        transpose(data, m);
        transform_rows(data, m, fft);
        transpose(data, m);
    }
}

fn transform_rows(data: &mut [Complex64], m: usize, fft: &Arc<dyn Fft<f64>>) {
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(m).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

fn transpose(data: &mut [Complex64], m: usize) {
    const BLOCK: usize = 32;
    for bi in (0..m).step_by(BLOCK) {
        for bj in (bi..m).step_by(BLOCK) {
            for i in bi..(bi + BLOCK).min(m) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + BLOCK).min(m) {
                    data.swap(i * m + j, j * m + i);
                }
            }
        }
    }
}
