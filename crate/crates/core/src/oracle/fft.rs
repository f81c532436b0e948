//! In-place 3-D FFT over an x-fastest complex array, built from 1-D passes.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Smallest integer ≥ `n` with no prime factor above 5.
pub(crate) fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Angular wavenumber of DFT index `m` on `n` samples of spacing `h`.
pub(crate) fn wavenumber(m: usize, n: usize, h: f64) -> f64 {
    let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
    std::f64::consts::TAU * signed / (n as f64 * h)
}

/// Unnormalised forward transform `û_k = Σ u_r e^{−ik·r}`.
pub(crate) fn fft3_forward(data: &mut [Complex64], dims: [usize; 3]) {
    let [nx, ny, nz] = dims;
    assert_eq!(data.len(), nx * ny * nz);
    let mut planner = FftPlanner::new();

    planner.plan_fft_forward(nx).process(data);

    let fy = planner.plan_fft_forward(ny);
    let mut line = vec![Complex64::default(); ny * nx];
    for slab in data.chunks_mut(nx * ny) {
        for j in 0..ny {
            for i in 0..nx {
                line[i * ny + j] = slab[i + nx * j];
            }
        }
        fy.process(&mut line);
        for j in 0..ny {
            for i in 0..nx {
                slab[i + nx * j] = line[i * ny + j];
            }
        }
    }

    let fz = planner.plan_fft_forward(nz);
    let mut line = vec![Complex64::default(); nz * nx];
    for j in 0..ny {
        for k in 0..nz {
            for i in 0..nx {
                line[i * nz + k] = data[i + nx * (j + ny * k)];
            }
        }
        fz.process(&mut line);
        for k in 0..nz {
            for i in 0..nx {
                data[i + nx * (j + ny * k)] = line[i * nz + k];
            }
        }
    }
}
