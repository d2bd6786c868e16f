//! Separable n-dimensional FFT on `ndarray` arrays.

use ndarray::{ArrayD, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place transform along every axis. The inverse is normalized by the
/// total number of points, so `inverse(forward(x)) == x`.
pub fn fft_nd(data: &mut ArrayD<Complex64>, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..data.ndim() {
        let len = data.shape()[axis];
        if len <= 1 {
            continue;
        }
        let plan = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for mut lane in data.lanes_mut(Axis(axis)) {
            for (b, v) in buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for (v, b) in lane.iter_mut().zip(&buf) {
                *v = *b;
            }
        }
    }
    if inverse {
        let scale = 1.0 / data.len() as f64;
        data.mapv_inplace(|v| v * scale);
    }
}

/// Signed integer frequency of bin `i` in a transform of length `len`
/// (`len/2` maps to the negative Nyquist bin).
pub fn frequency(i: usize, len: usize) -> i64 {
    if 2 * i < len {
        i as i64
    } else {
        i as i64 - len as i64
    }
}

pub fn to_complex(values: &ArrayD<f64>) -> ArrayD<Complex64> {
    values.mapv(|v| Complex64::new(v, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::IxDyn;

    #[test]
    fn round_trip_2d() {
        let a = ArrayD::from_shape_fn(IxDyn(&[6, 4]), |ix| (ix[0] * 7 + ix[1] * 3) as f64 % 5.0);
        let mut c = to_complex(&a);
        fft_nd(&mut c, false);
        assert!((c[[0, 0]].re - a.sum()).abs() < 1e-12);
        fft_nd(&mut c, true);
        for (x, y) in c.iter().zip(a.iter()) {
            assert!((x.re - y).abs() < 1e-12 && x.im.abs() < 1e-12);
        }
    }

    #[test]
    fn frequencies() {
        let f: Vec<i64> = (0..5).map(|i| frequency(i, 5)).collect();
        assert_eq!(f, vec![0, 1, 2, -2, -1]);
        assert_eq!(frequency(2, 4), -2);
    }
}
