//! Action of exp(−iHt) on a vector for sparse Hermitian H.
//!
//! Chebyshev expansion on the Gershgorin interval [c − r, c + r]:
//! exp(−iHt) = e^{−ict} Σ_k (2 − δ_k0)(−i)^k J_k(rt) T_k((H − c)/r).

use nalgebra::DVector;

use super::model::C64;

/// Compressed sparse rows.
#[derive(Clone, Debug)]
pub struct Csr {
    pub dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    /// Duplicate entries are summed.
    pub fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, C64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(entries.len());
        let mut vals: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry present") += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn mul_into(&self, x: &DVector<C64>, out: &mut DVector<C64>) {
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            out[r] = acc;
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k];
                if (self.vals[k] - self.get(c, r).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    fn get(&self, r: usize, c: usize) -> C64 {
        let row = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        row.binary_search(&c)
            .map(|k| self.vals[self.row_ptr[r] + k])
            .unwrap_or_default()
    }

    /// Gershgorin enclosure of the (real) spectrum: (centre, half-width).
    pub fn spectral_interval(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.dim {
            let mut d = 0.0;
            let mut off = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[k] == r {
                    d = self.vals[k].re;
                } else {
                    off += self.vals[k].norm();
                }
            }
            lo = lo.min(d - off);
            hi = hi.max(d + off);
        }
        if self.dim == 0 {
            return (0.0, 0.0);
        }
        ((lo + hi) / 2.0, (hi - lo) / 2.0)
    }
}

/// J_0(x) … J_{kmax}(x) for x ≥ 0 by Miller's backward recurrence.
pub fn bessel_j(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = kmax.max(x.ceil() as usize) + 40 + (x.sqrt() as usize) * 4;
    let start = start + start % 2;
    let (mut jp1, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for k in (0..=start).rev() {
        // j holds J_k, jp1 holds J_{k+1} (unnormalized).
        if k <= kmax {
            out[k] = j;
        }
        if k % 2 == 0 {
            norm += if k == 0 { j } else { 2.0 * j };
        }
        if k == 0 {
            break;
        }
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            // Rescale to stay in range.
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// exp(−iHt)·v for Hermitian `h`.
pub fn expmv_hermitian(h: &Csr, t: f64, v: &DVector<C64>) -> DVector<C64> {
    let (c, r) = h.spectral_interval();
    let x = r * t.abs();
    let phase = C64::from_polar(1.0, -c * t);
    if x < 1e-300 {
        return v * phase;
    }
    // Coefficients decay super-exponentially past k ≈ x.
    let kmax = (x + 10.0 * x.cbrt() + 30.0).ceil() as usize;
    let jk = bessel_j(x, kmax);
    let sgn = t.signum();
    // T_k of the scaled operator A = (H − c)/r applied to v.
    let apply = |x_in: &DVector<C64>, out: &mut DVector<C64>| {
        h.mul_into(x_in, out);
        for i in 0..out.len() {
            out[i] = (out[i] - x_in[i] * c) / r;
        }
    };
    let mut t_prev = v.clone();
    let mut t_cur = DVector::<C64>::zeros(v.len());
    apply(&t_prev, &mut t_cur);
    let mut acc = v * C64::from(jk[0]);
    // (−i·sgn)^k
    let step = C64::new(0.0, -sgn);
    let mut ik = step;
    acc += &t_cur * (ik * 2.0 * jk[1]);
    let mut scratch = DVector::<C64>::zeros(v.len());
    for &j in jk.iter().skip(2) {
        apply(&t_cur, &mut scratch);
        // T_{k+1} = 2A T_k − T_{k−1}
        for i in 0..scratch.len() {
            scratch[i] = scratch[i] * 2.0 - t_prev[i];
        }
        std::mem::swap(&mut t_prev, &mut t_cur);
        std::mem::swap(&mut t_cur, &mut scratch);
        ik *= step;
        acc += &t_cur * (ik * 2.0 * j);
    }
    acc * phase
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn bessel_values() {
        // J_0(1), J_1(1), J_5(10), J_0(50) from standard tables.
        let j = bessel_j(1.0, 3);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        let j = bessel_j(10.0, 5);
        assert!((j[5] - -0.234_061_528_186_793_6).abs() < 1e-14);
        let j = bessel_j(50.0, 0);
        assert!((j[0] - 0.055_812_327_669_251_86).abs() < 1e-13);
    }

    #[test]
    fn matches_dense_exponential() {
        let d = 12;
        let mut dense = DMatrix::<C64>::zeros(d, d);
        let mut trip = Vec::new();
        let mut seed = 1u64;
        let mut rnd = || {
            seed = crate::seeding::derive_seed(seed, &[7]);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..d {
            let v = C64::new(300.0 * rnd(), 0.0);
            dense[(i, i)] = v;
            trip.push((i, i, v));
            for j in (i + 1)..d {
                if rnd() > 0.2 {
                    continue;
                }
                let v = C64::new(400.0 * rnd(), 50.0 * rnd());
                dense[(i, j)] = v;
                dense[(j, i)] = v.conj();
                trip.push((i, j, v));
                trip.push((j, i, v.conj()));
            }
        }
        let h = Csr::from_triplets(d, trip);
        assert!(h.is_hermitian(0.0));
        let v = DVector::from_fn(d, |i, _| C64::new(i as f64, 1.0)).normalize();
        for t in [0.0, 1e-3, 0.3, -0.7] {
            let want = (dense.clone() * C64::new(0.0, -t)).exp() * &v;
            let got = expmv_hermitian(&h, t, &v);
            assert!((want - got).norm() < 1e-11, "t = {t}");
        }
    }
}
