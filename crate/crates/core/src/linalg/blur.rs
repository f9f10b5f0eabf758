use super::{LinalgError, LinearMap, Result, Vector};

/// Gaussian blur on an `height x width` image stored row-major.
///
/// Correlation with a sampled, normalized Gaussian kernel and half-sample
/// symmetric boundary extension (`d c b a | a b c d | d c b a`). The kernel is
/// separable, so `apply` runs one 1-D pass per axis. With a symmetric kernel
/// and this boundary rule the operator is self-adjoint.
#[derive(Clone, Debug)]
pub struct BlurMap {
    height: usize,
    width: usize,
    ksize: usize,
    sigma: f64,
    taps: Vec<f64>,
}

pub fn gaussian_blur(height: usize, width: usize, ksize: usize, sigma: f64) -> Result<BlurMap> {
    BlurMap::new(height, width, ksize, sigma)
}

impl BlurMap {
    pub fn new(height: usize, width: usize, ksize: usize, sigma: f64) -> Result<Self> {
        if height == 0 || width == 0 || ksize == 0 {
            return Err(LinalgError::EmptyDimension);
        }
        if ksize % 2 == 0 {
            return Err(LinalgError::EvenKernel(ksize));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(LinalgError::InvalidSigma(sigma));
        }
        let radius = (ksize / 2) as i64;
        let raw: Vec<f64> = (-radius..=radius)
            .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        let taps = raw.into_iter().map(|w| w / total).collect();
        Ok(Self {
            height,
            width,
            ksize,
            sigma,
            taps,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ksize(&self) -> usize {
        self.ksize
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Full 2-D kernel, `ksize x ksize` row-major; the outer product of the 1-D taps.
    pub fn kernel(&self) -> Vec<Vec<f64>> {
        self.taps
            .iter()
            .map(|a| self.taps.iter().map(|b| a * b).collect())
            .collect()
    }

    fn correlate_rows(&self, src: &[f64], dst: &mut [f64]) {
        let r = (self.ksize / 2) as i64;
        let w = self.width;
        for (row_in, row_out) in src.chunks_exact(w).zip(dst.chunks_exact_mut(w)) {
            for (j, out) in row_out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (t, tap) in self.taps.iter().enumerate() {
                    acc += tap * row_in[reflect(j as i64 + t as i64 - r, w)];
                }
                *out = acc;
            }
        }
    }

    fn correlate_cols(&self, src: &[f64], dst: &mut [f64]) {
        let r = (self.ksize / 2) as i64;
        let (h, w) = (self.height, self.width);
        for i in 0..h {
            let out_row = &mut dst[i * w..(i + 1) * w];
            out_row.iter_mut().for_each(|x| *x = 0.0);
            for (t, tap) in self.taps.iter().enumerate() {
                let src_i = reflect(i as i64 + t as i64 - r, h);
                let src_row = &src[src_i * w..(src_i + 1) * w];
                for (o, s) in out_row.iter_mut().zip(src_row) {
                    *o += tap * s;
                }
            }
        }
    }
}

/// Half-sample symmetric index folding with period `2n`.
fn reflect(j: i64, n: usize) -> usize {
    let n = n as i64;
    let m = j.rem_euclid(2 * n);
    (if m < n { m } else { 2 * n - 1 - m }) as usize
}

impl LinearMap for BlurMap {
    fn in_dim(&self) -> usize {
        self.height * self.width
    }

    fn out_dim(&self) -> usize {
        self.height * self.width
    }

    fn apply(&self, v: &Vector) -> Vector {
        assert_eq!(v.dim(), self.in_dim(), "blur input size mismatch");
        if self.ksize == 1 {
            return v.clone();
        }
        let mut tmp = vec![0.0; v.dim()];
        let mut out = vec![0.0; v.dim()];
        self.correlate_rows(v.as_slice(), &mut tmp);
        self.correlate_cols(&tmp, &mut out);
        Vector::from_vec(out)
    }

    fn apply_adjoint(&self, u: &Vector) -> Vector {
        self.apply(u)
    }
}
