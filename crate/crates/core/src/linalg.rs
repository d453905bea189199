//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DMatrixView, DVector};

use crate::C64;

/// Compact SVD `H = Q diag(σ) F^H` with `min(m_rx, m_tx)` columns.
#[derive(Debug, Clone)]
pub struct CompactSvd {
    /// Left singular vectors, `m_rx × ℓ_max`.
    pub q: DMatrix<C64>,
    /// Singular values, nonincreasing.
    pub sigma: Vec<f64>,
    /// Right singular vectors, `m_tx × ℓ_max`.
    pub f: DMatrix<C64>,
}

/// Compact SVD with singular values sorted nonincreasing and a fixed phase
/// convention: the first entry of each right singular vector whose magnitude
/// exceeds `1e-12` is real and positive (left vector rotated to match).
pub fn compact_svd(h: DMatrixView<'_, C64>) -> CompactSvd {
    let (m_rx, m_tx) = h.shape();
    let l = m_rx.min(m_tx);
    let svd = h.into_owned().svd(true, true);
    let u = svd.u.expect("left vectors requested");
    let v_t = svd.v_t.expect("right vectors requested");
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut q = DMatrix::zeros(m_rx, l);
    let mut f = DMatrix::zeros(m_tx, l);
    let mut sigma = Vec::with_capacity(l);
    for (col, &src) in order.iter().enumerate() {
        sigma.push(svd.singular_values[src].max(0.0));
        // V = (V^T)^H, so column `src` of V is the conjugated row of v_t.
        let first = (0..m_tx)
            .map(|i| v_t[(src, i)].conj())
            .find(|c| c.norm() > 1e-12);
        let phase = match first {
            Some(c) => c.conj() / c.norm(),
            None => C64::new(1.0, 0.0),
        };
        for i in 0..m_tx {
            f[(i, col)] = v_t[(src, i)].conj() * phase;
        }
        for i in 0..m_rx {
            q[(i, col)] = u[(i, src)] * phase;
        }
    }
    CompactSvd { q, sigma, f }
}

/// Singular values only, sorted nonincreasing.
pub fn singular_values(h: DMatrixView<'_, C64>) -> Vec<f64> {
    let mut s: Vec<f64> = h.into_owned().singular_values().iter().map(|v| v.max(0.0)).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// `Σ conj(a) ⊙ b` (Frobenius inner product ⟨A, B⟩ = tr(A^H B)).
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn frobenius_sq(a: &[C64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum()
}

/// Outer product `a b^H`.
pub fn outer(a: &DVector<C64>, b: &DVector<C64>) -> DMatrix<C64> {
    a * b.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn sample() -> DMatrix<C64> {
        DMatrix::from_fn(4, 3, |r, c| {
            C64::new(((r * 7 + c * 3) % 5) as f64 - 1.7, ((r + 2 * c) % 3) as f64 * 0.4)
        })
    }

    #[test]
    fn reconstructs_and_is_semi_unitary() {
        let h = sample();
        let s = compact_svd(h.as_view());
        let sig = DMatrix::from_diagonal(&DVector::from_iterator(
            3,
            s.sigma.iter().map(|&x| C64::new(x, 0.0)),
        ));
        let rec = &s.q * sig * s.f.adjoint();
        assert!((rec - &h).norm() < 1e-10);
        assert!((s.q.adjoint() * &s.q - DMatrix::identity(3, 3)).norm() < 1e-10);
        assert!((s.f.adjoint() * &s.f - DMatrix::identity(3, 3)).norm() < 1e-10);
        assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn phase_convention() {
        let h = sample();
        let s = compact_svd(h.as_view());
        for col in 0..3 {
            let first = (0..3).map(|i| s.f[(i, col)]).find(|c| c.norm() > 1e-12).unwrap();
            assert!(first.im.abs() < 1e-12 && first.re > 0.0);
        }
        // A global phase on H leaves F unchanged.
        let rotated = h.map(|c| c * C64::from_polar(1.0, 0.7));
        let s2 = compact_svd(rotated.as_view());
        assert!((s2.f - s.f).norm() < 1e-9);
    }
}
