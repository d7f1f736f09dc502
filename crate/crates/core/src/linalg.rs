//! Dense complex singular value decomposition.
//!
//! One-sided Jacobi (Hestenes) iteration. It is slower than bidiagonalisation
//! but accurate to working precision on the small matrices used here,
//! including ones with clustered singular values near 1.

use nalgebra::DMatrix;

use crate::num::Complex64;

type CMatrix = DMatrix<Complex64>;

/// `M = u * diag(singular_values) * v_t` with `u`, `v_t` unitary.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v_t: CMatrix,
}

const MAX_SWEEPS: usize = 80;

/// SVD of a square complex matrix.
pub fn svd(m: &CMatrix) -> Svd {
    assert!(m.is_square(), "square matrices only");
    let n = m.nrows();
    let mut g = m.clone();
    let mut v = CMatrix::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = g.column(p).iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = g.column(q).iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = g.column(p).iter().zip(g.column(q).iter()).map(|(a, b)| a.conj() * b).sum();
                let mag = gamma.norm();
                if mag <= f64::EPSILON * (alpha * beta).sqrt() || mag == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / mag;
                let zeta = (beta - alpha) / (2.0 * mag);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // columns (p, q) <- (p, q) * [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                let e = phase.conj();
                for mat in [&mut g, &mut v] {
                    for i in 0..n {
                        let (xp, xq) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = xp * c - xq * e * s;
                        mat[(i, q)] = xp * s + xq * e * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let singular_values: Vec<f64> = (0..n).map(|j| g.column(j).norm()).collect();
    let top = singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut u = CMatrix::zeros(n, n);
    let mut filled = vec![false; n];
    for j in 0..n {
        if singular_values[j] > top * 1e-13 && singular_values[j] > 0.0 {
            let col = g.column(j) / Complex64::new(singular_values[j], 0.0);
            u.set_column(j, &col);
            filled[j] = true;
        }
    }
    complete_basis(&mut u, &filled);
    Svd { u, singular_values, v_t: v.adjoint() }
}

/// Fill the unset columns of `u` with an orthonormal completion.
fn complete_basis(u: &mut CMatrix, filled: &[bool]) {
    let n = u.nrows();
    let mut candidate = 0;
    for j in 0..n {
        if filled[j] {
            continue;
        }
        loop {
            assert!(candidate < n, "basis completion ran out of candidates");
            let mut col = nalgebra::DVector::from_element(n, Complex64::new(0.0, 0.0));
            col[candidate] = Complex64::new(1.0, 0.0);
            candidate += 1;
            // two passes of Gram-Schmidt for stability
            for _ in 0..2 {
                // unset columns are still zero and drop out
                for k in 0..n {
                    if k != j {
                        let basis = u.column(k);
                        let proj: Complex64 = basis.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
                        col -= basis * proj;
                    }
                }
            }
            let norm = col.norm();
            if norm > 1e-6 {
                u.set_column(j, &(col / Complex64::new(norm, 0.0)));
                break;
            }
        }
    }
}
