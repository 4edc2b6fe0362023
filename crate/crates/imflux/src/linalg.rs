//! Adjugate and determinant of small dense matrices: the regressor mixing step.
//!
//! The mixing step multiplies a stacked regression y = A * theta by adj(A) to
//! decouple it into scalar equations zeta_k = det(A) * theta_k. The adjugate
//! and determinant come from one Faddeev-LeVerrier pass, which stays defined
//! for singular A (det = 0 is a legitimate, expected value under poor
//! excitation and must not error).
//!
//! Rows are pre-scaled to unit max-norm before the recursion and the result is
//! rescaled analytically; this keeps intermediate traces O(1) even though the
//! raw regressor mixes units spanning several orders of magnitude. The
//! rescaling is exact algebra (det(SB) = det(S)det(B), adj(SB) = adj(B)adj(S)
//! with S diagonal), not an approximation.

// Index loops here mirror the subscript algebra of minors and cofactors;
// iterator forms hide which entry is being addressed.
#![allow(clippy::needless_range_loop)]

/// Row-major n x n matrix as nested arrays.
pub type Mat<const N: usize> = [[f64; N]; N];

fn matmul<const N: usize>(a: &Mat<N>, b: &Mat<N>, out: &mut Mat<N>) {
    for r in 0..N {
        for c in 0..N {
            let mut acc = 0.0;
            for k in 0..N {
                acc += a[r][k] * b[k][c];
            }
            out[r][c] = acc;
        }
    }
}

/// Adjugate and determinant in one pass.
///
/// Works for any A including singular and zero matrices. Non-finite inputs
/// propagate NaN into the outputs; callers in the simulation path detect this
/// through the integration fault check.
pub fn adjugate_det<const N: usize>(a: &Mat<N>) -> (Mat<N>, f64) {
    // Scale each row to unit max-norm: A = S * B, S = diag(s).
    let mut s = [1.0f64; N];
    let mut b = *a;
    for r in 0..N {
        let m = a[r].iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        if m > 0.0 {
            s[r] = m;
            for c in 0..N {
                b[r][c] /= m;
            }
        }
    }

    // Faddeev-LeVerrier on B: M_1 = I; c_k = -tr(B M_k)/k; M_{k+1} = B M_k + c_k I.
    let mut mk = [[0.0; N]; N];
    for i in 0..N {
        mk[i][i] = 1.0;
    }
    let mut bm = [[0.0; N]; N];
    let mut ck = 0.0;
    for k in 1..=N {
        matmul(&b, &mk, &mut bm);
        let tr: f64 = (0..N).map(|i| bm[i][i]).sum();
        ck = -tr / k as f64;
        if k < N {
            mk = bm;
            for i in 0..N {
                mk[i][i] += ck;
            }
        }
    }
    // det(B) = (-1)^N c_N, adj(B) = (-1)^(N-1) M_N.
    let sign = if N.is_multiple_of(2) { 1.0 } else { -1.0 };
    let det_b = sign * ck;
    let adj_sign = -sign;

    // Undo the scaling: det(A) = prod(s) * det(B); adj(A) = adj(B) * adj(S),
    // i.e. column j of adj(B) scaled by prod_{k != j} s_k.
    let mut det_scale = 1.0;
    for &sr in &s {
        det_scale *= sr;
    }
    let mut col_scale = [0.0f64; N];
    for (j, cs) in col_scale.iter_mut().enumerate() {
        let mut p = 1.0;
        for (k, &sk) in s.iter().enumerate() {
            if k != j {
                p *= sk;
            }
        }
        *cs = p;
    }
    let mut adj = mk;
    for row in adj.iter_mut() {
        for (j, e) in row.iter_mut().enumerate() {
            *e *= adj_sign * col_scale[j];
        }
    }
    (adj, det_b * det_scale)
}

/// DREM mixing: zeta = adj(A) * y, delta = det(A).
///
/// If y = A * theta exactly then zeta = delta * theta componentwise.
pub fn mix<const N: usize>(a: &Mat<N>, y: &[f64; N]) -> ([f64; N], f64) {
    let (adj, det) = adjugate_det(a);
    let mut zeta = [0.0f64; N];
    for r in 0..N {
        let mut acc = 0.0;
        for c in 0..N {
            acc += adj[r][c] * y[c];
        }
        zeta[r] = acc;
    }
    (zeta, det)
}

/// Relative residual of the identity adj(A)*A = det(A)*I. Every term of the
/// cofactor expansion behind either side is a product of one entry per row,
/// so the residual is judged against the product of row max-norms; a smaller
/// denominator (e.g. the computed adjugate's own magnitude) would punish the
/// cancellation that makes a singular matrix singular. Zero matrices report 0.
pub fn adjugate_identity_rel_error<const N: usize>(a: &Mat<N>) -> f64 {
    let (adj, det) = adjugate_det(a);
    let mut prod = [[0.0; N]; N];
    matmul(&adj, a, &mut prod);
    let scale: f64 = a
        .iter()
        .map(|row| row.iter().fold(0.0f64, |m, &x| m.max(x.abs())))
        .product::<f64>()
        + f64::MIN_POSITIVE;
    let mut err = 0.0f64;
    for r in 0..N {
        for c in 0..N {
            let target = if r == c { det } else { 0.0 };
            err = err.max((prod[r][c] - target).abs());
        }
    }
    err / scale
}
