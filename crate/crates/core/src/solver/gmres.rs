use crate::scalar::Real;

/// A square linear operator over flat vectors.
pub trait LinearMap<T> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T]) -> Vec<T>;
}

/// Dense row-major matrix as a linear map.
impl<T: Real> LinearMap<T> for Vec<Vec<T>> {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        self.iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| *a * *b).sum())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresSettings<T> {
    /// Stop once `‖b - Ax‖ ≤ tol ‖b‖`.
    pub tol: T,
    pub max_iters: usize,
    /// Restart length; `None` runs unrestarted.
    pub restart: Option<usize>,
}

impl<T: Real> Default for GmresSettings<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-8),
            max_iters: 500,
            restart: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GmresOutcome<T> {
    pub x: Vec<T>,
    /// Number of operator applications inside the Krylov iteration.
    pub iterations: usize,
    /// Relative residual estimate after each iteration, starting with the
    /// initial guess.
    pub residuals: Vec<T>,
    pub converged: bool,
}

impl<T: Real> GmresOutcome<T> {
    pub fn final_residual(&self) -> T {
        self.residuals.last().copied().unwrap_or_else(T::zero)
    }
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|x| *x * *x).sum::<T>().sqrt()
}

fn givens<T: Real>(a: T, b: T) -> (T, T) {
    if b == T::zero() {
        (T::one(), T::zero())
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// Generalized minimal residual iteration with modified Gram-Schmidt Arnoldi
/// and Givens rotations.
///
/// Never fails: when `max_iters` is exhausted the best iterate is returned
/// with `converged == false`. A happy breakdown counts as convergence.
pub fn gmres<T: Real, A: LinearMap<T> + ?Sized>(
    a: &A,
    b: &[T],
    x0: Option<&[T]>,
    settings: &GmresSettings<T>,
) -> GmresOutcome<T> {
    let n = a.dim();
    assert_eq!(b.len(), n, "right-hand side length");
    let mut x = match x0 {
        Some(x0) => {
            assert_eq!(x0.len(), n, "initial guess length");
            x0.to_vec()
        }
        None => vec![T::zero(); n],
    };
    let bnorm = norm(b);
    if bnorm == T::zero() {
        return GmresOutcome {
            x: vec![T::zero(); n],
            iterations: 0,
            residuals: vec![T::zero()],
            converged: true,
        };
    }
    let target = settings.tol * bnorm;
    let restart = settings.restart.unwrap_or(settings.max_iters).max(1);
    let mut iterations = 0;
    let mut residuals = Vec::new();

    loop {
        let ax = if x.iter().all(|v| *v == T::zero()) {
            vec![T::zero(); n]
        } else {
            a.apply(&x)
        };
        let r: Vec<T> = b.iter().zip(&ax).map(|(b, ax)| *b - *ax).collect();
        let beta = norm(&r);
        if residuals.is_empty() || iterations > 0 {
            residuals.push(beta / bnorm);
        }
        if beta <= target {
            return GmresOutcome {
                x,
                iterations,
                residuals,
                converged: true,
            };
        }
        if iterations >= settings.max_iters {
            return GmresOutcome {
                x,
                iterations,
                residuals,
                converged: false,
            };
        }

        let m = restart.min(settings.max_iters - iterations);
        let mut v: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|r| *r / beta).collect());
        let mut h: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut cs: Vec<(T, T)> = Vec::with_capacity(m);
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;
        let mut k_done = 0;
        let mut breakdown = false;
        for k in 0..m {
            let mut w = a.apply(&v[k]);
            iterations += 1;
            let mut hk = vec![T::zero(); k + 2];
            for (j, vj) in v.iter().enumerate() {
                let d: T = w.iter().zip(vj).map(|(a, b)| *a * *b).sum();
                hk[j] = d;
                for (wi, vi) in w.iter_mut().zip(vj) {
                    *wi -= d * *vi;
                }
            }
            let wn = norm(&w);
            hk[k + 1] = wn;
            for (j, &(c, s)) in cs.iter().enumerate() {
                let t = c * hk[j] + s * hk[j + 1];
                hk[j + 1] = -s * hk[j] + c * hk[j + 1];
                hk[j] = t;
            }
            let (c, s) = givens(hk[k], hk[k + 1]);
            hk[k] = c * hk[k] + s * hk[k + 1];
            hk[k + 1] = T::zero();
            g[k + 1] = -s * g[k];
            g[k] = c * g[k];
            cs.push((c, s));
            h.push(hk);
            k_done = k + 1;
            let res = g[k + 1].abs();
            // a vanishing new Krylov direction means the solution is exact
            breakdown = wn <= T::epsilon() * beta;
            if res <= target || breakdown {
                break;
            }
            residuals.push(res / bnorm);
            v.push(w.iter().map(|w| *w / wn).collect());
        }

        // back substitution on the triangular factor
        let mut y = vec![T::zero(); k_done];
        for i in (0..k_done).rev() {
            let mut s = g[i];
            for j in i + 1..k_done {
                s -= h[j][i] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&v[j]) {
                *xi += *yj * *vi;
            }
        }
        if breakdown {
            let ax = a.apply(&x);
            let r = norm(&b.iter().zip(&ax).map(|(b, ax)| *b - *ax).collect::<Vec<_>>());
            residuals.push(r / bnorm);
            return GmresOutcome {
                x,
                iterations,
                residuals,
                converged: true,
            };
        }
    }
}
