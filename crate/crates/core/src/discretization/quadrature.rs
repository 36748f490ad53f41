use crate::scalar::Real;

/// Legendre polynomial `P_n(t)` and its derivative by the three-term recurrence.
pub fn legendre_with_derivative<T: Real>(n: usize, t: T) -> (T, T) {
    if n == 0 {
        return (T::one(), T::zero());
    }
    let mut p0 = T::one();
    let mut p1 = t;
    for k in 2..=n {
        let k_t = T::from_usize_lossy(k);
        let p2 = ((k_t + k_t - T::one()) * t * p1 - (k_t - T::one()) * p0) / k_t;
        p0 = p1;
        p1 = p2;
    }
    let n_t = T::from_usize_lossy(n);
    let denom = t * t - T::one();
    let dp = if denom.abs() > T::epsilon() {
        n_t * (t * p1 - p0) / denom
    } else {
        // P_n'(±1) = (±1)^{n-1} n(n+1)/2
        let v = n_t * (n_t + T::one()) * T::half();
        if t > T::zero() || n % 2 == 1 {
            v
        } else {
            -v
        }
    };
    (p1, dp)
}

/// All Legendre values `P_0(t) .. P_{n-1}(t)`.
pub fn legendre_values<T: Real>(n: usize, t: T) -> Vec<T> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(T::one());
    if n == 1 {
        return out;
    }
    out.push(t);
    for k in 2..n {
        let k_t = T::from_usize_lossy(k);
        let v = ((k_t + k_t - T::one()) * t * out[k - 1] - (k_t - T::one()) * out[k - 2]) / k_t;
        out.push(v);
    }
    out
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let n_f = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton in f64 for a clean start
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (n_f + 0.5);
        let mut x = theta.cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative::<f64>(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let mut t = T::lit(x);
        for _ in 0..3 {
            let (p, dp) = legendre_with_derivative(n, t);
            if dp == T::zero() {
                break;
            }
            t -= p / dp;
        }
        let (_, dp) = legendre_with_derivative(n, t);
        let w = T::lit(2.0) / ((T::one() - t * t) * dp * dp);
        nodes[n - 1 - i] = t;
        nodes[i] = -t;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped affinely to `[a, b]`.
pub fn gauss_legendre_on<T: Real>(n: usize, a: T, b: T) -> (Vec<T>, Vec<T>) {
    let (t, w) = gauss_legendre::<T>(n);
    let half = (b - a) * T::half();
    let mid = (a + b) * T::half();
    (
        t.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&w| w * half).collect(),
    )
}

/// Nodes `(m + s) / M` of the shifted uniform grid.
pub fn uniform_nodes<T: Real>(m: usize, shift: T) -> Vec<T> {
    let mm = T::from_usize_lossy(m);
    (0..m)
        .map(|i| (T::from_usize_lossy(i) + shift) / mm)
        .collect()
}
