//! Derivative-free optimizers: golden-section search on an interval and a
//! Nelder–Mead simplex for small unconstrained problems.

use crate::scalar::Real;

/// Maximizes a unimodal `f` on `[lo, hi]` to bracket width `tol`.
/// Returns `(argmax, max)`.
pub fn golden_section_max<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / T::lit(2.0);
    (x, f(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions<T> {
    pub max_iterations: usize,
    /// Stop when the spread of simplex values falls below this.
    pub f_tolerance: T,
    /// ... and the simplex diameter below this.
    pub x_tolerance: T,
}

impl<T: Real> Default for NelderMeadOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 5_000,
            f_tolerance: T::lit(1e-13),
            x_tolerance: T::lit(1e-9),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from a simplex `x0 + steps[i]·e_i`.
pub fn nelder_mead<T: Real, F: FnMut(&[T]) -> T>(
    mut f: F,
    x0: &[T],
    steps: &[T],
    options: &NelderMeadOptions<T>,
) -> Minimum<T> {
    let n = x0.len();
    assert_eq!(steps.len(), n, "one step per coordinate");
    let (alpha, gamma, rho, sigma) = (T::one(), T::lit(2.0), T::lit(0.5), T::lit(0.5));

    let mut simplex: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut values: Vec<T> = simplex.iter().map(|v| f(v)).collect();
    let mut evaluations = n + 1;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = (values[n] - values[0]).abs();
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (*a - *b).abs()))
            .fold(T::zero(), T::max);
        if spread <= options.f_tolerance && diameter <= options.x_tolerance {
            converged = true;
            break;
        }

        let inv_n = T::one() / T::from_int(n as i64);
        let centroid: Vec<T> = (0..n)
            .map(|k| simplex[..n].iter().fold(T::zero(), |acc, v| acc + v[k]) * inv_n)
            .collect();
        let toward = |scale: T, from: &[T]| -> Vec<T> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, w)| *c + scale * (*w - *c))
                .collect()
        };

        let reflected = toward(-alpha, &simplex[n]);
        let f_r = f(&reflected);
        evaluations += 1;
        if f_r < values[0] {
            let expanded = toward(-gamma, &simplex[n]);
            let f_e = f(&expanded);
            evaluations += 1;
            if f_e < f_r {
                simplex[n] = expanded;
                values[n] = f_e;
            } else {
                simplex[n] = reflected;
                values[n] = f_r;
            }
        } else if f_r < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_r;
        } else {
            let (candidate, f_c) = if f_r < values[n] {
                let outside = toward(-rho, &simplex[n]);
                let v = f(&outside);
                (outside, v)
            } else {
                let inside = toward(rho, &simplex[n]);
                let v = f(&inside);
                (inside, v)
            };
            evaluations += 1;
            if f_c < values[n].min(f_r) {
                simplex[n] = candidate;
                values[n] = f_c;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    simplex[i] = best
                        .iter()
                        .zip(&simplex[i])
                        .map(|(b, v)| *b + sigma * (*v - *b))
                        .collect();
                    values[i] = f(&simplex[i]);
                }
                evaluations += n;
            }
        }
    }

    let best = (0..=n)
        .min_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_on_parabola() {
        // Near a smooth maximum the argmax is resolvable only to ~sqrt(eps).
        let (x, fx) = golden_section_max(|x: f64| -(x - 0.3).powi(2) + 2.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_iterations: 20_000,
            f_tolerance: 1e-16,
            x_tolerance: 1e-10,
        };
        let m = nelder_mead(rosen, &[-1.2, 1.0], &[0.5, 0.5], &opts);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn nelder_mead_quadratic_bowl_f32() {
        let bowl = |x: &[f32]| x.iter().enumerate().map(|(i, v)| (v - i as f32).powi(2)).sum::<f32>();
        let opts = NelderMeadOptions {
            max_iterations: 5_000,
            f_tolerance: 1e-10,
            x_tolerance: 1e-4,
        };
        let m = nelder_mead(bowl, &[3.0, 3.0, 3.0], &[1.0, 1.0, 1.0], &opts);
        for (i, v) in m.x.iter().enumerate() {
            assert!((v - i as f32).abs() < 1e-3);
        }
    }
}
