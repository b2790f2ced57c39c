//! One-dimensional maximization and adaptive Simpson integration.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizer of a unimodal `f` on `[a, b]` by golden-section search.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

struct Panel {
    a: f64,
    b: f64,
    /// Integrand at `a`, `a + h/4`, `a + h/2`, `a + 3h/4`, `b`.
    f: [f64; 5],
    value: f64,
    error: f64,
}

impl Panel {
    fn new<F: FnMut(f64) -> f64>(a: f64, b: f64, fa: f64, fm: f64, fb: f64, eval: &mut F) -> Self {
        let m = 0.5 * (a + b);
        let (fl, fr) = (eval(0.5 * (a + m)), eval(0.5 * (m + b)));
        let whole = simpson(a, b, fa, fm, fb);
        let halves = simpson(a, m, fa, fl, fm) + simpson(m, b, fm, fr, fb);
        let diff = halves - whole;
        Panel {
            a,
            b,
            f: [fa, fl, fm, fr, fb],
            value: halves + diff / 15.0,
            error: diff.abs() / 15.0,
        }
    }

    fn splittable(&self) -> bool {
        let m = 0.5 * (self.a + self.b);
        let q = 0.5 * (self.a + m);
        self.a < q && q < m && m < self.b
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Globally adaptive Simpson over consecutive `breakpoints`: the panel with
/// the largest error estimate is bisected until the summed estimate is below
/// `rel_tol` times the integral. Fails once `max_evals` integrand evaluations
/// have been spent.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    rel_tol: f64,
    max_evals: usize,
) -> Result<f64> {
    let evaluations = Cell::new(0usize);
    let mut eval = |x: f64| {
        evaluations.set(evaluations.get() + 1);
        f(x)
    };
    let mut heap = BinaryHeap::new();
    let mut done = Vec::new();
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b > a {
            let (fa, fm, fb) = (eval(a), eval(0.5 * (a + b)), eval(b));
            heap.push(Panel::new(a, b, fa, fm, fb, &mut eval));
        }
    }
    let totals = |heap: &BinaryHeap<Panel>, done: &[Panel]| {
        heap.iter()
            .chain(done)
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    };
    let (mut value, mut error) = totals(&heap, &done);
    loop {
        if error <= rel_tol * value.abs() {
            (value, error) = totals(&heap, &done);
            if error <= rel_tol * value.abs() {
                return Ok(value);
            }
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::Quadrature {
                evaluations: evaluations.get(),
                lo: breakpoints[0],
                hi: breakpoints[breakpoints.len() - 1],
                error,
            });
        };
        if !worst.splittable() {
            done.push(worst);
            continue;
        }
        if evaluations.get() >= max_evals {
            return Err(Error::Quadrature {
                evaluations: evaluations.get(),
                lo: worst.a,
                hi: worst.b,
                error,
            });
        }
        let m = 0.5 * (worst.a + worst.b);
        let [fa, fl, fm, fr, fb] = worst.f;
        let left = Panel::new(worst.a, m, fa, fl, fm, &mut eval);
        let right = Panel::new(m, worst.b, fm, fr, fb, &mut eval);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}
