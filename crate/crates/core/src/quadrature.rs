//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Used as the numerical oracle for densities and moments; deliberately
//! independent of the closed forms it checks.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 50;

/// Integrand values below this are treated as exactly zero.
const UNDERFLOW: f64 = 1e-300;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kron += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32, out: &mut Quadrature) {
    let (value, err) = kronrod(f, a, b);
    if err <= tol || depth >= MAX_DEPTH || (b - a).abs() < 1e-15 * a.abs().max(1.0) {
        out.value += value;
        out.error += err;
        return;
    }
    let mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, depth + 1, out);
    adapt(f, mid, b, 0.5 * tol, depth + 1, out);
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`, starting from
/// `panels` equal sub-intervals.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, panels: usize) -> Quadrature {
    let g = |x: f64| {
        let v = f(x);
        if v.abs() < UNDERFLOW {
            0.0
        } else {
            v
        }
    };
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut out = Quadrature { value: 0.0, error: 0.0 };
    for i in 0..panels {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == panels { b } else { lo + width };
        adapt(&g, lo, hi, tol / panels as f64, 0, &mut out);
    }
    out
}

/// Integrates `f` over `(0, ∞)`: `[0, 1]` directly and `[1, ∞)` through the
/// substitution `x = 1/u`.
pub fn integrate_positive<F: Fn(f64) -> f64>(f: F, tol: f64) -> Quadrature {
    let head = integrate(&f, 0.0, 1.0, 0.5 * tol, 64);
    let tail = integrate(
        |u: f64| {
            if u <= 0.0 {
                0.0
            } else {
                f(1.0 / u) / (u * u)
            }
        },
        0.0,
        1.0,
        0.5 * tol,
        64,
    );
    Quadrature {
        value: head.value + tail.value,
        error: head.error + tail.error,
    }
}
