//! Adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use num_complex::Complex64;

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
/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;

fn kronrod_rule(f: &impl Fn(f64) -> Complex64, lo: f64, hi: f64) -> (Complex64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kronrod = f(center) * WGK[7];
    let mut gauss = f(center) * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

fn adapt(
    f: &impl Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let (value, error) = kronrod_rule(f, lo, hi);
    if error <= tol || depth >= MAX_DEPTH {
        return value;
    }
    let mid = 0.5 * (lo + hi);
    adapt(f, lo, mid, 0.5 * tol, depth + 1) + adapt(f, mid, hi, 0.5 * tol, depth + 1)
}

/// `∫_lo^hi f`, refined until the Gauss/Kronrod gap on every piece is below
/// its share of `abs_tol`.
pub fn integrate(f: impl Fn(f64) -> Complex64, lo: f64, hi: f64, abs_tol: f64) -> Complex64 {
    if hi == lo {
        return Complex64::new(0.0, 0.0);
    }
    adapt(&f, lo, hi, abs_tol, 0)
}
