//! Fourier coefficients of the bias-channel position operator between the
//! two branches of the resonant doublet.
//!
//! These are the matrix elements that couple the doublet to the bath: the
//! operator is diagonal in spin (`±1/2`), and its time dependence in the
//! dressed picture unfolds into one real coefficient per drive harmonic `n`
//! and branch pair.  Two routes are provided: a numeric contraction over
//! ladder eigenvectors, and closed-form expressions through second order in
//! the tunneling that mirror the analytic doublet construction.
//!
//! Both states entering a contraction must be expressed in the zero-copy
//! convention (the plus partner shifted down by `m` photon slots), and both
//! routes share one sign convention so the coefficients can be compared
//! directly, not only in magnitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{CompositeState, Spin};
use crate::params::SystemParams;
use crate::vanvleck::{AnalyticOrder, ResonanceContext};

/// Doublet branch label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Minus,
    Plus,
}

/// Table of position coefficients X^n_{ab} over harmonics `-n_max..=n_max`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PositionTable {
    pub n_max: i32,
    mm: Vec<f64>,
    mp: Vec<f64>,
    pm: Vec<f64>,
    pp: Vec<f64>,
    /// Doublet amplitude weight within `n_max` slots of the ladder edge; an
    /// upper bound on what the shifted contraction can silently drop.  Zero
    /// for the closed-form route.
    pub edge_loss: f64,
}

impl PositionTable {
    fn empty(n_max: i32) -> Self {
        let len = (2 * n_max + 1) as usize;
        Self {
            n_max,
            mm: vec![0.0; len],
            mp: vec![0.0; len],
            pm: vec![0.0; len],
            pp: vec![0.0; len],
            edge_loss: 0.0,
        }
    }

    #[inline]
    fn idx(&self, n: i32) -> Option<usize> {
        if n < -self.n_max || n > self.n_max {
            None
        } else {
            Some((n + self.n_max) as usize)
        }
    }

    /// Coefficient X^n_{ab}; zero outside the tabulated harmonic window.
    pub fn get(&self, a: Branch, b: Branch, n: i32) -> f64 {
        let Some(i) = self.idx(n) else { return 0.0 };
        match (a, b) {
            (Branch::Minus, Branch::Minus) => self.mm[i],
            (Branch::Minus, Branch::Plus) => self.mp[i],
            (Branch::Plus, Branch::Minus) => self.pm[i],
            (Branch::Plus, Branch::Plus) => self.pp[i],
        }
    }

    fn set(&mut self, a: Branch, b: Branch, n: i32, value: f64) {
        let i = self.idx(n).expect("harmonic inside table");
        match (a, b) {
            (Branch::Minus, Branch::Minus) => self.mm[i] = value,
            (Branch::Minus, Branch::Plus) => self.mp[i] = value,
            (Branch::Plus, Branch::Minus) => self.pm[i] = value,
            (Branch::Plus, Branch::Plus) => self.pp[i] = value,
        }
    }

    pub fn harmonics(&self) -> impl Iterator<Item = i32> {
        -self.n_max..=self.n_max
    }
}

/// Contract two zero-copy doublet states into a position table.
///
/// `X^n_{ab} = Σ_{s,j} a(s, j) · s_z/2 · b(s, j - n)` with `s_z = ±1`;
/// terms whose shifted index falls off the ladder are dropped, and the
/// table's `edge_loss` field reports how much state weight lived close
/// enough to the edge for that to matter.
pub fn numeric_position_table(
    minus: &CompositeState,
    plus_zero: &CompositeState,
    n_max: i32,
) -> Result<PositionTable> {
    if minus.half_width() != plus_zero.half_width() {
        return Err(Error::InvalidParameter(format!(
            "doublet states live on different ladders ({} vs {})",
            minus.half_width(),
            plus_zero.half_width()
        )));
    }
    let n = minus.half_width() as i32;
    if n_max < 0 || n_max > 2 * n {
        return Err(Error::InvalidParameter(format!(
            "harmonic window {n_max} incompatible with ladder half-width {n}"
        )));
    }

    let mut table = PositionTable::empty(n_max);
    let states = |b: Branch| match b {
        Branch::Minus => minus,
        Branch::Plus => plus_zero,
    };
    for a in [Branch::Minus, Branch::Plus] {
        for b in [Branch::Minus, Branch::Plus] {
            let sa = states(a);
            let sb = states(b);
            for h in -n_max..=n_max {
                let mut acc = 0.0;
                for (spin, sz) in [(Spin::Up, 0.5), (Spin::Down, -0.5)] {
                    for j in -n..=n {
                        let jb = j - h;
                        if jb < -n || jb > n {
                            continue;
                        }
                        acc += sa.amp(spin, j) * sz * sb.amp(spin, jb);
                    }
                }
                table.set(a, b, h, acc);
            }
        }
    }

    let edge_weight = |st: &CompositeState| -> f64 {
        let mut w = 0.0;
        for j in -n..=n {
            if n - j.abs() < n_max {
                for spin in [Spin::Up, Spin::Down] {
                    let a = st.amp(spin, j);
                    w += a * a;
                }
            }
        }
        w
    };
    table.edge_loss = edge_weight(minus).max(edge_weight(plus_zero));
    Ok(table)
}

/// Closed-form position coefficients at the requested order.
///
/// The second-order variant adds the sideband double sums and evaluates the
/// mixing angle with the shifted detuning; the leading variant keeps the
/// bare resonant block.  Both fix the overall sign so the off-diagonal
/// coefficients match the numeric contraction of the gauge-fixed doublet,
/// not just its magnitudes.
pub fn analytic_position_table(
    ctx: &ResonanceContext,
    order: AnalyticOrder,
    n_max: i32,
) -> Result<PositionTable> {
    let p: &SystemParams = &ctx.params;
    let m = ctx.m;
    let l = ctx.l_max as i32;
    let angles = ctx.angles(order)?;
    let theta = angles.theta;
    let s = angles.sign_dm;
    let sin_t = theta.sin();
    let cos_t = theta.cos();
    let sh2 = (0.5 * theta).sin().powi(2);
    let ch2 = (0.5 * theta).cos().powi(2);

    let guard = |den: f64, index: i32| -> Result<f64> {
        if den.abs() < ctx.denominator_guard {
            Err(Error::NearSingularDenominator {
                index,
                value: den,
                guard: ctx.denominator_guard,
            })
        } else {
            Ok(den)
        }
    };

    let mut table = PositionTable::empty(n_max);
    for n in -n_max..=n_max {
        // Off-diagonal coefficient (minus -> plus channel).
        let mut x_mp = if n == m {
            0.5 * sin_t
        } else {
            let d1 = guard(-p.epsilon + n as f64 * p.omega, n)?;
            let d2 = guard(p.epsilon + (n - 2 * m) as f64 * p.omega, n - 2 * m)?;
            -(s / 2.0) * (sh2 * ctx.dressed(-n)? / d1 + ch2 * ctx.dressed(n - 2 * m)? / d2)
        };
        if order == AnalyticOrder::VanVleck2 {
            let mut acc = 0.0;
            for k in -l..=l {
                if k == n || k == m {
                    continue;
                }
                let d1 = guard(p.epsilon + (n - k - m) as f64 * p.omega, n - k - m)?;
                let d2 = guard(-p.epsilon + k as f64 * p.omega, k)?;
                acc += ctx.dressed(n - k - m)? * ctx.dressed(-k)? / (d1 * d2);
            }
            x_mp += sin_t / 8.0 * acc;
        }
        // The gauge fixed on the numeric doublet puts the off-diagonal
        // channel on the opposite sign of the bare resonant-block formula;
        // flip here so both routes agree signed, not just in magnitude.
        table.set(Branch::Minus, Branch::Plus, n, -x_mp);

        // Diagonal coefficient (minus branch); plus branch is its negative.
        let mut x_mm = if n == 0 {
            -0.5 * cos_t
        } else {
            let d1 = guard(-p.epsilon + (m + n) as f64 * p.omega, m + n)?;
            let d2 = guard(p.epsilon + (n - m) as f64 * p.omega, n - m)?;
            (s / 4.0) * sin_t * (ctx.dressed(-m - n)? / d1 - ctx.dressed(n - m)? / d2)
        };
        if order == AnalyticOrder::VanVleck2 {
            let mut acc = 0.0;
            for k in -l..=l {
                if k == n + m || k == m {
                    continue;
                }
                let d1 = guard(p.epsilon + (n - k) as f64 * p.omega, n - k)?;
                let d2 = guard(-p.epsilon + k as f64 * p.omega, k)?;
                acc += ctx.dressed(n - k)? * ctx.dressed(-k)? / (d1 * d2);
            }
            x_mm += -cos_t / 8.0 * acc;
        }
        table.set(Branch::Minus, Branch::Minus, n, x_mm);
        table.set(Branch::Plus, Branch::Plus, n, -x_mm);
    }
    // Remaining channel by the conjugation property X^n_{+-} = X^{-n}_{-+}.
    for n in -n_max..=n_max {
        let v = table.get(Branch::Minus, Branch::Plus, -n);
        table.set(Branch::Plus, Branch::Minus, n, v);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{build_floquet_matrix, central_doublet, diagonalize_floquet};
    use crate::params::TruncationConfig;
    use approx::assert_relative_eq;

    fn numeric_table(eps: f64, omega: f64, amp: f64, m: i32, n_max: i32) -> PositionTable {
        let p = SystemParams::new(1.0, eps, amp, omega).unwrap();
        let tr = TruncationConfig::for_params(&p);
        let spec = diagonalize_floquet(&build_floquet_matrix(&p, &tr).unwrap()).unwrap();
        let d = central_doublet(&spec, &p, m).unwrap();
        numeric_position_table(&d.state_minus, &d.state_plus_zero_copy(), n_max).unwrap()
    }

    #[test]
    fn numeric_table_obeys_conjugation_and_branch_swap() {
        let t = numeric_table(4.1, 2.0, 3.0, 2, 6);
        for n in -6..=6 {
            assert_relative_eq!(
                t.get(Branch::Plus, Branch::Minus, n),
                t.get(Branch::Minus, Branch::Plus, -n),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn analytic_and_numeric_routes_agree_with_signs() {
        let p = SystemParams::new(1.0, 4.1, 3.0, 2.0).unwrap();
        let ctx = ResonanceContext::new(p, 2);
        let ana = analytic_position_table(&ctx, AnalyticOrder::VanVleck2, 4).unwrap();
        let num = numeric_table(4.1, 2.0, 3.0, 2, 4);
        for n in [-2, 0, 2, 4] {
            for (a, b) in [
                (Branch::Minus, Branch::Plus),
                (Branch::Minus, Branch::Minus),
                (Branch::Plus, Branch::Plus),
            ] {
                let xa = ana.get(a, b, n);
                let xn = num.get(a, b, n);
                assert!(
                    (xa - xn).abs() < 0.02,
                    "X[{a:?},{b:?},{n}]: analytic {xa} vs numeric {xn}"
                );
            }
        }
    }

    #[test]
    fn leading_order_resonant_harmonic_is_half_sine() {
        // At leading order no sideband sums contribute, so the resonant
        // harmonic and the static harmonic carry the bare mixing angle.
        let p = SystemParams::new(1.0, 4.1, 3.0, 2.0).unwrap();
        let ctx = ResonanceContext::new(p, 2);
        let t = analytic_position_table(&ctx, AnalyticOrder::Rwa, 4).unwrap();
        let theta = ctx.angles(AnalyticOrder::Rwa).unwrap().theta;
        assert_relative_eq!(
            t.get(Branch::Minus, Branch::Plus, 2),
            -0.5 * theta.sin(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            t.get(Branch::Minus, Branch::Minus, 0),
            -0.5 * theta.cos(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn diagonal_branches_are_opposite() {
        let p = SystemParams::new(1.0, 4.1, 3.0, 2.0).unwrap();
        let ctx = ResonanceContext::new(p, 2);
        let t = analytic_position_table(&ctx, AnalyticOrder::VanVleck2, 6).unwrap();
        for n in -6..=6 {
            assert_eq!(
                t.get(Branch::Plus, Branch::Plus, n),
                -t.get(Branch::Minus, Branch::Minus, n)
            );
        }
    }

    #[test]
    fn undriven_limit_matches_static_two_level_mixing() {
        // A -> 0 keeps only the l = 0 dressed element; for m = 0 the n = 0
        // coefficients reduce to the static eigenbasis matrix elements of
        // s_z/2 in the numeric gauge: off-diagonal -sinΘ/2, diagonal
        // -cosΘ/2 with tanΘ = Δ/(-ε) lifted into (0, π].
        let p = SystemParams::new(1.0, 0.5, 1e-12, 2.0).unwrap();
        let ctx = ResonanceContext::new(p, 0);
        let t = analytic_position_table(&ctx, AnalyticOrder::Rwa, 2).unwrap();
        let theta = 1.0_f64.atan2(-0.5);
        assert_relative_eq!(
            t.get(Branch::Minus, Branch::Plus, 0),
            -0.5 * theta.sin(),
            max_relative = 1e-9
        );
        assert_relative_eq!(
            t.get(Branch::Minus, Branch::Minus, 0),
            -0.5 * theta.cos(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn edge_loss_is_reported_small_for_generous_ladders() {
        let t = numeric_table(4.1, 2.0, 3.0, 2, 4);
        assert!(t.edge_loss < 1e-12, "edge loss {}", t.edge_loss);
    }
}
