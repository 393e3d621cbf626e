//! Dressed-ladder (Floquet) representation of the driven two-level system.
//!
//! The time-periodic Hamiltonian is mapped onto a static block ladder over
//! photon indices `n in -n_tr..=n_tr`.  Basis ordering interleaves spin and
//! photon number: index `2*(n + n_tr)` is the spin-up slot of copy `n`,
//! `2*(n + n_tr) + 1` the spin-down slot.  Diagonal entries carry
//! `∓ε/2 - nω`, off-diagonal blocks couple opposite spins through the
//! drive-dressed tunneling elements Δ_k.
//!
//! The quasienergy spectrum repeats with period ω; all physics of an
//! `m`-photon resonance sits in one doublet per zone.  [`central_doublet`]
//! picks the pair anchored on the unperturbed crossing states (up, 0) and
//! (down, m) and fixes a deterministic sign gauge so matrix elements built
//! from the eigenvectors are reproducible across parameter sweeps.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j, dressed_delta};
use crate::error::{Error, Result};
use crate::params::{SystemParams, TruncationConfig};

/// Spin component of a dressed basis slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

/// Real amplitude vector over the dressed (spin, photon) basis.
///
/// Wraps the interleaved layout used by [`build_floquet_matrix`] and keeps
/// the half-width around so out-of-range photon indices read as zero instead
/// of panicking.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeState {
    n_tr: usize,
    amps: Vec<f64>,
}

impl CompositeState {
    pub fn zeros(n_tr: usize) -> Self {
        Self {
            n_tr,
            amps: vec![0.0; 2 * (2 * n_tr + 1)],
        }
    }

    pub fn from_amplitudes(n_tr: usize, amps: Vec<f64>) -> Result<Self> {
        if amps.len() != 2 * (2 * n_tr + 1) {
            return Err(Error::InvalidParameter(format!(
                "amplitude vector has length {}, ladder with half-width {} needs {}",
                amps.len(),
                n_tr,
                2 * (2 * n_tr + 1)
            )));
        }
        Ok(Self { n_tr, amps })
    }

    pub fn half_width(&self) -> usize {
        self.n_tr
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.amps
    }

    #[inline]
    fn slot(&self, spin: Spin, photon: i32) -> Option<usize> {
        let n = self.n_tr as i32;
        if photon < -n || photon > n {
            return None;
        }
        let base = 2 * (photon + n) as usize;
        Some(match spin {
            Spin::Up => base,
            Spin::Down => base + 1,
        })
    }

    /// Amplitude on `(spin, photon)`; zero outside the ladder.
    pub fn amp(&self, spin: Spin, photon: i32) -> f64 {
        self.slot(spin, photon).map_or(0.0, |i| self.amps[i])
    }

    pub fn set_amp(&mut self, spin: Spin, photon: i32, value: f64) {
        if let Some(i) = self.slot(spin, photon) {
            self.amps[i] = value;
        }
    }

    pub fn add_amp(&mut self, spin: Spin, photon: i32, value: f64) {
        if let Some(i) = self.slot(spin, photon) {
            self.amps[i] += value;
        }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &CompositeState) -> f64 {
        debug_assert_eq!(self.n_tr, other.n_tr);
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.scale(1.0 / n);
        }
        self
    }

    /// Shift the photon index: `out(spin, j) = self(spin, j + k)`.
    ///
    /// Used to move a resonance partner from its natural zone copy into the
    /// zero copy; amplitude shifted past the ladder edge is dropped.
    pub fn photon_shifted(&self, k: i32) -> CompositeState {
        let mut out = CompositeState::zeros(self.n_tr);
        let n = self.n_tr as i32;
        for j in -n..=n {
            for spin in [Spin::Up, Spin::Down] {
                out.set_amp(spin, j, self.amp(spin, j + k));
            }
        }
        out
    }

    /// Spin-down amplitudes ordered by photon index `-n_tr..=n_tr`.
    pub fn down_amplitudes(&self) -> Vec<f64> {
        let n = self.n_tr as i32;
        (-n..=n).map(|j| self.amp(Spin::Down, j)).collect()
    }

    fn from_column(col: &[f64], n_tr: usize) -> Self {
        Self {
            n_tr,
            amps: col.to_vec(),
        }
    }
}

/// Static ladder Hamiltonian plus the metadata needed to interpret it.
#[derive(Clone, Debug)]
pub struct FloquetMatrix {
    pub matrix: DMatrix<f64>,
    pub n_tr: usize,
    pub params: SystemParams,
}

/// Assemble the dressed-ladder matrix for the given truncation half-width.
///
/// Off-diagonal elements beyond an order where the dressed tunneling
/// amplitudes have decayed far below machine noise are set to zero outright;
/// this caps the Bessel order independently of the ladder size, so widening
/// the ladder for convergence checks never pushes into order overflow.
pub fn build_floquet_matrix(p: &SystemParams, tr: &TruncationConfig) -> Result<FloquetMatrix> {
    tr.validate()?;
    let n = tr.n_tr as i32;
    let z = p.drive_ratio();
    // |J_k(z)| < (z/2)^k / k! drops below 1e-50 once k >= max(4z, 120).
    let order_cutoff = (4.0 * z).ceil().max(120.0);
    if order_cutoff > 500.0 {
        return Err(Error::InvalidParameter(format!(
            "drive ratio A/omega = {z:.3} too large for the dressed-ladder expansion"
        )));
    }
    let order_cutoff = order_cutoff as i32;

    let dim = 2 * (2 * tr.n_tr + 1);
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for nn in -n..=n {
        let iu = 2 * (nn + n) as usize;
        h[(iu, iu)] = -p.epsilon / 2.0 - nn as f64 * p.omega;
        h[(iu + 1, iu + 1)] = p.epsilon / 2.0 - nn as f64 * p.omega;
    }
    for nn in -n..=n {
        for l in -n..=n {
            let k = nn - l;
            if k.abs() > order_cutoff {
                continue;
            }
            let d = dressed_delta(k, p)?;
            // Assign both triangles explicitly so the matrix is symmetric to
            // the last bit, not merely up to rounding.
            h[(2 * (nn + n) as usize, 2 * (l + n) as usize + 1)] = -d / 2.0;
            h[(2 * (l + n) as usize + 1, 2 * (nn + n) as usize)] = -d / 2.0;
        }
    }
    Ok(FloquetMatrix {
        matrix: h,
        n_tr: tr.n_tr,
        params: *p,
    })
}

/// Reduce a quasienergy to the fundamental zone `[-omega/2, omega/2)`.
pub fn fold_quasienergy(e: f64, omega: f64) -> f64 {
    e - omega * (e / omega + 0.5).floor()
}

/// Full eigensystem of one ladder matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct FloquetSpectrum {
    pub energies: Vec<f64>,
    pub folded: Vec<f64>,
    vectors: DMatrix<f64>,
    pub n_tr: usize,
    pub params: SystemParams,
}

impl FloquetSpectrum {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Eigenvector `k` as a composite state (column copy).
    pub fn state(&self, k: usize) -> CompositeState {
        CompositeState::from_column(self.vectors.column(k).as_slice(), self.n_tr)
    }

    pub fn vector_component(&self, row: usize, k: usize) -> f64 {
        self.vectors[(row, k)]
    }
}

/// Diagonalize a ladder matrix; eigenpairs come back sorted ascending.
pub fn diagonalize_floquet(fm: &FloquetMatrix) -> Result<FloquetSpectrum> {
    let dim = fm.matrix.nrows();
    let max_iter = 40 * dim + 4000;
    let eig = nalgebra::SymmetricEigen::try_new(fm.matrix.clone(), f64::EPSILON, max_iter)
        .ok_or(Error::EigenConvergence { dim, max_iter })?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut energies = Vec::with_capacity(dim);
    let mut vectors = DMatrix::<f64>::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        energies.push(eig.eigenvalues[src]);
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    let folded = energies
        .iter()
        .map(|&e| fold_quasienergy(e, fm.params.omega))
        .collect();
    Ok(FloquetSpectrum {
        energies,
        folded,
        vectors,
        n_tr: fm.n_tr,
        params: fm.params,
    })
}

/// Resonant doublet of an `m`-photon crossing, in a fixed sign gauge.
///
/// `e_minus <= e_plus` are the raw ladder eigenvalues of the selected pair;
/// the plus partner lives in zone copy `m`, so its zero-copy quasienergy is
/// `e_plus + m*omega` and the splitting seen by dissipative dynamics is
/// `dissipative_gap = m*omega + omega_numeric`.
#[derive(Clone, Debug)]
pub struct Doublet {
    pub m: i32,
    pub omega_drive: f64,
    pub e_minus: f64,
    pub e_plus: f64,
    /// `e_plus - e_minus`: the avoided-crossing (dressed) splitting.
    pub omega_numeric: f64,
    pub state_minus: CompositeState,
    pub state_plus: CompositeState,
    /// Selection-score margin between the pair and the next-best state.
    pub score_margin: f64,
}

impl Doublet {
    pub fn e_plus_zero_copy(&self) -> f64 {
        self.e_plus + self.m as f64 * self.omega_drive
    }

    pub fn dissipative_gap(&self) -> f64 {
        self.e_plus_zero_copy() - self.e_minus
    }

    /// Plus-partner amplitudes moved into the zero copy.
    pub fn state_plus_zero_copy(&self) -> CompositeState {
        self.state_plus.photon_shifted(self.m)
    }
}

const SCORE_AMBIGUITY_TOL: f64 = 1e-6;

/// Select and gauge-fix the resonant doublet of the `m`-photon crossing.
///
/// States are ranked by their combined weight on the unperturbed crossing
/// pair (up, 0) and (down, m).  If the third-ranked state scores within
/// `1e-6` of the second, the crossing is not cleanly two-level at this
/// truncation and the selection is refused.
pub fn central_doublet(spec: &FloquetSpectrum, p: &SystemParams, m: i32) -> Result<Doublet> {
    let n = spec.n_tr as i32;
    if m < -n || m > n {
        return Err(Error::PhotonOutOfRange {
            photon: m,
            n_tr: spec.n_tr,
        });
    }
    let iu0 = (2 * n) as usize;
    let idm = (2 * (m + n) + 1) as usize;

    // Track the three best selection scores.
    let mut best = [(usize::MAX, f64::NEG_INFINITY); 3];
    for k in 0..spec.dim() {
        let vu = spec.vector_component(iu0, k);
        let vd = spec.vector_component(idm, k);
        let score = vu * vu + vd * vd;
        if score > best[0].1 {
            best = [(k, score), best[0], best[1]];
        } else if score > best[1].1 {
            best = [best[0], (k, score), best[1]];
        } else if score > best[2].1 {
            best[2] = (k, score);
        }
    }
    let margin = best[1].1 - best[2].1;
    if margin < SCORE_AMBIGUITY_TOL {
        return Err(Error::AmbiguousDoublet {
            in_pair: best[1].1,
            next_best: best[2].1,
            tol: SCORE_AMBIGUITY_TOL,
        });
    }

    let (mut ia, mut ib) = (best[0].0, best[1].0);
    if spec.energies[ia] > spec.energies[ib] {
        std::mem::swap(&mut ia, &mut ib);
    }
    let mut vm = spec.state(ia);
    let mut vp = spec.state(ib);

    // Sign gauge anchored on the dominant crossing component.  The reference
    // sign of the (down, m) slot follows the sign of the dressed element
    // Delta_{-m}, so the gauge stays continuous through parameter regions
    // where weight migrates between the two anchor slots.
    let s = if bessel_j(-m, p.drive_ratio())? >= 0.0 {
        1.0
    } else {
        -1.0
    };
    let flip_minus = if vm.amp(Spin::Up, 0).abs() >= vm.amp(Spin::Down, m).abs() {
        vm.amp(Spin::Up, 0) > 0.0
    } else {
        vm.amp(Spin::Down, m) * (-s) < 0.0
    };
    if flip_minus {
        vm.scale(-1.0);
    }
    let flip_plus = if vp.amp(Spin::Up, 0).abs() >= vp.amp(Spin::Down, m).abs() {
        vp.amp(Spin::Up, 0) < 0.0
    } else {
        vp.amp(Spin::Down, m) * (-s) < 0.0
    };
    if flip_plus {
        vp.scale(-1.0);
    }

    let e_minus = spec.energies[ia];
    let e_plus = spec.energies[ib];
    Ok(Doublet {
        m,
        omega_drive: p.omega,
        e_minus,
        e_plus,
        omega_numeric: e_plus - e_minus,
        state_minus: vm,
        state_plus: vp,
        score_margin: margin,
    })
}

/// Outcome of the ladder-doubling convergence loop.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConvergenceInfo {
    pub n_tr: usize,
    pub doublings: usize,
    /// Largest change of (e_minus, splitting) over the final doubling.
    pub last_change: f64,
}

const MAX_DOUBLINGS: usize = 4;

/// Compute the doublet, widening the ladder until eigenvalues settle.
///
/// The half-width doubles until both the lower quasienergy and the splitting
/// move by less than `tr.tol_conv` between consecutive ladders; the finer
/// result is returned.
pub fn converged_doublet(
    p: &SystemParams,
    m: i32,
    tr: &TruncationConfig,
) -> Result<(Doublet, ConvergenceInfo)> {
    let solve = |n_tr: usize| -> Result<Doublet> {
        let cfg = TruncationConfig {
            n_tr,
            tol_conv: tr.tol_conv,
        };
        let spec = diagonalize_floquet(&build_floquet_matrix(p, &cfg)?)?;
        central_doublet(&spec, p, m)
    };

    let mut n_tr = tr.n_tr;
    let mut prev = solve(n_tr)?;
    let mut change = f64::INFINITY;
    for doubling in 1..=MAX_DOUBLINGS {
        let next_n = 2 * n_tr;
        let next = solve(next_n)?;
        change = (next.e_minus - prev.e_minus)
            .abs()
            .max((next.omega_numeric - prev.omega_numeric).abs());
        if change < tr.tol_conv {
            return Ok((
                next,
                ConvergenceInfo {
                    n_tr: next_n,
                    doublings: doubling,
                    last_change: change,
                },
            ));
        }
        n_tr = next_n;
        prev = next;
    }
    Err(Error::TruncationNotConverged {
        change,
        tol: tr.tol_conv,
        n_tr,
    })
}

/// One point of a quasienergy sweep.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub m: i32,
    pub e_minus: f64,
    pub e_plus: f64,
    pub e_minus_folded: f64,
    pub e_plus_folded: f64,
    pub omega_numeric: f64,
}

/// Sweep the static bias at fixed drive, tracking the resonant doublet.
///
/// Within a resonance window the pair is followed by overlap with the
/// previous point's eigenvectors, which keeps the branch assignment stable
/// through avoided crossings; whenever the nearest resonance index changes,
/// the selection re-anchors on the unperturbed crossing states.  A fixed
/// ladder sized for the largest bias in the sweep is used throughout so
/// overlaps compare like with like.
pub fn doublet_sweep(
    p_base: &SystemParams,
    epsilons: &[f64],
    tr: Option<TruncationConfig>,
) -> Result<Vec<SweepPoint>> {
    if epsilons.is_empty() {
        return Ok(Vec::new());
    }
    let eps_extreme = epsilons
        .iter()
        .fold(0.0_f64, |acc, &e| acc.max(e.abs()));
    let widest = SystemParams {
        epsilon: eps_extreme,
        ..*p_base
    };
    let cfg = tr.unwrap_or_else(|| TruncationConfig::for_params(&widest));

    let mut out = Vec::with_capacity(epsilons.len());
    let mut prev: Option<(i32, CompositeState, CompositeState)> = None;
    for &eps in epsilons {
        let p = SystemParams {
            epsilon: eps,
            ..*p_base
        };
        let m = p.nearest_resonance();
        let spec = diagonalize_floquet(&build_floquet_matrix(&p, &cfg)?)?;

        let (e_minus, e_plus, vm, vp) = match &prev {
            Some((m_prev, vm_prev, vp_prev)) if *m_prev == m => {
                // Continuation: rank by overlap with the previous pair.
                let mut best = [(usize::MAX, f64::NEG_INFINITY); 2];
                for k in 0..spec.dim() {
                    let st = spec.state(k);
                    let score = st.dot(vm_prev).powi(2) + st.dot(vp_prev).powi(2);
                    if score > best[0].1 {
                        best = [(k, score), best[0]];
                    } else if score > best[1].1 {
                        best[1] = (k, score);
                    }
                }
                let (mut ia, mut ib) = (best[0].0, best[1].0);
                if spec.energies[ia] > spec.energies[ib] {
                    std::mem::swap(&mut ia, &mut ib);
                }
                let mut vm = spec.state(ia);
                if vm.dot(vm_prev) < 0.0 {
                    vm.scale(-1.0);
                }
                let mut vp = spec.state(ib);
                if vp.dot(vp_prev) < 0.0 {
                    vp.scale(-1.0);
                }
                (spec.energies[ia], spec.energies[ib], vm, vp)
            }
            _ => {
                let d = central_doublet(&spec, &p, m)?;
                (d.e_minus, d.e_plus, d.state_minus, d.state_plus)
            }
        };

        out.push(SweepPoint {
            epsilon: eps,
            m,
            e_minus,
            e_plus,
            e_minus_folded: fold_quasienergy(e_minus, p.omega),
            e_plus_folded: fold_quasienergy(e_plus, p.omega),
            omega_numeric: e_plus - e_minus,
        });
        prev = Some((m, vm, vp));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(eps: f64, omega: f64, amp: f64) -> SystemParams {
        SystemParams::new(1.0, eps, amp, omega).unwrap()
    }

    #[test]
    fn matrix_is_bitwise_symmetric() {
        let p = params(4.1, 2.0, 3.0);
        let fm = build_floquet_matrix(&p, &TruncationConfig::for_params(&p)).unwrap();
        for i in 0..fm.matrix.nrows() {
            for j in 0..i {
                assert_eq!(fm.matrix[(i, j)], fm.matrix[(j, i)]);
            }
        }
    }

    #[test]
    fn undriven_spectrum_is_exact() {
        // With A = 0 the ladder decouples: eigenvalues are +-E/2 - n*omega
        // with E = hypot(delta, eps).
        let p = params(3.0, 2.0, 0.0);
        let cfg = TruncationConfig { n_tr: 6, tol_conv: 1e-10 };
        let spec = diagonalize_floquet(&build_floquet_matrix(&p, &cfg).unwrap()).unwrap();
        let e = f64::hypot(1.0, 3.0);
        for n in -6..=6 {
            let lower = -e / 2.0 - n as f64 * 2.0;
            let hit = spec
                .energies
                .iter()
                .any(|&x| (x - lower).abs() < 1e-12);
            assert!(hit, "missing eigenvalue {lower}");
        }
    }

    #[test]
    fn folding_lands_in_first_zone() {
        for &(e, w) in &[(3.7, 2.0), (-5.1, 2.0), (0.999, 2.0), (-1.0, 2.0)] {
            let f = fold_quasienergy(e, w);
            assert!((-w / 2.0..w / 2.0).contains(&f), "{f} out of zone");
            // Difference is an integer number of zone widths.
            let k = (e - f) / w;
            assert_relative_eq!(k, k.round(), max_relative = 1e-12);
        }
    }

    #[test]
    fn doublet_energies_are_zone_partners() {
        let p = params(4.1, 2.0, 3.0);
        let spec =
            diagonalize_floquet(&build_floquet_matrix(&p, &TruncationConfig::for_params(&p)).unwrap())
                .unwrap();
        let d = central_doublet(&spec, &p, 2).unwrap();
        assert!(d.omega_numeric >= 0.0);
        assert!(d.omega_numeric < p.omega);
        // The gauge puts the dominant anchor amplitudes at predictable signs.
        assert!(d.state_minus.amp(Spin::Down, 2).abs() > 0.1);
        assert!(d.state_plus.amp(Spin::Up, 0) > 0.0);
        assert!(d.score_margin > SCORE_AMBIGUITY_TOL);
    }

    #[test]
    fn photon_shift_moves_anchor_slots() {
        let p = params(4.1, 2.0, 3.0);
        let spec =
            diagonalize_floquet(&build_floquet_matrix(&p, &TruncationConfig::for_params(&p)).unwrap())
                .unwrap();
        let d = central_doublet(&spec, &p, 2).unwrap();
        let shifted = d.state_plus_zero_copy();
        assert_relative_eq!(
            shifted.amp(Spin::Up, -2),
            d.state_plus.amp(Spin::Up, 0),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            shifted.amp(Spin::Down, 0),
            d.state_plus.amp(Spin::Down, 2),
            max_relative = 1e-15
        );
    }

    #[test]
    fn convergence_loop_reports_settled_ladder() {
        let p = params(4.1, 2.0, 3.0);
        let tr = TruncationConfig { n_tr: 8, tol_conv: 1e-10 };
        let (d, info) = converged_doublet(&p, 2, &tr).unwrap();
        assert!(info.last_change < 1e-10);
        assert!(info.n_tr >= 16);
        assert!(d.omega_numeric > 0.0);
    }

    #[test]
    fn absurd_tolerance_fails_loudly() {
        let p = params(4.1, 2.0, 3.0);
        let tr = TruncationConfig { n_tr: 4, tol_conv: 1e-300 };
        match converged_doublet(&p, 2, &tr) {
            Err(Error::TruncationNotConverged { .. }) => {}
            other => panic!("expected truncation failure, got {other:?}"),
        }
    }

    #[test]
    fn sweep_tracks_resonance_switches() {
        let p = params(0.0, 2.0, 3.0);
        let eps: Vec<f64> = (0..40).map(|i| 0.2 * i as f64).collect();
        let pts = doublet_sweep(&p, &eps, None).unwrap();
        assert_eq!(pts.len(), 40);
        for pt in &pts {
            assert_eq!(pt.m, (pt.epsilon / 2.0).round() as i32);
            assert!(pt.omega_numeric >= 0.0);
            assert!(pt.e_minus_folded >= -1.0 && pt.e_minus_folded < 1.0);
        }
    }

    #[test]
    fn out_of_range_photon_index_is_refused() {
        let p = params(4.1, 2.0, 3.0);
        let cfg = TruncationConfig { n_tr: 4, tol_conv: 1e-10 };
        let spec = diagonalize_floquet(&build_floquet_matrix(&p, &cfg).unwrap()).unwrap();
        assert!(matches!(
            central_doublet(&spec, &p, 9),
            Err(Error::PhotonOutOfRange { .. })
        ));
    }
}
