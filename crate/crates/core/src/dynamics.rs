//! Time evolution under ramped tunneling and static `J/U` scans.
//!
//! Schedules are written in units of the interaction: times in `ħ/U`,
//! tunneling as `J/U`. The template's `U` must be positive; its bond
//! factors carry over, so a detuned bond stays detuned during a ramp.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{CatFidelity, CatProbe, FlowTransform};
use crate::fock::FockBasis;
use crate::model::{build_site_hamiltonian, RingParams};
use crate::operator::{norm_error, require_normalized, DenseMatrix, StateVector};
use crate::spectrum::{resolved_ground_state, SolverOptions, DEGENERACY_TOL};

/// Maximum tolerated `|‖ψ‖ − 1|` along a trace.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// Tunneling `J/U` as a function of the fraction `s ∈ [0, 1]` of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JProfile {
    Constant(f64),
    Linear { from: f64, to: f64 },
    /// Geometric interpolation; both endpoints must be positive.
    Exponential { from: f64, to: f64 },
    /// `from + (to − from)(3s² − 2s³)`: zero slope at both ends.
    Smooth { from: f64, to: f64 },
}

impl JProfile {
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            JProfile::Constant(v) => v,
            JProfile::Linear { from, to } => from + (to - from) * s,
            JProfile::Exponential { from, to } => from * (to / from).powf(s),
            JProfile::Smooth { from, to } => from + (to - from) * s * s * (3.0 - 2.0 * s),
        }
    }

    fn endpoints(&self) -> (f64, f64) {
        match *self {
            JProfile::Constant(v) => (v, v),
            JProfile::Linear { from, to }
            | JProfile::Exponential { from, to }
            | JProfile::Smooth { from, to } => (from, to),
        }
    }

    fn check(&self) -> Result<()> {
        let (a, b) = self.endpoints();
        if !(a >= 0.0 && b >= 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!("J/U endpoints must be finite and >= 0, got {a}, {b}")));
        }
        if matches!(self, JProfile::Exponential { .. }) && !(a > 0.0 && b > 0.0) {
            return Err(Error::Domain(format!("exponential ramp needs positive endpoints, got {a}, {b}")));
        }
        Ok(())
    }
}

/// Ramp family used by the preparation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampShape {
    Linear,
    Exponential,
    Smooth,
}

impl RampShape {
    pub fn profile(self, from: f64, to: f64) -> JProfile {
        match self {
            RampShape::Linear => JProfile::Linear { from, to },
            RampShape::Exponential => JProfile::Exponential { from, to },
            RampShape::Smooth => JProfile::Smooth { from, to },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// In units of `ħ/U`.
    pub duration: f64,
    pub j_profile: JProfile,
    /// Peierls phase on every bond, held for the whole segment.
    pub phi: f64,
}

/// Ordered segments propagated with a common maximum time step. Each segment
/// is split into `ceil(duration / time_step)` equal steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RampSchedule {
    pub segments: Vec<Segment>,
    pub time_step: f64,
    /// Record every n-th step (the final step is always recorded).
    pub sample_every: usize,
}

impl RampSchedule {
    pub fn new(segments: Vec<Segment>, time_step: f64) -> Self {
        RampSchedule {
            segments,
            time_step,
            sample_every: 1,
        }
    }

    pub fn with_sample_every(mut self, n: usize) -> Self {
        self.sample_every = n;
        self
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    fn steps(&self, segment: &Segment) -> usize {
        ((segment.duration / self.time_step) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::Domain("schedule has no segments".into()));
        }
        if !(self.time_step > 0.0) || !self.time_step.is_finite() {
            return Err(Error::Domain(format!("time step must be positive, got {}", self.time_step)));
        }
        if self.sample_every == 0 {
            return Err(Error::Domain("sample_every must be at least 1".into()));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration > 0.0) || !s.duration.is_finite() {
                return Err(Error::Domain(format!("segment {i} duration must be positive, got {}", s.duration)));
            }
            if !s.phi.is_finite() {
                return Err(Error::Domain(format!("segment {i} phase is not finite")));
            }
            s.j_profile.check()?;
        }
        Ok(())
    }
}

/// Observables recorded along a propagation.
#[derive(Debug, Clone, Default)]
pub struct EvolutionTrace {
    /// In units of `ħ/U`.
    pub times: Vec<f64>,
    pub norm_errors: Vec<f64>,
    /// Probability in the instantaneous lowest eigenspace.
    pub ground_overlaps: Vec<f64>,
    /// Two-branch cat fidelity between flow modes 0 and 1.
    pub cat_fidelities: Vec<f64>,
    /// `⟨H⟩` in the template's energy units.
    pub energies: Vec<f64>,
    pub final_state: StateVector,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_ground_overlap(&self) -> f64 {
        *self.ground_overlaps.last().expect("trace is never empty")
    }

    pub fn final_cat_fidelity(&self) -> f64 {
        *self.cat_fidelities.last().expect("trace is never empty")
    }

    pub fn max_norm_error(&self) -> f64 {
        self.norm_errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Eigendecomposition of `H/U` at one `(J/U, φ)` point.
struct Frozen {
    key: (f64, f64),
    values: Vec<f64>,
    vectors: DenseMatrix,
}

struct Propagator<'a> {
    template: &'a RingParams,
    basis: &'a FockBasis,
    cache: Option<Frozen>,
}

impl<'a> Propagator<'a> {
    fn frozen(&mut self, j_over_u: f64, phi: f64) -> Result<&Frozen> {
        let key = (j_over_u, phi);
        if self.cache.as_ref().map_or(true, |f| f.key != key) {
            let p = self.template.clone().with_interaction(1.0).with_tunneling(j_over_u).with_phase(phi);
            let h = build_site_hamiltonian(&p, self.basis)?.to_dense();
            let eig = h
                .try_symmetric_eigen(f64::EPSILON, 0)
                .ok_or(Error::Convergence { iterations: 0 })?;
            self.cache = Some(Frozen {
                key,
                values: eig.eigenvalues.iter().copied().collect(),
                vectors: eig.eigenvectors,
            });
        }
        Ok(self.cache.as_ref().expect("just filled"))
    }
}

fn advance(f: &Frozen, psi: &StateVector, dt: f64) -> StateVector {
    let mut c = f.vectors.adjoint() * psi;
    for (ci, &e) in c.iter_mut().zip(&f.values) {
        *ci *= Complex64::from_polar(1.0, -e * dt);
    }
    &f.vectors * c
}

/// `(ground-space probability, ⟨H/U⟩)` of `psi` under a frozen Hamiltonian.
fn observe(f: &Frozen, psi: &StateVector) -> (f64, f64) {
    let c = f.vectors.adjoint() * psi;
    let e0 = f.values.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = f.values.iter().map(|e| e.abs()).fold(1.0, f64::max);
    let mut ground = 0.0;
    let mut energy = 0.0;
    for (ci, &e) in c.iter().zip(&f.values) {
        let p = ci.norm_sqr();
        energy += p * e;
        if e - e0 <= DEGENERACY_TOL * scale {
            ground += p;
        }
    }
    (ground, energy)
}

/// Propagates `initial` through `schedule`.
///
/// Each step holds `H` at its midpoint parameters and applies the exact
/// propagator from a dense eigendecomposition. Samples are taken at `t = 0`
/// and after every `sample_every`-th step, against the Hamiltonian at the
/// sample time.
pub fn evolve(template: &RingParams, schedule: &RampSchedule, initial: &StateVector) -> Result<EvolutionTrace> {
    template.validate()?;
    schedule.validate()?;
    let u = template.interaction;
    if !(u > 0.0) {
        return Err(Error::Domain(format!("ramps are in units of U, which must be positive, got {u}")));
    }
    let basis = FockBasis::new(template.sites, template.atoms)?;
    if initial.len() != basis.dim() {
        return Err(Error::Domain(format!(
            "initial state has length {} but the basis has {} states",
            initial.len(),
            basis.dim()
        )));
    }
    require_normalized(initial, NORM_DRIFT_LIMIT)?;
    let probe = CatProbe::new(&basis, &FlowTransform::new(template.sites), (0, 1))?;

    let mut prop = Propagator {
        template,
        basis: &basis,
        cache: None,
    };
    let mut trace = EvolutionTrace::default();
    let record = |trace: &mut EvolutionTrace, prop: &mut Propagator, t: f64, j: f64, phi: f64, psi: &StateVector| -> Result<()> {
        let err = norm_error(psi);
        if err > NORM_DRIFT_LIMIT {
            return Err(Error::NumericalIntegrity(format!("norm drift {err:.3e} at t = {t}")));
        }
        let (ground, energy) = observe(prop.frozen(j, phi)?, psi);
        let normalized = psi / Complex64::new(psi.norm(), 0.0);
        let CatFidelity { probability, .. } = probe.fidelity(&normalized)?;
        trace.times.push(t);
        trace.norm_errors.push(err);
        trace.ground_overlaps.push(ground);
        trace.cat_fidelities.push(probability);
        trace.energies.push(energy * u);
        Ok(())
    };

    let first = &schedule.segments[0];
    let mut psi = initial.clone();
    record(&mut trace, &mut prop, 0.0, first.j_profile.value(0.0), first.phi, &psi)?;

    let mut t0 = 0.0;
    let mut step_count = 0usize;
    let last_segment = schedule.segments.len() - 1;
    for (si, seg) in schedule.segments.iter().enumerate() {
        let n = schedule.steps(seg);
        let dt = seg.duration / n as f64;
        for k in 0..n {
            let s_mid = (k as f64 + 0.5) / n as f64;
            psi = advance(prop.frozen(seg.j_profile.value(s_mid), seg.phi)?, &psi, dt);
            step_count += 1;
            let is_last = si == last_segment && k + 1 == n;
            if step_count % schedule.sample_every == 0 || is_last {
                let s_end = (k + 1) as f64 / n as f64;
                let t = t0 + seg.duration * s_end;
                record(&mut trace, &mut prop, t, seg.j_profile.value(s_end), seg.phi, &psi)?;
            }
        }
        t0 += seg.duration;
    }
    trace.final_state = psi;
    Ok(trace)
}

/// One row of a static cat-fidelity scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatScanRow {
    pub j_over_u: f64,
    pub fidelity: f64,
    pub theta: f64,
    pub gap: f64,
}

/// Ground-state cat fidelity between flow modes 0 and 1 at each `J/U`.
///
/// Uses the template's `U` and bond factors; `J = (J/U)·U` on the base bond
/// and `φ` on every bond. Gaps are in the template's energy units. Grid
/// points run in parallel and come back in grid order.
pub fn cat_scan_static(template: &RingParams, j_over_u_grid: &[f64], phi: f64) -> Result<Vec<CatScanRow>> {
    template.validate()?;
    if j_over_u_grid.is_empty() {
        return Err(Error::Domain("J/U grid is empty".into()));
    }
    if j_over_u_grid.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Domain("J/U values must be finite and >= 0".into()));
    }
    if j_over_u_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("J/U grid must be strictly ascending".into()));
    }
    let u = template.interaction;
    if !(u > 0.0) {
        return Err(Error::Domain(format!("a J/U scan needs U > 0, got {u}")));
    }
    let basis = FockBasis::new(template.sites, template.atoms)?;
    let probe = CatProbe::new(&basis, &FlowTransform::new(template.sites), (0, 1))?;
    let opts = SolverOptions::default();
    j_over_u_grid
        .par_iter()
        .map(|&x| {
            let row = || -> Result<CatScanRow> {
                let p = template.clone().with_tunneling(x * u).with_phase(phi);
                let h = build_site_hamiltonian(&p, &basis)?;
                let g = resolved_ground_state(&h, &basis, &opts)?;
                let f = probe.fidelity(&g.state)?;
                Ok(CatScanRow {
                    j_over_u: x,
                    fidelity: f.probability,
                    theta: f.theta,
                    gap: g.gap,
                })
            };
            row().map_err(|e| e.at_coupling(x))
        })
        .collect()
}

/// Settings of the three-stage preparation protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSettings {
    /// `J/U` at the start of stage 1 and the end of stage 3.
    pub target_j_over_u: f64,
    /// `J/U` reached at the end of stage 1 and held during stage 2.
    pub floor_j_over_u: f64,
    /// Phase switched on at the start of stage 2.
    pub rotation_phi: f64,
    /// Stage durations in `ħ/U`.
    pub durations: [f64; 3],
    pub shape: RampShape,
    pub time_step: f64,
    pub sample_every: usize,
}

impl Default for ProtocolSettings {
    fn default() -> Self {
        ProtocolSettings {
            target_j_over_u: 2.0,
            floor_j_over_u: 0.0,
            rotation_phi: PI / 3.0,
            durations: [50.0; 3],
            shape: RampShape::Smooth,
            time_step: 0.01,
            sample_every: 1,
        }
    }
}

impl ProtocolSettings {
    /// Stage 1 lowers `J/U` at `φ = 0`, stage 2 holds it while the phase is
    /// switched to `rotation_phi`, stage 3 raises it back to the target.
    pub fn schedule(&self) -> RampSchedule {
        let (hi, lo) = (self.target_j_over_u, self.floor_j_over_u);
        RampSchedule {
            segments: vec![
                Segment {
                    duration: self.durations[0],
                    j_profile: self.shape.profile(hi, lo),
                    phi: 0.0,
                },
                Segment {
                    duration: self.durations[1],
                    j_profile: JProfile::Constant(lo),
                    phi: self.rotation_phi,
                },
                Segment {
                    duration: self.durations[2],
                    j_profile: self.shape.profile(lo, hi),
                    phi: self.rotation_phi,
                },
            ],
            time_step: self.time_step,
            sample_every: self.sample_every,
        }
    }
}

/// Runs the preparation protocol from the ground state at `φ = 0` and the
/// target `J/U`.
pub fn preparation_protocol(template: &RingParams, settings: &ProtocolSettings) -> Result<EvolutionTrace> {
    template.validate()?;
    let u = template.interaction;
    if !(u > 0.0) {
        return Err(Error::Domain(format!("the protocol is in units of U, which must be positive, got {u}")));
    }
    let schedule = settings.schedule();
    schedule.validate()?;
    let basis = FockBasis::new(template.sites, template.atoms)?;
    let start = template
        .clone()
        .with_tunneling(settings.target_j_over_u * u)
        .with_phase(0.0);
    let h = build_site_hamiltonian(&start, &basis)?;
    let g = resolved_ground_state(&h, &basis, &SolverOptions::default())?;
    evolve(template, &schedule, &g.state)
}
