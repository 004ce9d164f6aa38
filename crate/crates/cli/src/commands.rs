use ringcat_core::dynamics::{cat_scan_static, preparation_protocol, ProtocolSettings, RampShape};
use ringcat_core::flow::{FlowFrame, FlowTransform};
use ringcat_core::fock::{fock_dimension, FockBasis};
use ringcat_core::model::{build_site_hamiltonian, RingParams};
use ringcat_core::spectrum::{
    find_anticrossing, lowest_eigenpairs_with, phase_scan_with, resolved_ground_state, SolverOptions,
};
use ringcat_core::witness::minimize_separable_energy;
use serde_json::json;

use crate::config::Resolver;
use crate::expr::parse_expr;
use crate::output::{header_lines, in_two_pi_over_three, num, Csv};
use crate::{AnticrossingArgs, CatArgs, Common, Failure, FlowArgs, RampArgs, RingArgs, SpectrumArgs, WitnessArgs};

const DEFAULT_CAP: usize = 200_000;

struct Ring {
    sites: usize,
    atoms: usize,
    factors: Vec<f64>,
}

impl Ring {
    /// Parameters with base tunneling `j`, interaction `u` and phase `phi`.
    fn params(&self, u: f64, j: f64, phi: f64) -> RingParams {
        let mut p = RingParams::uniform(self.sites, self.atoms, u, j, phi);
        for (i, &f) in self.factors.iter().enumerate() {
            p = p.with_bond_factor(i, f);
        }
        p
    }
}

struct Setup {
    resolver: Resolver,
    workers: Option<usize>,
    cap: usize,
}

fn setup(common: &Common) -> Result<Setup, Failure> {
    let mut resolver = Resolver::new(common.config.as_deref()).map_err(Failure::Config)?;
    let workers = resolver.quiet_integer("workers", common.workers.as_deref());
    if workers == Some(0) {
        resolver.error("workers must be at least 1");
    }
    let cap = resolver
        .integer("dimension-cap", common.dimension_cap.as_deref(), Some(DEFAULT_CAP))
        .unwrap_or(DEFAULT_CAP);
    Ok(Setup {
        resolver,
        workers,
        cap,
    })
}

fn ring(s: &mut Setup, a: &RingArgs, three_sites_only: bool) -> Option<Ring> {
    let r = &mut s.resolver;
    let sites = r.integer("sites", a.sites.as_deref(), Some(3));
    let atoms = r.integer("atoms", a.atoms.as_deref(), None);
    let factors = r.list("bond-factors", a.bond_factors.as_deref());
    let (sites, atoms) = (sites?, atoms?);
    let mut ok = true;
    if sites < 2 {
        r.error(format!("sites must be at least 2, got {sites}"));
        ok = false;
    }
    if three_sites_only && sites != 3 {
        r.error(format!("this command needs sites = 3, got {sites}"));
        ok = false;
    }
    if atoms < 1 {
        r.error("atoms must be at least 1");
        ok = false;
    }
    let factors = factors.unwrap_or_else(|| vec![1.0; sites]);
    if factors.len() != sites {
        r.error(format!("bond-factors has {} entries for {sites} sites", factors.len()));
        ok = false;
    }
    if factors.iter().any(|f| !(*f >= 0.0)) {
        r.error("bond-factors must be >= 0");
        ok = false;
    }
    if ok {
        let dim = fock_dimension(sites, atoms);
        if dim > s.cap as u128 {
            r.error(format!("Hilbert space dimension {dim} exceeds dimension-cap {}", s.cap));
            ok = false;
        }
    }
    ok.then_some(Ring { sites, atoms, factors })
}

fn non_negative(r: &mut Resolver, key: &str, v: Option<f64>) -> Option<f64> {
    match v {
        Some(x) if x < 0.0 => {
            r.error(format!("{key} must be >= 0, got {x}"));
            None
        }
        other => other,
    }
}

/// Finishes resolution and runs `body` on the configured worker pool.
fn run<T>(
    s: Setup,
    body: impl FnOnce() -> Result<T, ringcat_core::Error> + Send,
) -> Result<(T, Vec<(String, String)>), Failure>
where
    T: Send,
{
    let config = s.resolver.finish().map_err(Failure::Config)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = s.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::Numerical(format!("cannot start worker pool: {e}")))?;
    let value = pool.install(body)?;
    Ok((value, config))
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn spectrum_scan(a: &SpectrumArgs) -> Result<String, Failure> {
    let mut s = setup(&a.common)?;
    let ring = ring(&mut s, &a.ring, false);
    let r = &mut s.resolver;
    let u = r.number("u-over-j", a.u_over_j.as_deref(), None);
    let u = non_negative(r, "u-over-j", u);
    let levels = r.integer("levels", a.levels.as_deref(), Some(4));
    let grid = r.grid("phi-grid", a.phi_grid.as_deref(), "0:2pi/3:241");
    let dense_limit = r.integer("dense-limit", a.dense_limit.as_deref(), Some(5000));
    if let (Some(k), Some(ring)) = (levels, ring.as_ref()) {
        let dim = fock_dimension(ring.sites, ring.atoms);
        if k == 0 || k as u128 > dim {
            r.error(format!("levels must be between 1 and the dimension {dim}, got {k}"));
        }
    }
    let (Some(ring), Some(u), Some(k), Some(grid), Some(dense_limit)) = (ring, u, levels, grid, dense_limit) else {
        return Err(Failure::Config(s.resolver.finish().err().unwrap_or_default()));
    };
    let params = ring.params(u, 1.0, 0.0);
    let opts = SolverOptions {
        dense_limit,
        ..Default::default()
    };
    let (scan, config) = run(s, || phase_scan_with(&params, &grid, k, &opts))?;

    let mut names = columns(&["phi_rad", "phi_in_2pi_over_3"]);
    names.extend((0..k).map(|i| format!("E{i}")));
    let mut csv = Csv::new("spectrum-scan", &config, &names);
    for (phi, levels) in scan.phis.iter().zip(&scan.levels) {
        let mut cells = vec![num(*phi), num(in_two_pi_over_three(*phi))];
        cells.extend(levels.iter().map(|&e| num(e)));
        csv.row(&cells);
    }
    Ok(csv.into_string())
}

pub fn flow_dist(a: &FlowArgs) -> Result<String, Failure> {
    let mut s = setup(&a.common)?;
    let ring = ring(&mut s, &a.ring, true);
    let r = &mut s.resolver;
    let u = r.number("u-over-j", a.u_over_j.as_deref(), None);
    let u = non_negative(r, "u-over-j", u);
    let phi = r.phase("phi", a.phi.as_deref(), "0");
    let level = r.integer("level", a.level.as_deref(), Some(0));
    if let (Some(l), Some(ring)) = (level, ring.as_ref()) {
        let dim = fock_dimension(ring.sites, ring.atoms);
        if l as u128 >= dim {
            r.error(format!("level {l} out of range for dimension {dim}"));
        }
    }
    let (Some(ring), Some(u), Some(phi), Some(level)) = (ring, u, phi, level) else {
        return Err(Failure::Config(s.resolver.finish().err().unwrap_or_default()));
    };
    let params = ring.params(u, 1.0, phi);
    let (rows, config) = run(s, || {
        let basis = FockBasis::new(params.sites, params.atoms)?;
        let h = build_site_hamiltonian(&params, &basis)?;
        let opts = SolverOptions::default();
        let state = if level == 0 {
            resolved_ground_state(&h, &basis, &opts)?.state
        } else {
            lowest_eigenpairs_with(&h, level + 1, &opts)?.eigenvectors.swap_remove(level)
        };
        let frame = FlowFrame::new(&basis, &FlowTransform::new(3))?;
        let mut rows = frame.distribution(&state)?.beta_gamma_rows();
        rows.sort_by_key(|&(b, g, _)| (b, g));
        Ok(rows)
    })?;
    let mut csv = Csv::new("flow-dist", &config, &columns(&["n_beta", "n_gamma", "probability"]));
    for (b, g, p) in rows {
        csv.row(&[b.to_string(), g.to_string(), num(p)]);
    }
    Ok(csv.into_string())
}

pub fn cat_scan(a: &CatArgs) -> Result<String, Failure> {
    let mut s = setup(&a.common)?;
    let ring = ring(&mut s, &a.ring, false);
    let r = &mut s.resolver;
    let phi = r.phase("phi", a.phi.as_deref(), "pi/3");
    let grid = r.grid("j-over-u-grid", a.j_over_u_grid.as_deref(), "log:0.01:100:41");
    if let Some(g) = grid.as_ref() {
        if g.iter().any(|&x| x < 0.0) {
            r.error("j-over-u-grid values must be >= 0");
        }
    }
    let (Some(ring), Some(phi), Some(grid)) = (ring, phi, grid) else {
        return Err(Failure::Config(s.resolver.finish().err().unwrap_or_default()));
    };
    let template = ring.params(1.0, 1.0, phi);
    let (rows, config) = run(s, || cat_scan_static(&template, &grid, phi))?;
    let mut csv = Csv::new(
        "cat-scan",
        &config,
        &columns(&["j_over_u", "cat_fidelity", "theta_opt", "gap"]),
    );
    for row in rows {
        csv.row(&[num(row.j_over_u), num(row.fidelity), num(row.theta), num(row.gap)]);
    }
    Ok(csv.into_string())
}

pub fn ramp(a: &RampArgs) -> Result<String, Failure> {
    let mut s = setup(&a.common)?;
    let ring = ring(&mut s, &a.ring, false);
    let r = &mut s.resolver;
    let target = r.number("target-j-over-u", a.target_j_over_u.as_deref(), None);
    let target = non_negative(r, "target-j-over-u", target);
    let floor = r.number("floor-j-over-u", a.floor_j_over_u.as_deref(), Some(0.0));
    let floor = non_negative(r, "floor-j-over-u", floor);
    let rotation = r.phase("rotation-phi", a.rotation_phi.as_deref(), "pi/3");
    let durations = match r.list("durations", a.durations.as_deref()) {
        None => {
            r.resolved.push(("durations".into(), [50.0; 3].map(num).join(",")));
            Some(vec![50.0; 3])
        }
        some => some,
    };
    if let Some(d) = durations.as_ref() {
        if d.len() != 3 || d.iter().any(|&x| !(x > 0.0)) {
            r.error(format!("durations needs three positive values, got {d:?}"));
        }
    }
    let shape = r.choice("shape", a.shape.as_deref(), "smooth", &["smooth", "linear", "exponential"]);
    let dt = r.number("time-step", a.time_step.as_deref(), Some(0.01));
    if let Some(x) = dt {
        if !(x > 0.0) {
            r.error(format!("time-step must be positive, got {x}"));
        }
    }
    let every = r.integer("sample-every", a.sample_every.as_deref(), Some(1));
    if every == Some(0) {
        r.error("sample-every must be at least 1");
    }
    if shape.as_deref() == Some("exponential") && floor.is_some_and(|f| f <= 0.0) {
        r.error("an exponential shape needs floor-j-over-u > 0");
    }
    let (Some(ring), Some(target), Some(floor), Some(rotation), Some(durations), Some(shape), Some(dt), Some(every)) =
        (ring, target, floor, rotation, durations, shape, dt, every)
    else {
        return Err(Failure::Config(s.resolver.finish().err().unwrap_or_default()));
    };
    let settings = ProtocolSettings {
        target_j_over_u: target,
        floor_j_over_u: floor,
        rotation_phi: rotation,
        durations: [durations[0], durations[1], durations[2]],
        shape: match shape.as_str() {
            "linear" => RampShape::Linear,
            "exponential" => RampShape::Exponential,
            _ => RampShape::Smooth,
        },
        time_step: dt,
        sample_every: every,
    };
    let template = ring.params(1.0, target, 0.0);
    let (trace, config) = run(s, || preparation_protocol(&template, &settings))?;
    let mut csv = Csv::new(
        "ramp",
        &config,
        &columns(&["t", "norm_error", "gs_overlap", "cat_fidelity", "energy"]),
    );
    for i in 0..trace.len() {
        csv.row(&[
            num(trace.times[i]),
            num(trace.norm_errors[i]),
            num(trace.ground_overlaps[i]),
            num(trace.cat_fidelities[i]),
            num(trace.energies[i]),
        ]);
    }
    Ok(csv.into_string())
}

pub fn witness(a: &WitnessArgs) -> Result<String, Failure> {
    let mut s = setup(&a.common)?;
    let ring = ring(&mut s, &a.ring, false);
    let r = &mut s.resolver;
    let u = r.number("u-over-j", a.u_over_j.as_deref(), None);
    let u = non_negative(r, "u-over-j", u);
    let phi = r.phase("phi", a.phi.as_deref(), "0");
    let restarts = r.integer("restarts", a.restarts.as_deref(), Some(32));
    if restarts == Some(0) {
        r.error("restarts must be at least 1");
    }
    let seed = r.integer("seed", a.seed.as_deref(), Some(0));
    let (Some(ring), Some(u), Some(phi), Some(restarts), Some(seed)) = (ring, u, phi, restarts, seed) else {
        return Err(Failure::Config(s.resolver.finish().err().unwrap_or_default()));
    };
    let params = ring.params(u, 1.0, phi);
    let (report, config) = run(s, || minimize_separable_energy(&params, restarts, seed as u64))?;
    let header: serde_json::Map<String, serde_json::Value> = config
        .iter()
        .map(|(k, v)| (k.clone(), json!(v)))
        .collect();
    let lines = header_lines("witness", &[]);
    let doc = json!({
        "header": {
            "version": lines[0],
            "command": "witness",
            "separable_class": "product condensate",
            "config": header,
        },
        "e_ground": report.e_ground,
        "e_sep_min": report.e_sep_min,
        "margin": report.margin,
        "certified": report.certified,
        "argmin_amplitudes": report.argmin.amplitudes().iter().map(|c| json!([c.re, c.im])).collect::<Vec<_>>(),
        "seed": seed,
        "restarts_converged": report.restarts_converged,
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn anticrossing(a: &AnticrossingArgs) -> Result<String, Failure> {
    let mut s = setup(&a.common)?;
    let ring = ring(&mut s, &a.ring, false);
    let r = &mut s.resolver;
    let u = r.number("u-over-j", a.u_over_j.as_deref(), None);
    let u = non_negative(r, "u-over-j", u);
    let bracket = bracket_range(r, a.bracket.as_deref());
    let tol = r.number("tol", a.tol.as_deref(), Some(1e-6));
    if let Some(t) = tol {
        if !(t > 0.0) {
            r.error(format!("tol must be positive, got {t}"));
        }
    }
    let (Some(ring), Some(u), Some(bracket), Some(tol)) = (ring, u, bracket, tol) else {
        return Err(Failure::Config(s.resolver.finish().err().unwrap_or_default()));
    };
    let params = ring.params(u, 1.0, 0.0);
    let (found, config) = run(s, || find_anticrossing(&params, bracket, tol))?;
    let mut csv = Csv::new(
        "anticrossing",
        &config,
        &columns(&["phi_star_rad", "phi_star_in_2pi_over_3", "gap"]),
    );
    csv.row(&[num(found.phi), num(in_two_pi_over_three(found.phi)), num(found.gap)]);
    Ok(csv.into_string())
}

fn bracket_range(r: &mut Resolver, flag: Option<&str>) -> Option<(f64, f64)> {
    let text = r.text("bracket", flag, "pi/3-0.3:pi/3+0.3");
    let parts: Vec<&str> = text.split(':').collect();
    let parsed = match parts.as_slice() {
        [lo, hi] => parse_expr(lo).and_then(|lo| parse_expr(hi).map(|hi| (lo, hi))),
        _ => Err(format!("'{text}' must be lo:hi")),
    };
    match parsed {
        Ok((lo, hi)) if lo < hi => Some((lo, hi)),
        Ok(_) => {
            r.error(format!("bracket '{text}': lo must be below hi"));
            None
        }
        Err(e) => {
            r.error(format!("bracket: {e}"));
            None
        }
    }
}
