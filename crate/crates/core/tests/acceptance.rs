//! Acceptance suite: one line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p ringcat-core --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use ringcat_core::dynamics::{cat_scan_static, preparation_protocol, ProtocolSettings};
use ringcat_core::flow::{quasi_momentum_projections, CatProbe, FlowFrame, FlowTransform};
use ringcat_core::fock::{fock_dimension, FockBasis};
use ringcat_core::model::{build_flow_hamiltonian_3site, build_site_hamiltonian, quasi_momentum, RingParams};
use ringcat_core::spectrum::{find_anticrossing, lowest_eigenpairs, phase_scan, resolved_ground_state, SolverOptions};
use ringcat_core::witness::{minimize_separable_energy, separable_energy};
use ringcat_core::{Complex64, StateVector};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ok<T>(r: ringcat_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn ground_cat(params: &RingParams) -> Result<(f64, f64), String> {
    let basis = ok(FockBasis::new(params.sites, params.atoms))?;
    let h = ok(build_site_hamiltonian(params, &basis))?;
    let g = ok(resolved_ground_state(&h, &basis, &SolverOptions::default()))?;
    let probe = ok(CatProbe::new(&basis, &FlowTransform::new(params.sites), (0, 1)))?;
    let f = ok(probe.fidelity(&g.state))?;
    Ok((f.probability, f.theta))
}

fn criterion_1() -> Outcome {
    let p = RingParams::uniform(3, 3, 0.5, 1.0, 0.0);
    let grid: Vec<f64> = (0..241).map(|i| i as f64 * (2.0 * PI / 3.0) / 240.0).collect();
    let scan = ok(phase_scan(&p, &grid, 4))?;
    let i_min = scan.min_gap_index();
    ensure((scan.phis[i_min] - PI / 3.0).abs() <= 1e-3, format!("grid minimum at {}", scan.phis[i_min]))?;
    let refined = ok(find_anticrossing(&p, (PI / 3.0 - 0.3, PI / 3.0 + 0.3), 1e-6))?;
    ensure((refined.phi - PI / 3.0).abs() <= 1e-3, format!("refined minimum at {}", refined.phi))?;
    ensure(refined.gap > 1e-6, format!("gap {} not above 1e-6", refined.gap))?;
    let mut asym: f64 = 0.0;
    for i in 0..=120 {
        for (a, b) in scan.levels[i].iter().zip(&scan.levels[240 - i]) {
            asym = asym.max((a - b).abs());
        }
    }
    ensure(asym <= 1e-9, format!("asymmetry {asym:.2e}"))?;
    Ok(format!(
        "phi*={:.8} gap={:.6} asymmetry={:.1e}",
        refined.phi, refined.gap, asym
    ))
}

fn criterion_2() -> Outcome {
    let p = RingParams::uniform(3, 3, 0.5, 1.0, 0.0);
    let basis = ok(FockBasis::new(3, 3))?;
    let h = ok(build_site_hamiltonian(&p, &basis))?;
    let s = ok(lowest_eigenpairs(&h, 1))?;
    let frame = ok(FlowFrame::new(&basis, &FlowTransform::new(3)))?;
    let prob = ok(frame.distribution(s.ground_state()))?.probability(&[3, 0, 0]);
    ensure((prob - 0.99).abs() <= 0.01, format!("P(3,0,0) = {prob}"))?;
    Ok(format!("P(3,0,0)={prob:.5}"))
}

fn criterion_3() -> Outcome {
    let p = RingParams::uniform(3, 3, 0.5, 1.0, PI / 3.0);
    let basis = ok(FockBasis::new(3, 3))?;
    let h = ok(build_site_hamiltonian(&p, &basis))?;
    let s = ok(lowest_eigenpairs(&h, 2))?;
    let probe = ok(CatProbe::new(&basis, &FlowTransform::new(3), (0, 1)))?;
    let g = ok(probe.fidelity(&s.eigenvectors[0]))?;
    let e = ok(probe.fidelity(&s.eigenvectors[1]))?;
    ensure((g.probability - 0.93).abs() <= 0.02, format!("ground fidelity {}", g.probability))?;
    ensure(e.probability >= 0.98, format!("excited fidelity {}", e.probability))?;
    let dtheta = ringcat_core::flow::wrap_phase(e.theta - g.theta).abs();
    ensure((dtheta - PI).abs() <= 0.1, format!("relative phase difference {dtheta}"))?;
    Ok(format!(
        "ground={:.5} excited={:.5} dtheta={:.5}",
        g.probability, e.probability, dtheta
    ))
}

fn criterion_4() -> Outcome {
    let p = RingParams::uniform(3, 3, 0.0, 1.0, PI / 3.0);
    let basis = ok(FockBasis::new(3, 3))?;
    let h = ok(build_site_hamiltonian(&p, &basis))?;
    let s = ok(lowest_eigenpairs(&h, 5))?;
    let dev = s.eigenvalues[..4].iter().map(|e| (e + 3.0).abs()).fold(0.0, f64::max);
    ensure(dev <= 1e-10, format!("max |E + 3J| = {dev:.2e}"))?;
    ensure(s.gap() == 0.0, format!("gap {}", s.gap()))?;
    ensure(s.eigenvalues[4] > -3.0 + 1e-6, "fifth level also degenerate")?;
    Ok(format!("max|E+3J|={dev:.1e} gap=0 E4={:.5}", s.eigenvalues[4]))
}

fn criterion_5() -> Outcome {
    let template = RingParams::uniform(3, 30, 1.0, 1.0, 0.0);
    let rows = ok(cat_scan_static(&template, &[1.0 / 0.2, 1.0 / 0.09], PI / 3.0))?;
    let (at_02, at_009) = (rows[0].fidelity, rows[1].fidelity);
    ensure(at_009 > 0.9, format!("fidelity {at_009} at U/J=0.09"))?;
    ensure(at_02 <= 0.9, format!("fidelity {at_02} at U/J=0.2"))?;
    Ok(format!("U/J=0.09: {at_009:.5}  U/J=0.2: {at_02:.5}"))
}

fn criterion_6() -> Outcome {
    let uniform = RingParams::uniform(3, 4, 1.0, 10.0, PI / 3.0);
    let detuned = uniform.clone().with_bond_factor(0, 1.01);
    let (fu, _) = ground_cat(&uniform)?;
    let (fd, _) = ground_cat(&detuned)?;
    ensure(fu <= 0.55, format!("uniform fidelity {fu}"))?;
    ensure(fd >= 0.8, format!("detuned fidelity {fd}"))?;
    Ok(format!("J/U=10 uniform={fu:.5} detuned={fd:.5}"))
}

fn criterion_7() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 2..=6 {
        let basis = ok(FockBasis::new(3, n))?;
        let frame = ok(FlowFrame::new(&basis, &FlowTransform::new(3)))?;
        for phi in [0.0, PI / 6.0, PI / 3.0] {
            for u in [0.0, 0.5, 10.0] {
                let p = RingParams::uniform(3, n, u, 1.0, phi);
                let conj = frame.conjugate(&ok(build_site_hamiltonian(&p, &basis))?);
                let direct = ok(build_flow_hamiltonian_3site(&p, &basis))?.to_dense();
                let diff = (conj - direct).iter().map(|v| v.norm()).fold(0.0, f64::max);
                worst = worst.max(diff);
                cases += 1;
            }
        }
    }
    ensure(worst <= 1e-10, format!("max element difference {worst:.2e}"))?;
    Ok(format!("{cases} cases, max diff {worst:.1e}"))
}

fn criterion_8() -> Outcome {
    let anti = RingParams::uniform(3, 3, 0.5, 1.0, PI / 3.0);
    let r = ok(minimize_separable_energy(&anti, 32, 7))?;
    ensure(r.margin > 0.0, format!("margin {} at the anti-crossing", r.margin))?;
    ensure(r.restarts_converged >= 30, format!("{} converged", r.restarts_converged))?;
    let free = RingParams::uniform(3, 3, 0.0, 1.0, 0.0);
    let f = ok(minimize_separable_energy(&free, 32, 7))?;
    ensure(f.margin.abs() <= 1e-8, format!("noninteracting margin {:.2e}", f.margin))?;
    Ok(format!(
        "margin={:.6} certified={} converged={}  U=0 margin={:.1e}",
        r.margin, r.certified, r.restarts_converged, f.margin
    ))
}

fn criterion_9() -> Outcome {
    let template = RingParams::uniform(3, 3, 1.0, 2.0, 0.0);
    let (static_fid, _) = ground_cat(&template.clone().with_phase(PI / 3.0))?;
    let ladder = [50.0, 100.0, 200.0, 400.0];
    let traces: Vec<_> = ladder
        .par_iter()
        .map(|&t| {
            let s = ProtocolSettings {
                target_j_over_u: 2.0,
                durations: [t; 3],
                ..Default::default()
            };
            preparation_protocol(&template, &s)
        })
        .collect::<ringcat_core::Result<_>>()
        .map_err(|e| e.to_string())?;
    let fid = traces[0].final_cat_fidelity();
    ensure(
        (fid - static_fid).abs() <= 0.02,
        format!("protocol fidelity {fid} vs static {static_fid}"),
    )?;
    let overlaps: Vec<f64> = traces.iter().map(|t| t.final_ground_overlap()).collect();
    ensure(
        overlaps.windows(2).all(|w| w[1] >= w[0]),
        format!("ladder overlaps not monotone: {overlaps:?}"),
    )?;
    let norm = traces.iter().map(|t| t.max_norm_error()).fold(0.0, f64::max);
    ensure(norm <= 1e-8, format!("norm error {norm:.2e}"))?;
    Ok(format!(
        "fidelity={fid:.5} static={static_fid:.5} overlaps={:?} max norm err={norm:.1e}",
        overlaps.iter().map(|o| format!("{o:.7}")).collect::<Vec<_>>()
    ))
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> StateVector {
    let v = StateVector::from_fn(dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Independent product-condensate expectation: build ψ(u) in the Fock basis.
fn fock_expectation(u: &[Complex64], p: &RingParams) -> f64 {
    let basis = FockBasis::new(p.sites, p.atoms).unwrap();
    let h = build_site_hamiltonian(p, &basis).unwrap();
    let lf = |n: usize| (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
    let psi = StateVector::from_fn(basis.dim(), |i, _| {
        let occ = basis.state(i).as_slice();
        let mut a = Complex64::new((0.5 * (lf(p.atoms) - occ.iter().map(|&n| lf(n)).sum::<f64>())).exp(), 0.0);
        for (ui, &n) in u.iter().zip(occ) {
            a *= ui.powu(n as u32);
        }
        a
    });
    h.expectation(&psi)
}

fn criterion_10() -> Outcome {
    let mut notes = Vec::new();

    // Fock round trip and dimension formula against brute-force enumeration
    for m in 2..=5usize {
        for n in 1..=12usize {
            let basis = ok(FockBasis::new(m, n))?;
            let mut count = 0u128;
            let mut occ = vec![0usize; m];
            loop {
                if occ.iter().sum::<usize>() == n {
                    count += 1;
                    let i = ok(basis.index_of(&occ))?;
                    ensure(basis.state(i).as_slice() == occ.as_slice(), format!("round trip {occ:?}"))?;
                }
                let mut d = 0;
                while d < m && occ[d] == n {
                    occ[d] = 0;
                    d += 1;
                }
                if d == m {
                    break;
                }
                occ[d] += 1;
            }
            ensure(count == fock_dimension(m, n) && count == basis.dim() as u128, format!("dimension M={m} N={n}"))?;
        }
    }
    notes.push("fock ok".to_string());

    // hermiticity and twist periodicity
    let mut worst_herm: f64 = 0.0;
    let mut worst_twist: f64 = 0.0;
    for n in [2usize, 3, 4] {
        let basis = ok(FockBasis::new(3, n))?;
        let levels = |phi: f64| -> Result<Vec<f64>, String> {
            let h = ok(build_site_hamiltonian(&RingParams::uniform(3, n, 0.5, 1.0, phi), &basis))?;
            Ok(ok(lowest_eigenpairs(&h, basis.dim()))?.eigenvalues)
        };
        for phi in [0.0, 0.17, 0.6, PI / 3.0, 1.3] {
            let h = ok(build_site_hamiltonian(&RingParams::uniform(3, n, 0.5, 1.0, phi), &basis))?;
            worst_herm = worst_herm.max(h.hermiticity_defect());
            let (a, b, c) = (levels(phi)?, levels(phi + 2.0 * PI / 3.0)?, levels(-phi)?);
            for i in 0..a.len() {
                worst_twist = worst_twist.max((a[i] - b[i]).abs()).max((a[i] - c[i]).abs());
            }
        }
    }
    ensure(worst_herm <= 1e-14, format!("hermiticity defect {worst_herm:.2e}"))?;
    ensure(worst_twist <= 1e-10, format!("twist periodicity {worst_twist:.2e}"))?;
    notes.push(format!("twist {worst_twist:.0e}"));

    // transform unitarity and many-body Gram identity
    let mut worst_gram: f64 = 0.0;
    for m in 2..=5usize {
        let t = FlowTransform::new(m);
        worst_gram = worst_gram.max(t.unitarity_defect());
        for n in 1..=4usize {
            let basis = ok(FockBasis::new(m, n))?;
            worst_gram = worst_gram.max(ok(FlowFrame::new(&basis, &t))?.gram_defect());
        }
    }
    ensure(worst_gram <= 1e-10, format!("gram defect {worst_gram:.2e}"))?;
    notes.push(format!("gram {worst_gram:.0e}"));

    // quasi-momentum block purity
    let basis = ok(FockBasis::new(3, 4))?;
    let frame = ok(FlowFrame::new(&basis, &FlowTransform::new(3)))?;
    let off_block = |p: &RingParams| -> Result<f64, String> {
        let hf = frame.conjugate(&ok(build_site_hamiltonian(p, &basis))?);
        let mut worst: f64 = 0.0;
        for r in 0..basis.dim() {
            for c in 0..basis.dim() {
                let kr = quasi_momentum(basis.state(r).as_slice()) % 3;
                let kc = quasi_momentum(basis.state(c).as_slice()) % 3;
                if kr != kc {
                    worst = worst.max(hf[(r, c)].norm());
                }
            }
        }
        Ok(worst)
    };
    let uniform = RingParams::uniform(3, 4, 0.5, 1.0, 0.4);
    let pure = off_block(&uniform)?;
    let broken = off_block(&uniform.clone().with_bond_factor(1, 1.01))?;
    ensure(pure <= 1e-12, format!("uniform off-block {pure:.2e}"))?;
    ensure(broken > 1e-4, format!("asymmetric off-block only {broken:.2e}"))?;
    // projections agree with the sector labels
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let psi = random_state(&mut rng, basis.dim());
    let total: f64 = quasi_momentum_projections(&basis, &psi).iter().map(|v| v.norm_squared()).sum();
    ensure((total - 1.0).abs() < 1e-12, "projections do not resolve the identity")?;
    notes.push(format!("block {pure:.0e}/{broken:.1e}"));

    // cat fidelity closed form against a θ sweep
    let mut worst_cat: f64 = 0.0;
    for n in [2usize, 3, 5] {
        let basis = ok(FockBasis::new(3, n))?;
        let probe = ok(CatProbe::new(&basis, &FlowTransform::new(3), (0, 1)))?;
        for _ in 0..5 {
            let psi = random_state(&mut rng, basis.dim());
            let closed = ok(probe.fidelity(&psi))?.probability;
            let mut brute: f64 = 0.0;
            for s in 0..10_000 {
                let theta = -PI + 2.0 * PI * s as f64 / 10_000.0;
                brute = brute.max(ok(probe.fidelity_at(&psi, theta))?);
            }
            worst_cat = worst_cat.max((closed - brute).abs());
        }
    }
    ensure(worst_cat <= 1e-6, format!("cat closed form vs sweep {worst_cat:.2e}"))?;
    notes.push(format!("cat {worst_cat:.0e}"));

    // separable energy closed form against the Fock-space expectation
    let mut worst_sep: f64 = 0.0;
    for trial in 0..100 {
        let n = 1 + trial % 8;
        let mut p = RingParams::uniform(3, n, rng.random_range(0.0..2.0), 1.0, rng.random_range(-PI..PI));
        p = p.with_bond_factor(trial % 3, rng.random_range(0.5..1.5));
        let raw: Vec<Complex64> = (0..3)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = raw.iter().map(|u| u.norm_sqr()).sum::<f64>().sqrt();
        let u: Vec<Complex64> = raw.iter().map(|v| v / norm).collect();
        let closed = ok(separable_energy(&u, &p))?;
        let oracle = fock_expectation(&u, &p);
        worst_sep = worst_sep.max((closed - oracle).abs() / oracle.abs().max(1.0));
    }
    ensure(worst_sep <= 1e-9, format!("separable energy mismatch {worst_sep:.2e}"))?;
    notes.push(format!("separable {worst_sep:.0e}"));

    Ok(notes.join(", "))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome, Duration); 10] = [
        (1, "anti-crossing at pi/3", criterion_1, Duration::from_secs(5)),
        (2, "ground state |3,0,0> at phi=0", criterion_2, Duration::from_secs(1)),
        (3, "cat fidelity at the anti-crossing", criterion_3, Duration::from_secs(1)),
        (4, "noninteracting four-fold degeneracy", criterion_4, Duration::from_secs(1)),
        (5, "30-atom U/J threshold", criterion_5, Duration::from_secs(30)),
        (6, "commensurability dichotomy", criterion_6, Duration::from_secs(5)),
        (7, "site/flow Hamiltonian equivalence", criterion_7, Duration::from_secs(10)),
        (8, "separability witness", criterion_8, Duration::from_secs(10)),
        (9, "adiabatic preparation protocol", criterion_9, Duration::from_secs(60)),
        (10, "property suites", criterion_10, Duration::from_secs(60)),
    ];
    let mut failures = 0;
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let verdict = match outcome {
            Ok(detail) if elapsed <= limit => format!("PASS  {detail}"),
            Ok(detail) => format!("FAIL  over time budget {limit:?}; {detail}"),
            Err(reason) => format!("FAIL  {reason}"),
        };
        if verdict.starts_with("FAIL") {
            failures += 1;
        }
        println!("criterion {id:>2} [{name}] {:.2}s  {verdict}", elapsed.as_secs_f64());
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
