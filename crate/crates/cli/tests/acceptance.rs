//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! A criterion listed in [`UNATTAINABLE`] is still evaluated and printed as
//! FAIL; the process only exits non-zero if some other criterion fails or a
//! listed one unexpectedly changes outcome.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use giant_cli::config::parse_config;
use giant_cli::experiments::Hygiene;
use giant_cli::{run_in_memory, Check, CsvTable, OutputSet};
use giant_core::lattice::{atom_population, build_hamiltonian, propagate, LatticeState};
use giant_core::lindblad::closed_form::misprinted;
use giant_core::lindblad::{
    bell_fidelity, build_liouvillian, evolve_density, fidelity_linear_estimate, one_excited,
    p1_closed, p2_closed, pt_eigenfrequencies, transmission_closed, PtPhase, TwoAtomRates,
};
use giant_core::model::{
    search_geometries, single_atom_coefficient, AtomGeometry, ExactCoefficient, GiantAtom,
    RateConstraint, RateTable, Topology, WaveguideConfig,
};

/// Criteria whose stated form is contradicted by exact enumeration.
const UNATTAINABLE: &[&str] = &["decoherence-free-interaction"];

const G: f64 = 0.05;

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn column(t: &CsvTable, name: &str) -> Vec<f64> {
    let c = t.column(name).unwrap();
    t.rows.iter().map(|r| r[c].parse().unwrap()).collect()
}

fn check_value(checks: &[Check], name: &str) -> f64 {
    checks.iter().find(|c| c.name == name).map(|c| c.value).unwrap_or(f64::NAN)
}

fn preset(text: &str) -> (OutputSet, Vec<Check>) {
    run_in_memory(&parse_config(text).unwrap()).unwrap()
}

fn exact_coefficient_table() -> Outcome {
    let mut bad = Vec::new();
    let expect = |n: u64| match n % 4 {
        2 => ExactCoefficient::ZERO,
        0 => ExactCoefficient::new(4, 0),
        1 => ExactCoefficient::new(2, 2),
        _ => ExactCoefficient::new(2, -2),
    };
    for n in 1..=11u64 {
        let a = single_atom_coefficient(n).unwrap();
        if a != expect(n) {
            bad.push(format!("N={n}: {a}"));
        }
    }
    // 2g²/ξ and g²(1±i)/ξ once materialized
    let four = single_atom_coefficient(4).unwrap().to_complex(G, 1.0);
    let three = single_atom_coefficient(3).unwrap().to_complex(G, 1.0);
    let materialized = four.re == 2.0 * G * G && four.im == 0.0 && three.re == G * G && three.im == -G * G;
    Outcome {
        id: "exact-coefficient-table",
        passed: bad.is_empty() && materialized,
        detail: format!(
            "N in {{2,6,10}} -> 0, {{4,8}} -> 2g^2/xi, N=1 mod 4 -> g^2(1+i)/xi, N=3 mod 4 -> g^2(1-i)/xi; mismatches: {}",
            if bad.is_empty() { "none".into() } else { bad.join("; ") }
        ),
    }
}

fn fig2a() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [3u64, 4] {
        let cfg = parse_config(&format!(
            "experiment=decay\ng=0.05\nn_sites=4000\nkappa=0.006\nseparations={n}\ntmax=150\ndt=0.005\nlattice_check_tmax=0"
        ))
        .unwrap();
        let start = Instant::now();
        let (out, _) = run_in_memory(&cfg).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let t = out.get(&format!("decay_N{n}.csv")).unwrap();
        let gap = column(t, "p_lattice")
            .iter()
            .zip(column(t, "p_markov"))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ok &= gap <= 0.03 && secs < 120.0;
        parts.push(format!("N={n}: max|P_lattice - P_markov| = {gap:.5} (<= 0.03), {secs:.1} s"));
    }
    let (_, checks) = preset("experiment=fig2a");
    let preset_ok = checks.iter().all(|c| c.passed);
    ok &= preset_ok;
    parts.push(format!("fig2a preset checks pass: {preset_ok}"));
    Outcome {
        id: "fig2a-reproduction",
        passed: ok,
        detail: parts.join("; "),
    }
}

fn fig2bc() -> Outcome {
    let (_, b) = preset("experiment=fig2b");
    let (_, c) = preset("experiment=fig2c");
    let margins: Vec<String> = [2, 6, 10]
        .iter()
        .map(|n| format!("N={n}: {:.4}", check_value(&b, &format!("long_time_margin_over_intrinsic_N{n}"))))
        .collect();
    let dip = check_value(&c, "min_margin_over_intrinsic_N2");
    Outcome {
        id: "fig2bc-crossing",
        passed: b.iter().all(|x| x.passed) && c.iter().all(|x| x.passed),
        detail: format!(
            "g=0.05: min over t in [500,4000] of P_lattice - exp(-gamma1 t) = {} (> 0); g=0.15, N=2: min over t of the same = {dip:.4} (< 0)",
            margins.join(", ")
        ),
    }
}

fn decoherence_free_interaction() -> (Outcome, bool) {
    let start = Instant::now();
    let dfc = search_geometries(&RateConstraint::named("dissipation-free-coupling").unwrap(), 20);
    let found = !dfc.is_empty() && dfc.iter().all(|g| g.topology == Topology::Braided);

    let all = search_geometries(&RateConstraint::default(), 20);
    let max_u12 = all.iter().map(|g| g.table.six_units()[5].abs()).max().unwrap();
    let worst = all.iter().find(|g| g.table.six_units()[5].abs() == max_u12).unwrap();
    let nested = RateTable::from_sites([0, 6], [1, 5]).unwrap().six_units();
    let bound_all = max_u12 <= 2;

    let df_atoms: RateConstraint = "g11=0,g22=0,u11=0,u22=0".parse().unwrap();
    let df = search_geometries(&df_atoms, 20);
    let bound_df = df.iter().all(|g| g.table.six_units()[5].abs() <= 2);
    let decoupled = df
        .iter()
        .filter(|g| g.topology != Topology::Braided)
        .all(|g| g.table.six_units()[5] == 0);
    let secs = start.elapsed().as_secs_f64();

    let fast = secs < 10.0;
    let passed = found && bound_all && decoupled && fast;
    // the documented failure: everything holds except the unrestricted bound
    let documented = found && !bound_all && bound_df && decoupled && fast;
    (
        Outcome {
            id: "decoherence-free-interaction",
            passed,
            detail: format!(
                "span<=20: {} dissipation-free braided couplings (all braided: {found}); max |U12| over all {} geometries = {max_u12} g^2/xi at {:?},{:?} ({}, bound 2 {}); nested (0,6),(1,5) has (G11,G22,G12,U11,U22,U12) = {nested:?}; max |U12| with both atoms decoherence-free <= 2: {bound_df}; separate/nested decoherence-free pairs have U12 = 0: {decoupled}; {secs:.2} s",
                dfc.len(),
                all.len(),
                worst.first,
                worst.second,
                worst.topology,
                if bound_all { "holds" } else { "violated" }
            ),
        },
        documented,
    )
}

fn crossings(t: &[f64], f: &[f64]) -> Vec<f64> {
    t.windows(2)
        .zip(f.windows(2))
        .filter(|(_, y)| y[0].signum() != y[1].signum())
        .map(|(x, y)| x[0] + (x[1] - x[0]) * y[0] / (y[0] - y[1]))
        .collect()
}

fn coupling_oracle() -> Outcome {
    let w = WaveguideConfig::new(10.0, 1.0, 6e-3, 4000).unwrap();
    let geom = AtomGeometry::pair(GiantAtom::new(10.0, G, [0, 2]), GiantAtom::new(10.0, G, [1, 3]))
        .unwrap()
        .centered(4000);
    let table = RateTable::from_sites([0, 2], [1, 3]).unwrap();
    let j = table.physical(G, 1.0).j_eff;
    let h = build_hamiltonian(&w, &geom, false).unwrap();
    let t: Vec<f64> = (0..=2000).map(|k| k as f64).collect();
    let states = propagate(&h, &LatticeState::atom_excited(4000, 2, 0), &t, 0.02).unwrap();
    let p1 = atom_population(&states, 0).unwrap();
    let p2 = atom_population(&states, 1).unwrap();
    let diff: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| a - b).collect();
    let c = crossings(&t, &diff);
    let period = if c.len() >= 2 {
        2.0 * (c[c.len() - 1] - c[0]) / (c.len() - 1) as f64
    } else {
        f64::NAN
    };
    let expected = PI / j;
    let rel = (period - expected).abs() / expected;
    Outcome {
        id: "coupling-oracle",
        passed: rel <= 0.05,
        detail: format!(
            "lattice exchange period {period:.1} vs pi/j_eff = {expected:.1} with j_eff = U12/2 = g^2/xi (rel. error {rel:.4}, <= 0.05); reading U12 = 4g^2/xi would predict {:.1}",
            expected / 2.0
        ),
    }
}

fn entanglement(hygiene: &mut Hygiene) -> Outcome {
    let j = RateTable::from_sites([0, 2], [1, 3]).unwrap().physical(G, 1.0).j_eff;
    let fid = |g1: f64, g2: f64, hy: &mut Hygiene| {
        let r = TwoAtomRates::exchange(j).with_intrinsic(g1 * j, g2 * j);
        let l = build_liouvillian(&r).unwrap();
        let rho = evolve_density(&l, &one_excited(0), &[0.0, PI / (4.0 * j)], None).unwrap();
        rho.iter().for_each(|x| hy.observe(x));
        bell_fidelity(&rho[1]).unwrap()
    };
    let ideal = fid(0.0, 0.0, hygiene);
    let noisy = fid(0.1, 0.2, hygiene);
    let linear = fidelity_linear_estimate(0.1, 0.2, 1.0);
    let scales = [0.1, 0.05, 0.025];
    let dev: Vec<f64> = scales
        .iter()
        .map(|&s| (fid(s, 2.0 * s, hygiene) - fidelity_linear_estimate(s, 2.0 * s, 1.0)).abs())
        .collect();
    let ratios = [dev[1] / dev[0], dev[2] / dev[1]];
    // the estimate is the first-order term: its error is second order
    let converges = dev[2] < dev[1] && dev[1] < dev[0] && ratios.iter().all(|r| (0.2..=0.3).contains(r));
    let slope: Vec<f64> = scales
        .iter()
        .map(|&s| (1.0 - fid(s, 2.0 * s, hygiene)) / s)
        .collect();
    let slope_target = PI / 8.0 + 2.0 * PI / 16.0;
    let passed = (1.0 - ideal).abs() <= 1e-8 && noisy >= 0.92 && converges;
    Outcome {
        id: "entanglement",
        passed,
        detail: format!(
            "|1 - F(0,0)| = {:.2e} (<= 1e-8); F_me(0.1 j, 0.2 j) = {noisy:.6} (>= 0.92), linear estimate {linear:.6}; |F_me - F_linear| at s = 0.1, 0.05, 0.025: {:.3e}, {:.3e}, {:.3e} (halving ratios {:.3}, {:.3}); (1 - F)/s = {:.5}, {:.5}, {:.5} -> {slope_target:.5}",
            (1.0 - ideal).abs(),
            dev[0], dev[1], dev[2], ratios[0], ratios[1], slope[0], slope[1], slope[2]
        ),
    }
}

fn closed_form_equivalence(hygiene: &mut Hygiene) -> Outcome {
    let j = G * G;
    let mut worst: f64 = 0.0;
    let (mut mis_p2, mut mis_t): (f64, f64) = (0.0, 0.0);
    let mut undefined = 0usize;
    let mut finite = true;
    for a in [0.0, 2.0, 4.0] {
        for b in [0.0, 2.0, 4.0] {
            let r = TwoAtomRates::individual(a * j, b * j, j);
            let l = build_liouvillian(&r).unwrap();
            let t: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05 / j).collect();
            let x = evolve_density(&l, &one_excited(0), &t, None).unwrap();
            let y = evolve_density(&l, &one_excited(1), &t, None).unwrap();
            for (k, &tk) in t.iter().enumerate() {
                let exact = [p1_closed(tk, &r), p2_closed(tk, &r), transmission_closed(tk, &r)];
                finite &= exact.iter().all(|v| v.is_finite());
                hygiene.observe(&x[k]);
                hygiene.observe(&y[k]);
                worst = worst
                    .max((exact[0] - x[k].excited_population(0)).abs())
                    .max((exact[1] - y[k].excited_population(1)).abs())
                    .max((exact[2] - x[k].excited_population(1)).abs());
                let m2 = (misprinted::p2_squared_denominator(tk, &r) - y[k].excited_population(1)).abs();
                let mt = (misprinted::transmission_linear_exponent(tk, &r) - x[k].excited_population(1)).abs();
                // a non-finite value at K = 0 counts as a failure of the variant
                undefined += !(m2.is_finite() && mt.is_finite()) as usize;
                if m2.is_finite() {
                    mis_p2 = mis_p2.max(m2);
                }
                if mt.is_finite() {
                    mis_t = mis_t.max(mt);
                }
            }
        }
    }
    Outcome {
        id: "closed-form-equivalence",
        passed: finite && worst <= 1e-6 && (mis_p2 > 1e-2 || undefined > 0) && (mis_t > 1e-2 || undefined > 0),
        detail: format!(
            "(Gamma11, Gamma22) in {{0,2,4}}^2 j_eff, t <= 10/j_eff: max closed-form vs master-equation gap {worst:.2e} (<= 1e-6); K^2-denominator P2 gap {mis_p2:.3e}, linear-K exponent T gap {mis_t:.3e} away from K = 0 (both must exceed 1e-2), non-finite at {undefined} points on K = 0"
        ),
    }
}

fn nonreciprocity(hygiene: &mut Hygiene) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (label, text) in [
        ("fig4 preset, (0,6),(1,5): (0, 2 j_eff)", "experiment=fig4"),
        ("(0, 4 j_eff), exceptional point", "experiment=nonreciprocal\ngamma22_j=4"),
    ] {
        let (out, checks) = preset(text);
        let t = out.get("nonreciprocal.csv").unwrap();
        let (p1, p2) = (column(t, "p1_me"), column(t, "p2_me"));
        let (tf, tb) = (column(t, "T_me_forward"), column(t, "T_me_backward"));
        let contrast = p1.iter().zip(&p2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let recip = tf.iter().zip(&tb).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ok &= contrast > 0.1 && recip <= 1e-8 && checks.iter().all(|c| c.passed);
        *hygiene = hygiene.merge(Hygiene {
            trace_drift: check_value(&checks, "trace_drift"),
            hermiticity: check_value(&checks, "hermiticity_residual"),
            min_eigenvalue: check_value(&checks, "min_eigenvalue"),
        });
        parts.push(format!(
            "{label}: max|P1 - P2| = {contrast:.4} (> 0.1), max|T_fwd - T_bwd| = {recip:.2e} (<= 1e-8)"
        ));
    }
    Outcome {
        id: "nonreciprocity",
        passed: ok,
        detail: parts.join("; "),
    }
}

fn pt_classification() -> Outcome {
    let j = 1.0;
    let mut grid: Vec<(f64, f64)> = (0..16).map(|k| (0.0, 0.5 * k as f64)).collect();
    grid.extend([(4.0, 0.0), (1.0, 5.0), (5.0, 1.0), (2.5, 6.5)]);
    let mut counts = [0usize; 3];
    let mut bad = Vec::new();
    for &(a, b) in &grid {
        let s = pt_eigenfrequencies(a, b, j);
        let k = (a - b) * (a - b) - 16.0 * j * j;
        let ok = if k < 0.0 {
            counts[0] += 1;
            s.phase == PtPhase::Symmetric && (s.plus.im - s.minus.im).abs() < 1e-12
        } else if k > 0.0 {
            counts[2] += 1;
            s.phase == PtPhase::Broken && s.plus.re == 0.0 && s.minus.re == 0.0
        } else {
            counts[1] += 1;
            s.phase == PtPhase::ExceptionalPoint && s.plus == s.minus
        };
        if !ok {
            bad.push(format!("({a},{b})"));
        }
    }
    Outcome {
        id: "pt-classification",
        passed: bad.is_empty() && grid.len() == 20 && counts.iter().all(|&c| c > 0),
        detail: format!(
            "{} points: {} symmetric, {} exceptional (|Delta| = 4J), {} broken; mismatches: {}",
            grid.len(),
            counts[0],
            counts[1],
            counts[2],
            if bad.is_empty() { "none".into() } else { bad.join(" ") }
        ),
    }
}

fn integrator_hygiene(h: &Hygiene) -> Outcome {
    let w = WaveguideConfig::new(10.0, 1.0, 0.0, 4000).unwrap();
    let geom = AtomGeometry::pair(GiantAtom::new(10.0, G, [0, 2]), GiantAtom::new(10.0, G, [1, 3]))
        .unwrap()
        .centered(4000);
    let ham = build_hamiltonian(&w, &geom, false).unwrap();
    let t: Vec<f64> = (0..=20).map(|k| 10.0 * k as f64).collect();
    let states = propagate(&ham, &LatticeState::atom_excited(4000, 2, 0), &t, 0.02).unwrap();
    let drift = states
        .iter()
        .skip(1)
        .map(|s| (s.norm_sqr() - 1.0).abs() / s.time)
        .fold(0.0, f64::max);
    Outcome {
        id: "integrator-hygiene",
        passed: h.trace_drift < 1e-9 && h.hermiticity < 1e-12 && h.min_eigenvalue >= -1e-9 && drift < 1e-9,
        detail: format!(
            "master equation: trace drift {:.2e} (< 1e-9), Hermiticity residual {:.2e} (< 1e-12), min eigenvalue {:.2e} (>= -1e-9); lattice kappa=0 norm drift {drift:.2e} per unit xi t (< 1e-9)",
            h.trace_drift, h.hermiticity, h.min_eigenvalue
        ),
    }
}

fn main() -> ExitCode {
    let mut hygiene = Hygiene::default();
    let mut outcomes = vec![exact_coefficient_table(), fig2a(), fig2bc()];
    let (dfi, documented) = decoherence_free_interaction();
    outcomes.push(dfi);
    outcomes.push(coupling_oracle());
    outcomes.push(entanglement(&mut hygiene));
    outcomes.push(closed_form_equivalence(&mut hygiene));
    outcomes.push(nonreciprocity(&mut hygiene));
    outcomes.push(pt_classification());
    outcomes.push(integrator_hygiene(&hygiene));

    let mut unexpected = 0;
    for o in &outcomes {
        let listed = UNATTAINABLE.contains(&o.id);
        let tag = match (o.passed, listed) {
            (true, _) => "PASS",
            (false, true) => "FAIL (documented)",
            (false, false) => "FAIL",
        };
        println!("{tag} {}: {}", o.id, o.detail);
        if listed {
            if o.passed || !documented {
                unexpected += 1;
            }
        } else if !o.passed {
            unexpected += 1;
        }
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!(
        "acceptance: {passed}/{} criteria pass; {} documented as unattainable; {unexpected} unexpected",
        outcomes.len(),
        outcomes.iter().filter(|o| !o.passed && UNATTAINABLE.contains(&o.id)).count()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
