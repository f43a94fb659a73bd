//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use floquet_junction::config::TableRow;
use floquet_junction::semiclassical::{
    integrate_trajectory, measured_frequency, stability_grid, GridSpec, SemiclassicalParams, StabilityGrid,
};
use floquet_junction::spectrum::{
    check_printed_coe, fold_into_zone, ks_distance, poisson_cdf, poisson_density, poisson_mean,
    quasienergies, sample_coe_reference, RatioSample, Reference, COE_QUADRATURE_CUTOFF,
};
use floquet_junction::*;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

const SEED: u64 = 2024;

struct Check {
    label: String,
    pass: bool,
}

fn check(label: impl Into<String>, pass: bool) -> Check {
    Check { label: label.into(), pass }
}

struct Report {
    failed: Vec<usize>,
}

impl Report {
    fn criterion(&mut self, id: usize, title: &str, checks: Vec<Check>) {
        let pass = checks.iter().all(|c| c.pass);
        println!("{} criterion {id}: {title}", if pass { "PASS" } else { "FAIL" });
        for c in &checks {
            println!("       [{}] {}", if c.pass { "ok" } else { "x " }, c.label);
        }
        if !pass {
            self.failed.push(id);
        }
    }
}

fn info(text: impl AsRef<str>) {
    println!("       info: {}", text.as_ref());
}

#[derive(Clone, Copy)]
enum Landscape {
    Table(TableRow),
    Formula(ProfileKind),
}

fn config(landscape: Landscape, w: f64, realizations: usize, init: usize) -> ModelConfig {
    let mut c = ModelConfig::default();
    match landscape {
        Landscape::Table(row) => {
            c.potential.profile = ProfileKind::Table;
            c.potential.table_row = row;
        }
        Landscape::Formula(kind) => c.potential.profile = kind,
    }
    c.disorder.w_in_j = w;
    c.disorder.realizations = realizations;
    c.disorder.seed = SEED;
    c.run.init_site = init;
    c
}

fn averaged(c: &ModelConfig) -> ObservableSeries {
    let r = c.resolve().unwrap();
    let request = DynamicsRequest {
        initial_site: c.run.init_site,
        samples: c.sample_times(),
        step: r.model.period() / c.run.steps_per_period as f64,
        pairs: Vec::new(),
        keep_realizations: false,
    };
    run_dynamics_ensemble(&r.model, &r.basis, &r.disorder, &request).unwrap().averaged.unwrap()
}

fn pooled(c: &ModelConfig) -> RatioSample {
    let r = c.resolve().unwrap();
    run_spectrum_ensemble(&r.model, &r.basis, &r.disorder, c.run.steps_per_period).unwrap().pooled.unwrap()
}

fn static_chain(offsets: &[f64], couplings: &[f64]) -> JunctionModel {
    let n = offsets.len();
    let chain = ChainSpec::new(couplings.to_vec(), 0.0, 1).unwrap();
    let mut drive = DriveSpec::cosine(n, 0.0, 0.0, 1.0).unwrap();
    drive.spatial_profile = vec![0.0; n];
    let potential = PotentialSpec { static_offsets: offsets.to_vec(), rotating_frame: 0.0 };
    JunctionModel::new(chain, drive, potential).unwrap()
}

fn c1_drive_frequency(report: &mut Report) {
    let c = ModelConfig::default();
    let f = c.drive_frequency_mhz().unwrap();
    let period = c.resolve().unwrap().model.period();
    report.criterion(1, "resonant drive frequency and period", vec![
        check(format!("ω/2π = {f:.4} MHz (target 19.67 ± 0.01)"), (f - 19.67).abs() <= 0.01),
        check(format!("T = {period:.4} ns (target 50.84 ± 0.01)"), (period - 50.84).abs() <= 0.01),
    ]);
}

fn c2_numerics(report: &mut Report) {
    let c = ModelConfig::default();
    let r = c.resolve().unwrap();
    let started = Instant::now();
    let p = Propagator::new(&r.model, &r.basis);
    let f = p.floquet_operator(c.run.steps_per_period).unwrap();
    let traj = p
        .evolve_state(&r.basis.fock_state(c.run.init_site).unwrap(), &c.sample_times(), r.model.period() / c.run.steps_per_period as f64)
        .unwrap();
    let series = ObservableSeries::from_trajectory(&traj, &r.basis, &[]).unwrap();
    let runtime = started.elapsed().as_secs_f64();

    let unitarity = f.unitary.unitarity_error();
    let norm = traj.states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max);
    let number = series.populations.iter().map(|p| (p.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    let herm = (0..200)
        .map(|k| hamiltonian_at(k as f64 * r.model.period() / 200.0, &r.model, &r.basis).hermiticity_error())
        .fold(0.0, f64::max);

    let diffs: Vec<f64> = [256usize, 512, 1024]
        .iter()
        .map(|&k| {
            let a = p.floquet_operator(k).unwrap();
            let b = p.floquet_operator(2 * k).unwrap();
            linalg::max_abs_diff(a.unitary.matrix(), b.unitary.matrix())
        })
        .collect();
    let slopes: Vec<f64> = diffs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let slope = slopes.iter().sum::<f64>() / slopes.len() as f64;

    report.criterion(2, "unitarity, conservation, Hermiticity, convergence, runtime", vec![
        check(format!("Floquet unitarity error {unitarity:.2e} < 1e-10"), unitarity < 1e-10),
        check(format!("norm drift {norm:.2e} < 1e-9"), norm < 1e-9),
        check(format!("excitation-number drift {number:.2e} < 1e-9"), number < 1e-9),
        check(format!("Hermiticity error {herm:.2e} < 1e-12"), herm < 1e-12),
        check(format!("step-doubling slope {slope:.4} in [1.8, 2.2] (diffs {})", diffs.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>().join(", ")), (1.8..=2.2).contains(&slope)),
        check(format!("driven run {runtime:.2} s < 60 s"), runtime < 60.0),
    ]);
}

fn c3_oracles(report: &mut Report) {
    let j = units::mhz_to_angular(11.5);
    let model = static_chain(&[0.0, 0.0], &[j]);
    let basis = SectorBasis::new(2, 1, 1).unwrap();
    let samples: Vec<f64> = (0..=600).map(|k| 3.0 * (PI / j) * k as f64 / 600.0).collect();
    let traj = evolve_state(&model, &basis, &basis.fock_state(1).unwrap(), &samples, 0.5).unwrap();
    let rabi = samples
        .iter()
        .zip(&traj.states)
        .map(|(t, s)| (s.amplitudes[1].norm_sqr() - (j * t).sin().powi(2)).abs())
        .fold(0.0, f64::max);

    let offsets = [units::mhz_to_angular(7.0), units::mhz_to_angular(-3.0), units::mhz_to_angular(12.0)];
    let couplings = [j, units::mhz_to_angular(9.2)];
    let model = static_chain(&offsets, &couplings);
    let basis = SectorBasis::new(3, 1, 1).unwrap();
    let samples: Vec<f64> = (0..=150).map(|k| k as f64).collect();
    let traj = evolve_state(&model, &basis, &basis.fock_state(1).unwrap(), &samples, 0.5).unwrap();
    let h = DMatrix::from_row_slice(3, 3, &[
        offsets[0], couplings[0], 0.0,
        couplings[0], offsets[1], couplings[1],
        0.0, couplings[1], offsets[2],
    ]);
    let eig = SymmetricEigen::new(h);
    let mut three = 0.0f64;
    for (t, s) in samples.iter().zip(&traj.states) {
        for site in 0..3 {
            let amp: Complex64 = (0..3)
                .map(|k| eig.eigenvectors[(site, k)] * eig.eigenvectors[(0, k)] * Complex64::from_polar(1.0, -eig.eigenvalues[k] * t))
                .sum();
            three = three.max((amp.norm_sqr() - s.amplitudes[site].norm_sqr()).abs());
        }
    }
    report.criterion(3, "analytic and exact-diagonalization oracles", vec![
        check(format!("two-site Rabi max error {rabi:.2e} < 1e-8 over 3 periods"), rabi < 1e-8),
        check(format!("three-site populations max error {three:.2e} < 1e-8"), three < 1e-8),
    ]);
}

fn c4_static_floquet(report: &mut Report) {
    let mut checks = Vec::new();
    for sector in [1usize, 2] {
        let mut c = ModelConfig::default();
        c.drive.ac_in_j = 0.0;
        c.chain.sector = sector;
        let r = c.resolve().unwrap();
        let omega = r.model.drive.angular_frequency;
        let q = quasienergies(&floquet_operator(&r.model, &r.basis, 8).unwrap()).unwrap();
        let h = hamiltonian_at(0.0, &r.model, &r.basis).matrix;
        let worst = SymmetricEigen::new(h)
            .eigenvalues
            .iter()
            .map(|&e| {
                let e = fold_into_zone(e, omega);
                q.values
                    .iter()
                    .map(|x| {
                        let d = (x - e).rem_euclid(omega);
                        d.min(omega - d)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        checks.push(check(format!("n = {sector}: max |ε − fold(E)| = {worst:.2e} < 1e-8"), worst < 1e-8));
    }
    report.criterion(4, "undriven quasienergies equal folded eigenvalues", checks);
}

fn c5_reference_statistics(report: &mut Report) {
    let quad = quadrature::integrate(|r| r * poisson_density(r).unwrap(), 0.0, 1.0, 1e-13);
    let exact = 2.0 * 2f64.ln() - 1.0;
    let coe = sample_coe_reference(50, 500, ModelConfig::default().spectrum.coe_seed).unwrap();
    let coe_mean = coe.mean().unwrap();
    let coe_decile = coe.mass_in(0.0, 0.1);
    let poisson_decile = poisson_cdf(0.1);
    let printed = check_printed_coe(COE_QUADRATURE_CUTOFF);
    let documented = !printed.valid && (printed.normalization - 1.0).abs() > 1.0 && printed.min_density < 0.0;
    report.criterion(5, "Poisson and COE reference statistics", vec![
        check(format!("Poisson mean by quadrature {quad:.12} vs 2ln2−1 = {exact:.12}"), (quad - exact).abs() < 1e-10 && (poisson_mean() - exact).abs() < 1e-12),
        check(format!("COE (dim 50 × 500) mean r = {coe_mean:.4} in [0.51, 0.54]"), (0.51..=0.54).contains(&coe_mean)),
        check(format!("COE mass below 0.1 = {coe_decile:.4} < Poisson {poisson_decile:.4}"), coe_decile < poisson_decile),
        check(
            format!(
                "printed COE density: normalization on [{:.0e}, 1] = {:.3}, min density {:.3e}; {}",
                printed.r_min,
                printed.normalization,
                printed.min_density,
                if printed.valid { "valid" } else { "not a density, treated as a typo; sampled COE used as reference" }
            ),
            printed.valid || documented,
        ),
    ]);
}

fn c6_level_statistics(report: &mut Report) {
    let coe = sample_coe_reference(50, 500, ModelConfig::default().spectrum.coe_seed).unwrap();
    let stats = |landscape| {
        [3.0, 10.0].map(|w| {
            let s = pooled(&config(landscape, w, 200, 3));
            let ks_p = ks_distance(&s, &Reference::Poisson).unwrap();
            let ks_c = ks_distance(&s, &Reference::Sample(&coe)).unwrap();
            (s.mean().unwrap(), ks_p, ks_c, s.len())
        })
    };
    let [weak, strong] = stats(Landscape::Table(TableRow::Flat));
    let gap = weak.0 - strong.0;
    report.criterion(6, "disorder-driven crossover in gap-ratio statistics (n = 1, R = 200)", vec![
        check(format!("mean r: W=3J {:.4}, W=10J {:.4}, difference {gap:.4} ≥ 0.06", weak.0, strong.0), gap >= 0.06),
        check(format!("W=3J closer to COE (KS Poisson {:.4}, COE {:.4})", weak.1, weak.2), weak.2 < weak.1),
        check(format!("W=10J closer to Poisson (KS Poisson {:.4}, COE {:.4})", strong.1, strong.2), strong.1 < strong.2),
    ]);
    info(format!("ratios pooled per disorder strength: {} / {}", weak.3, strong.3));
    let [fw, fs] = stats(Landscape::Formula(ProfileKind::Flat));
    info(format!(
        "closed-form flat landscape: W=3J mean {:.4} (KS P {:.4}, C {:.4}); W=10J mean {:.4} (KS P {:.4}, C {:.4}); difference {:.4}",
        fw.0, fw.1, fw.2, fs.0, fs.1, fs.2, fw.0 - fs.0
    ));
}

fn c7_single_realization_transport(report: &mut Report) {
    let cos0 = averaged(&config(Landscape::Table(TableRow::Cosine), 0.0, 1, 3));
    let flat0 = averaged(&config(Landscape::Table(TableRow::Flat), 0.0, 1, 3));
    let cos5 = averaged(&config(Landscape::Table(TableRow::Cosine), 5.0, 1, 3));
    let flat5 = averaged(&config(Landscape::Table(TableRow::Flat), 5.0, 1, 3));
    let (n8, n11) = (cos0.max_population(8), cos0.max_population(11));
    let n12 = flat0.max_population(12);
    let right = |s: &ObservableSeries| s.time_averaged_population(9..=12);
    report.criterion(7, "transport across the junction, t ∈ [0, 150] ns", vec![
        check(format!("cosine, W=0: max n8 = {n8:.4} ≥ 3 × max n11 = {:.4}", 3.0 * n11), n8 >= 3.0 * n11),
        check(format!("flat, W=0: max n12 = {n12:.4} > 0.05"), n12 > 0.05),
        check(format!("cosine, W=5J seed {SEED}: ⟨n9..12⟩ {:.5} < W=0 {:.5}", right(&cos5), right(&cos0)), right(&cos5) < right(&cos0)),
        check(format!("flat, W=5J seed {SEED}: ⟨n9..12⟩ {:.5} < W=0 {:.5}", right(&flat5), right(&flat0)), right(&flat5) < right(&flat0)),
    ]);
    for kind in [ProfileKind::Cosine, ProfileKind::Flat] {
        let a = averaged(&config(Landscape::Formula(kind), 0.0, 1, 3));
        let b = averaged(&config(Landscape::Formula(kind), 5.0, 1, 3));
        info(format!(
            "closed-form {kind:?}: max n8 {:.4}, n11 {:.4}, n12 {:.4}; ⟨n9..12⟩ W=0 {:.5}, W=5J {:.5}",
            a.max_population(8),
            a.max_population(11),
            a.max_population(12),
            right(&a),
            right(&b)
        ));
    }
}

const GOLDEN_INIT3_W3: f64 = 0.215906659958;
const GOLDEN_INIT3_W10: f64 = 0.064670728087;
const GOLDEN_INIT9_W3: f64 = 0.154287860878;

fn c8_ensemble_transport(report: &mut Report) {
    let run = |w, init| averaged(&config(Landscape::Table(TableRow::Flat), w, 50, init));
    let right3 = run(3.0, 3).time_averaged_population(7..=12);
    let right10 = run(10.0, 3).time_averaged_population(7..=12);
    let left3 = run(3.0, 9).time_averaged_population(1..=6);
    let golden = [(right3, GOLDEN_INIT3_W3), (right10, GOLDEN_INIT3_W10), (left3, GOLDEN_INIT9_W3)];
    let pinned = golden.iter().all(|(v, g)| (v - g).abs() < 1e-6);
    report.criterion(8, "disorder-averaged transport (R = 50)", vec![
        check(format!("start 3: ⟨n7..12⟩ W=3J {right3:.6} > W=10J {right10:.6}"), right3 > right10),
        check(format!("start 9, W=3J: ⟨n1..6⟩ {left3:.6} < 0.25"), left3 < 0.25),
        check(format!("golden values {:?} reproduced to 1e-6 ({right3:.12}, {right10:.12}, {left3:.12})", golden.map(|g| g.1)), pinned),
    ]);
    let f = |w, init, sites: std::ops::RangeInclusive<usize>| {
        averaged(&config(Landscape::Formula(ProfileKind::Flat), w, 50, init)).time_averaged_population(sites)
    };
    info(format!(
        "closed-form flat: start 3 ⟨n7..12⟩ W=3J {:.4}, W=10J {:.4}; start 9 ⟨n1..6⟩ W=3J {:.4}",
        f(3.0, 3, 7..=12),
        f(10.0, 3, 7..=12),
        f(3.0, 9, 1..=6)
    ));
}

fn lowest_tongue_row(grid: &StabilityGrid, target: f64) -> Option<(usize, usize)> {
    (0..grid.delta1.len()).find_map(|j| {
        (0..grid.omega.len())
            .filter(|&k| !grid.stable[j][k] && (grid.omega[k] - target).abs() <= 0.1 * target)
            .min_by(|&a, &b| (grid.omega[a] - target).abs().total_cmp(&(grid.omega[b] - target).abs()))
            .map(|k| (j, k))
    })
}

fn c9_semiclassical(report: &mut Report) {
    let c = ModelConfig::default();
    let j = c.chain.coupling_mhz;
    let params = SemiclassicalParams::from_mhz(12, 3.0 * j, 3.0 * j, c.drive_frequency_mhz().unwrap(), j).unwrap();
    let omega = params.small_oscillation_frequency();
    let free = params.with_drive(params.angular_frequency, 0.0);
    let traj = integrate_trajectory(TAU + 1e-3, 0.0, 40.0 * TAU / omega, TAU / omega / 400.0, &free).unwrap();
    let measured = measured_frequency(&traj).unwrap();
    let rel = (measured - omega).abs() / omega;

    let grid = stability_grid(&params, &GridSpec::default_for(&params)).unwrap();
    let cell_width = grid.omega[1] - grid.omega[0];
    let mut checks = vec![
        check(format!("small-oscillation frequency measured {measured:.6} vs {omega:.6} rad/ns (rel {rel:.1e} < 1e-3)"), rel < 1e-3),
        check("Δ₁ = 0 row stable everywhere".to_string(), grid.stable[0].iter().all(|&s| s)),
    ];
    for m in 1..=3u32 {
        let target = 2.0 * omega / m as f64;
        let hit = lowest_tongue_row(&grid, target);
        let label = match hit {
            Some((jj, k)) => format!(
                "m = {m}: tongue opens at Δ₁ = {:.2}Δ₀, ω = {:.4}Ω, {:.2} cells from 2Ω/m",
                grid.delta1[jj] / params.dc_amplitude,
                grid.omega[k] / omega,
                (grid.omega[k] - target).abs() / cell_width
            ),
            None => format!("m = {m}: no instability near 2Ω/m"),
        };
        let ok = hit.is_some_and(|(jj, k)| {
            grid.delta1[jj] <= 0.5 * params.dc_amplitude + 1e-12 && (grid.omega[k] - target).abs() <= cell_width + 1e-12
        });
        checks.push(check(label, ok));
    }
    checks.push(check(format!("max det error {:.1e} ≤ 1e-8", grid.max_det_error), grid.max_det_error <= 1e-8));
    let k = grid.nearest_omega(params.angular_frequency);
    let jj = grid.nearest_delta1(params.ac_amplitude);
    let (tr, stable) = grid.cell(k, jj);
    checks.push(check(
        format!(
            "operating point ω = {:.4}Ω, Δ₁ = Δ₀: |tr M| = {tr:.3} ({}), unstable cell within one cell: {}",
            params.angular_frequency / omega,
            if stable { "stable" } else { "unstable" },
            grid.unstable_near(k, jj)
        ),
        !stable || grid.unstable_near(k, jj),
    ));
    report.criterion(9, "semiclassical stability map", checks);
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn c10_determinism(report: &mut Report) {
    let runs = [
        vec!["ensemble", "--disorder-w", "5", "--realizations", "16", "--keep-realizations"],
        vec!["spectrum", "--disorder-w", "3", "--realizations", "16"],
    ];
    let mut checks = Vec::new();
    for args in runs {
        let dirs: Vec<_> = [1usize, 4]
            .iter()
            .map(|&workers| {
                let dir = tempfile::tempdir().unwrap();
                let status = Command::new(env!("CARGO_BIN_EXE_junction"))
                    .args(&args)
                    .arg("--out")
                    .arg(dir.path())
                    .env("JUNCTION_WORKERS", workers.to_string())
                    .stdout(std::process::Stdio::null())
                    .status()
                    .unwrap();
                assert!(status.success());
                dir
            })
            .collect();
        let (a, b) = (outputs(dirs[0].path()), outputs(dirs[1].path()));
        checks.push(check(format!("{}: {} files byte-identical with 1 and 4 workers", args[0], a.len()), !a.is_empty() && a == b));
    }
    report.criterion(10, "worker-count independence", checks);
}

fn main() {
    let started = Instant::now();
    let mut report = Report { failed: Vec::new() };
    c1_drive_frequency(&mut report);
    c2_numerics(&mut report);
    c3_oracles(&mut report);
    c4_static_floquet(&mut report);
    c5_reference_statistics(&mut report);
    c6_level_statistics(&mut report);
    c7_single_realization_transport(&mut report);
    c8_ensemble_transport(&mut report);
    c9_semiclassical(&mut report);
    c10_determinism(&mut report);
    println!("acceptance: {} of 10 criteria passed in {:.1} s", 10 - report.failed.len(), started.elapsed().as_secs_f64());
    if !report.failed.is_empty() {
        println!("acceptance: failing criteria {:?}", report.failed);
        std::process::exit(1);
    }
}
