use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eneon::dynamics::{generate_protocol, run_protocol, DecoherenceParams, QubitParams, Sampling, Sweep};
use eneon::inout::avoided_crossing_map;
use eneon::quantum1d::{build_y_potential, default_y_grid, solve_schrodinger_1d, TrapSolver};
use eneon::units::ELECTRON_MASS;
use eneon::{ResonatorParams, TrapParams};

fn eigensolver(c: &mut Criterion) {
    let trap = TrapParams::default();
    let v = build_y_potential(&trap, 516.0, &default_y_grid()).unwrap();
    let mut group = c.benchmark_group("tridiagonal");
    for n in [2, 3, 6] {
        group.bench_with_input(BenchmarkId::new("lowest_states", n), &n, |b, &n| {
            b.iter(|| solve_schrodinger_1d(black_box(&v), ELECTRON_MASS, n).unwrap())
        });
    }
    group.finish();
}

fn transmission_map(c: &mut Criterion) {
    let res = ResonatorParams::default();
    let solver = TrapSolver {
        trap: TrapParams::default(),
        grid: default_y_grid(),
        mass_kg: ELECTRON_MASS,
        f_r_ghz: res.f_r_ghz,
    };
    let v_c = solver.voltage_for_f01(res.f_r_ghz, 339.0, 539.0).unwrap();
    let voltages: Vec<f64> = (-20..=20).map(|k| v_c + k as f64 * 0.05).collect();
    let f_q: Vec<f64> = voltages.iter().map(|&v| solver.f01(v).unwrap()).collect();
    let df: Vec<f64> = (-300..=300).map(|k| k as f64 * 0.05).collect();
    // linear interpolation of the precomputed qubit line keeps the eigensolver out of the loop
    let lookup = |v: f64| {
        let x = (v - voltages[0]) / 0.05;
        let i = (x.floor() as usize).min(voltages.len() - 2);
        Ok(f_q[i] + (x - i as f64) * (f_q[i + 1] - f_q[i]))
    };
    c.bench_function("s21_map_41x601", |b| {
        b.iter(|| avoided_crossing_map(black_box(&voltages), &df, lookup, 3.5, 1.7, &res).unwrap())
    });
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_protocol");
    group.sample_size(10);
    let deco = DecoherenceParams {
        t1_us: Some(15.0),
        pink_amplitude_mhz: 1.0,
        white_dephasing_mhz: 1.0,
        ..Default::default()
    };
    let qubit = QubitParams::new(6.426, deco);
    let echo = generate_protocol("echo", 200.0, 6.426, Sweep::new(0.0, 800.0, 8.0).unwrap()).unwrap();
    group.bench_function("echo_pink_200", |b| {
        b.iter(|| run_protocol(&echo, &qubit, &Sampling::default(), 200, 1).unwrap())
    });
    let ramsey = generate_protocol("ramsey", 200.0, 6.426, Sweep::new(0.0, 150.0, 1.5).unwrap()).unwrap();
    let static_qubit = QubitParams::new(
        6.426,
        DecoherenceParams {
            quasi_static_sigma_mhz: 4.5,
            ..Default::default()
        },
    );
    group.bench_function("ramsey_static_1000", |b| {
        b.iter(|| run_protocol(&ramsey, &static_qubit, &Sampling::default(), 1000, 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, eigensolver, transmission_map, monte_carlo);
criterion_main!(benches);
