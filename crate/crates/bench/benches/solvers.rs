use std::hint::black_box;

use chwave::newton::{guess_for, newton_linesearch, GuessKind};
use chwave::reduced::solve_reduced;
use chwave::tens::{random_initial, Stepper};
use chwave::{compute_spectrum, Model, NewtonConfig, ProblemParams, StabilityOptions, TensConfig};
use chwave_bench::{a2_params, converged_wave, spike_params};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn newton(c: &mut Criterion) {
    let mut g = c.benchmark_group("newton_full_a2");
    g.sample_size(10);
    let prm = a2_params();
    for n in [128usize, 256] {
        let guess = guess_for(GuessKind::A2, &prm, n).unwrap().values;
        g.bench_with_input(BenchmarkId::from_parameter(n), &guess, |b, guess| {
            b.iter(|| newton_linesearch(black_box(guess), &prm, Model::Full, &NewtonConfig::default(), GuessKind::A2).unwrap())
        });
    }
    g.finish();
}

fn shooting(c: &mut Criterion) {
    let prm = ProblemParams::new(0.7, 0.12, 1.0);
    c.bench_function("shoot_reduced_512", |b| b.iter(|| solve_reduced(black_box(&prm), 512).unwrap()));
}

fn time_steps(c: &mut Criterion) {
    let mut g = c.benchmark_group("tens_1000_steps");
    let prm = spike_params();
    for n in [128usize, 256] {
        let stepper = Stepper::new(&prm, n, TensConfig::default().dt).unwrap();
        let init = random_initial(&prm, n, 0.1, 0).unwrap();
        let coeffs = stepper.fourier().forward(&init.values);
        g.bench_with_input(BenchmarkId::from_parameter(n), &coeffs, |b, coeffs| {
            b.iter(|| {
                let mut c = coeffs.clone();
                for _ in 0..1000 {
                    stepper.advance(&mut c);
                }
                c
            })
        });
    }
    g.finish();
}

fn spectrum(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectrum");
    g.sample_size(10);
    for n in [128usize, 256] {
        let w = converged_wave(&spike_params(), GuessKind::A1, n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &w.profile, |b, p| {
            b.iter(|| compute_spectrum(black_box(p), 5e-4, &StabilityOptions::default()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, newton, shooting, time_steps, spectrum);
criterion_main!(benches);
