use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qtfa::ridges::{mask_outside, DEFAULT_MIN_LEN, DEFAULT_THRESHOLD};
use qtfa::{
    extract_ridges, make_wavelet, make_window, quaternion_embed, ridge_profile, stokes_grid, Lift, Qcwt, QftPlan, Qstft, ScaleGrid,
    WindowKind,
};
use qtfa_bench::{chirp, hyperbolic};

fn qft(c: &mut Criterion) {
    let mut group = c.benchmark_group("qft");
    for n in [256usize, 1024, 4096, 1000] {
        let f = chirp(n);
        let plan = QftPlan::new(n);
        group.bench_with_input(BenchmarkId::new("forward", n), &f, |b, f| {
            b.iter(|| plan.forward(black_box(&f.samples)))
        });
    }
    group.finish();
}

fn embedding(c: &mut Criterion) {
    let (f, _) = hyperbolic();
    c.bench_function("embed/1024", |b| b.iter(|| quaternion_embed(black_box(&f))));
}

fn stft(c: &mut Criterion) {
    let (f, fp) = hyperbolic();
    let mut group = c.benchmark_group("stft");
    for hop in [1usize, 8] {
        let t = Qstft::new(make_window(WindowKind::Hann, 101, None).unwrap(), hop).unwrap();
        group.bench_function(BenchmarkId::new("forward_hann101", hop), |b| {
            b.iter(|| t.forward(black_box(&fp)).unwrap())
        });
    }
    let t = Qstft::new(make_window(WindowKind::Hann, 101, None).unwrap(), 1).unwrap();
    let grid = t.forward(&fp).unwrap();
    group.bench_function("inverse_hann101", |b| b.iter(|| t.inverse(black_box(&grid)).unwrap()));
    group.bench_function("lifted_hann101", |b| {
        b.iter(|| t.forward_complex(black_box(&f), Lift::Embed).unwrap())
    });
    group.finish();
}

fn cwt(c: &mut Criterion) {
    let (f, fp) = hyperbolic();
    let psi = make_wavelet(5.0).unwrap();
    let mut group = c.benchmark_group("cwt");
    for voices in [8usize, 16, 32] {
        let t = Qcwt::new(psi, ScaleGrid::for_record(&psi, f.len(), f.dt, voices).unwrap());
        group.bench_function(BenchmarkId::new("forward_morlet5", voices), |b| {
            b.iter(|| t.forward(black_box(&fp)))
        });
    }
    group.finish();
}

fn ridges(c: &mut Criterion) {
    let (f, _) = hyperbolic();
    let psi = make_wavelet(5.0).unwrap();
    let grid = Qcwt::new(psi, ScaleGrid::for_record(&psi, f.len(), f.dt, 16).unwrap()).forward_complex(&f, Lift::Embed);
    let s0 = mask_outside(&stokes_grid(&grid), 0.0, 0.68);
    c.bench_function("ridges/extract_cwt16", |b| {
        b.iter(|| extract_ridges(black_box(&s0), DEFAULT_THRESHOLD, DEFAULT_MIN_LEN).unwrap())
    });
    let ridges = extract_ridges(&s0, DEFAULT_THRESHOLD, DEFAULT_MIN_LEN).unwrap();
    c.bench_function("ridges/profile_cwt16", |b| {
        b.iter(|| {
            ridges
                .iter()
                .map(|r| ridge_profile(black_box(&grid), r).unwrap())
                .collect::<Vec<_>>()
        })
    });
    c.bench_function("stokes/cwt16", |b| b.iter(|| stokes_grid(black_box(&grid))));
}

criterion_group!(benches, qft, embedding, stft, cwt, ridges);
criterion_main!(benches);
