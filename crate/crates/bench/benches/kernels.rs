use criterion::{black_box, criterion_group, criterion_main, Criterion};
use qsr_bench::{density, pure, three_qubits};
use qsr_core::convex_split::{verify_lemma, ConvexSplitInstance};
use qsr_core::entropies::{fidelity, imax};
use qsr_core::protocols::{redistribute, uhlmann_isometry, ProtocolOptions, RedistributionInput};
use qsr_core::qeps::{qeps_upper, QepsOptions};

fn quantities(c: &mut Criterion) {
    let r = density(&[("X", 16)], 1);
    let s = density(&[("X", 16)], 2);
    c.bench_function("fidelity_16", |b| b.iter(|| fidelity(black_box(&r), black_box(&s)).unwrap()));
    let ab = density(&[("A", 2), ("B", 2)], 3);
    c.bench_function("imax_sdp_2x2", |b| b.iter(|| imax(black_box(&ab), &["A"], &["B"]).unwrap()));
    let abc = density(&[("A", 2), ("B", 4)], 4);
    c.bench_function("imax_sdp_2x4", |b| b.iter(|| imax(black_box(&abc), &["A"], &["B"]).unwrap()));
}

fn convex_split(c: &mut Criterion) {
    let rho = density(&[("P", 2), ("Q", 2)], 5);
    let sigma = rho.marginal(&["Q"]).unwrap();
    let inst = ConvexSplitInstance::new(rho, sigma, 0.12, Some(6)).unwrap();
    c.bench_function("convex_split_dense_n6", |b| b.iter(|| verify_lemma(black_box(&inst)).unwrap()));
}

fn uhlmann(c: &mut Criterion) {
    let p1 = pure(&[("X", 4), ("Y", 32)], 6);
    let p2 = pure(&[("X", 4), ("Z", 16)], 7);
    c.bench_function("uhlmann_4x32", |b| b.iter(|| uhlmann_isometry(black_box(&p1), black_box(&p2), &["X"]).unwrap()));
}

fn optimizer_and_protocol(c: &mut Criterion) {
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    let psi = three_qubits(8);
    let qo = QepsOptions { restarts: 1, iterations: 100, ..QepsOptions::default() };
    g.bench_function("qeps_upper_3q", |b| b.iter(|| qeps_upper(black_box(&psi), 0.1, &qo).unwrap()));
    let opts = ProtocolOptions { qeps: qo, amplitude_cap: 1 << 12, ..ProtocolOptions::default() };
    let input = RedistributionInput { psi, eps: 0.15, achieving_point: None, n_override: None };
    g.bench_function("redistribute_3q_cap4096", |b| b.iter(|| redistribute(black_box(&input), &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, quantities, convex_split, uhlmann, optimizer_and_protocol);
criterion_main!(benches);
