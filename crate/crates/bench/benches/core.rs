use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qperc_core::boolean::{generate_target_suite, parity};
use qperc_core::encode::{EncodedDataset, Encoding};
use qperc_core::express::is_expressible;
use qperc_core::kernel::{integral_operator_spectrum, quantum_kernel};
use qperc_core::prior::sample_prior;
use qperc_core::qmap::{
    complex_tensor_square, haar_isometry, qnn_eval, random_unit_vector, tpp_eval, unitary_to_tpp, QnnUnitary,
};
use qperc_core::rng::stream;

fn mapping(c: &mut Criterion) {
    let mut group = c.benchmark_group("mapping");
    for dim in [4usize, 16, 64] {
        group.bench_with_input(BenchmarkId::new("haar_isometry", dim), &dim, |b, &dim| {
            let mut rng = stream(0, "bench", 0);
            b.iter(|| haar_isometry(2 * dim, dim, &mut rng));
        });
        let mut rng = stream(1, "bench", 0);
        let u = QnnUnitary::haar(dim, &mut rng);
        let w = unitary_to_tpp(&u).unwrap();
        let x = random_unit_vector(dim, &mut rng);
        let h = complex_tensor_square(&x);
        group.bench_with_input(BenchmarkId::new("qnn_eval", dim), &dim, |b, _| b.iter(|| qnn_eval(&u, black_box(&x))));
        group.bench_with_input(BenchmarkId::new("tpp_eval", dim), &dim, |b, _| b.iter(|| tpp_eval(&w, black_box(&h))));
        group.bench_with_input(BenchmarkId::new("unitary_to_tpp", dim), &dim, |b, _| b.iter(|| unitary_to_tpp(&u)));
    }
    group.finish();
}

fn kernels(c: &mut Criterion) {
    let amp = EncodedDataset::boolean(Encoding::Amplitude01, 7).unwrap();
    let states = amp.states().unwrap();
    c.bench_function("quantum_kernel n=7", |b| b.iter(|| quantum_kernel(black_box(&states))));
    let k = quantum_kernel(&states).unwrap();
    c.bench_function("spectrum n=7", |b| b.iter(|| integral_operator_spectrum(black_box(&k))));
}

fn expressibility(c: &mut Criterion) {
    let mut group = c.benchmark_group("expressibility");
    group.sample_size(10);
    let amp4 = EncodedDataset::boolean(Encoding::Amplitude01, 4).unwrap();
    group.bench_function("exact parity n=4", |b| b.iter(|| is_expressible(&amp4, &parity(4), false)));
    let amp7 = EncodedDataset::boolean(Encoding::Amplitude01, 7).unwrap();
    let f = generate_target_suite(7, 1).entries[10].function.clone();
    group.bench_function("float suite function n=7", |b| b.iter(|| is_expressible(&amp7, &f, false)));
    group.finish();
}

fn prior(c: &mut Criterion) {
    let mut group = c.benchmark_group("prior");
    group.sample_size(10);
    for enc in [Encoding::Amplitude01, Encoding::Basis] {
        let ds = EncodedDataset::boolean(enc, 4).unwrap();
        group.bench_function(format!("1000 draws {enc} n=4"), |b| b.iter(|| sample_prior(&ds, 1000, 3)));
    }
    group.finish();
}

criterion_group!(benches, mapping, kernels, expressibility, prior);
criterion_main!(benches);
