use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, SamplingMode};
use iep_bench::{engine_fixtures, lemma_fixtures};
use iep_core::theorems::lemmas::{LemmaOptions, LemmaSuite, Sampling};
use iep_core::{coeffs_chi, coeffs_series, height, DegreeCap, LemmaId, Mode};

const CAP: DegreeCap = DegreeCap(50_000_000);

fn engines(c: &mut Criterion) {
    let mut g = c.benchmark_group("engines");
    g.sampling_mode(SamplingMode::Flat).sample_size(10);
    for (label, t) in engine_fixtures() {
        g.bench_with_input(BenchmarkId::new("series", label), &t, |b, t| {
            b.iter(|| coeffs_series(black_box(t), Mode::Full, CAP).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("series-half", label), &t, |b, t| {
            b.iter(|| coeffs_series(black_box(t), Mode::Half, CAP).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("chi", label), &t, |b, t| {
            b.iter(|| coeffs_chi(black_box(t), CAP).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("height", label), &t, |b, t| {
            b.iter(|| height(black_box(t), CAP).unwrap())
        });
    }
    g.finish();
}

fn lemmas(c: &mut Criterion) {
    let mut g = c.benchmark_group("lemmas");
    g.sampling_mode(SamplingMode::Flat).sample_size(10);
    let options = LemmaOptions {
        sampling: Sampling::Exhaustive,
        all_roles: false,
        cap: CAP,
    };
    for (label, t) in lemma_fixtures() {
        g.bench_with_input(BenchmarkId::new("build", label), &t, |b, t| {
            b.iter(|| LemmaSuite::new(*black_box(t), None, options).unwrap())
        });
        let suite = LemmaSuite::new(t, None, options).unwrap();
        for id in LemmaId::ALL.into_iter().filter(|&id| id != LemmaId::Lemma1) {
            g.bench_with_input(BenchmarkId::new(id.name(), label), &suite, |b, s| {
                b.iter(|| s.check(id).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, engines, lemmas);
criterion_main!(benches);
