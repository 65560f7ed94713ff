use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use gerkit_core::augment::{plan_augmentation, AugmentConfig};
use gerkit_core::metrics::wer;
use gerkit_core::nbest::{normalized_edit_distance, select_diverse, NBestList};
use gerkit_core::transcript::normalize_tokens;

const BASE: [&str; 10] = ["my", "favorite", "pet", "is", "the", "one", "that", "sits", "on", "lap"];

fn pool(n: usize) -> NBestList {
    let texts: Vec<String> = (0..n)
        .map(|i| {
            BASE.iter()
                .enumerate()
                .map(|(j, w)| {
                    if (i + j) % 4 == 0 {
                        format!("{w}{}", i % 3)
                    } else {
                        w.to_string()
                    }
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    NBestList::from_texts("bench", texts)
}

fn bench_select(c: &mut Criterion) {
    let mut group = c.benchmark_group("select_diverse");
    for n in [5, 20, 50] {
        let list = pool(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &list, |b, list| {
            b.iter(|| select_diverse(black_box(list), 5).unwrap())
        });
    }
    group.finish();
}

fn bench_wer(c: &mut Criterion) {
    let reference = normalize_tokens("My favorite pet is the one that sits on my lap.");
    let hypothesis = normalize_tokens("My favorite play is the one that's set on Monday.");
    c.bench_function("wer/favorite_pet", |b| {
        b.iter(|| wer(black_box(&reference), black_box(&hypothesis)))
    });

    let long_ref: Vec<String> = (0..200).map(|i| BASE[i % BASE.len()].to_string()).collect();
    let long_hyp: Vec<String> = (0..190).map(|i| BASE[(i * 7) % BASE.len()].to_string()).collect();
    c.bench_function("wer/200_words", |b| {
        b.iter(|| wer(black_box(&long_ref), black_box(&long_hyp)))
    });
}

fn bench_ned(c: &mut Criterion) {
    let a = "my favorite play is the one thats set on monday";
    let b = "my favorite pet is the one that sits on my lap";
    c.bench_function("normalized_edit_distance", |bench| {
        bench.iter(|| normalized_edit_distance(black_box(a), black_box(b)))
    });
}

fn bench_plan(c: &mut Criterion) {
    let config = AugmentConfig {
        noise_pool: vec!["babble".into(), "music".into(), "street".into()],
        ..AugmentConfig::default()
    };
    let mut i = 0u64;
    c.bench_function("plan_augmentation", |b| {
        b.iter(|| {
            i += 1;
            plan_augmentation(black_box(7), &format!("utt-{i}"), &config).unwrap()
        })
    });
}

criterion_group!(benches, bench_select, bench_wer, bench_ned, bench_plan);
criterion_main!(benches);
